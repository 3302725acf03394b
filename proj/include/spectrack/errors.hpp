#pragma once

#include <stdexcept>
#include <string>

namespace spectrack {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class RankDeficient : public Error {
public:
    using Error::Error;
};

class NotSymmetric : public Error {
public:
    using Error::Error;
};

class IsolatedVertex : public Error {
public:
    using Error::Error;
};

class InvalidRate : public Error {
public:
    using Error::Error;
};

class NonpositiveDenominator : public Error {
public:
    using Error::Error;
};

class DegenerateSpectrum : public Error {
public:
    using Error::Error;
};

class BlockBreakdown : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line) : Error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
    long line_number;
};

class EmptyStream : public Error {
public:
    using Error::Error;
};

class Exhausted : public Error {
public:
    using Error::Error;
};

class InvalidEdit : public Error {
public:
    using Error::Error;
};

class DegreeViolation : public Error {
public:
    using Error::Error;
};

class AlphaTooLarge : public Error {
public:
    using Error::Error;
};

class GapTooSmall : public Error {
public:
    using Error::Error;
};

class WindowTooLarge : public Error {
public:
    using Error::Error;
};

class BadWindow : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

} // namespace spectrack
