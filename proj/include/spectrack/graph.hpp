#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spectrack/operators.hpp"
#include "spectrack/rng.hpp"

namespace spectrack {

using Edge = std::pair<Index, Index>; // stored with first < second

/// Undirected graph plus the regularization parameter. Raw degrees are kept
/// as exact integers-in-doubles so applying a batch and its reverse restores
/// the state bit for bit; regularized degrees are derived on demand.
struct GraphState {
    std::shared_ptr<const SparseSymmetric> adjacency;
    Vector raw_degrees;
    double tau = 0.0;
    Index n = 0;

    Vector regularized_degrees() const {
        Vector d = raw_degrees;
        d.array() += tau;
        return d;
    }
    std::shared_ptr<const NormalizedAdjacencyOp> normalized() const {
        return build_normalized_adjacency(adjacency, tau);
    }
};

GraphState make_graph_state(SparseSymmetric adjacency, double tau);

struct EdgeBatch {
    std::vector<Edge> additions;
    std::vector<Edge> deletions;
    long long t_min = 0;
    long long t_max = 0;

    bool empty() const { return additions.empty() && deletions.empty(); }
};

struct TemporalEdge {
    Index u = 0;
    Index v = 0;
    long long timestamp = 0;
};

struct TemporalEdgeList {
    std::vector<TemporalEdge> edges;     // compacted ids, sorted by timestamp
    std::vector<long long> original_ids; // compact id -> original id
    Index n = 0;
};

/// Parses whitespace-separated `src dst timestamp` lines ('#' comments
/// allowed). Self-loops are dropped, duplicates in either orientation keep
/// the earliest occurrence, and the result is sorted by timestamp. Vertex ids
/// are compacted; the id map is returned alongside.
TemporalEdgeList load_temporal_edges(const std::string& path);
TemporalEdgeList load_temporal_edges(std::istream& in);

struct ComponentResult {
    GraphState state;
    std::vector<Index> relabeling; // old id -> new id, -1 when dropped
};

/// Induced subgraph on the largest connected component, vertices relabeled in
/// old-id order. Size ties go to the component with the smallest vertex id.
ComponentResult largest_connected_component(const GraphState& state);

struct SBMConfig {
    Index n = 100;
    int blocks = 2;
    double p_in = 0.5;
    double p_out = 0.1;
    std::uint64_t seed = 0;
};

/// Stochastic block model draw with equal block sizes (remainder on the last
/// block); deterministic per seed.
GraphState sample_sbm(const SBMConfig& cfg, double tau = 0.0);

/// One edge edit evolving `current` toward `target`: with probability h a
/// uniformly random edit from the symmetric difference (decreasing the edit
/// distance), otherwise an edit that increases it. Throws Exhausted when the
/// drawn direction admits no edit.
EdgeBatch interpolation_step(const GraphState& current, const GraphState& target, double h,
                             Rng& rng);

struct BatchResult {
    GraphState state;
    OpPtr perturbation; // difference of normalized operators, never densified
    double alpha = 0.0; // max_i |net modifications at i| / regularized degree
};

/// Validates and applies a batch of edge edits, returning the new graph, the
/// implicit perturbation to the normalized adjacency and the degree ratio
/// alpha measured against pre-update regularized degrees.
BatchResult apply_batch(const GraphState& state, const EdgeBatch& batch);

/// Closed-form a-priori bound on the spectral norm of the normalized
/// adjacency perturbation caused by an edit batch with degree ratio alpha:
/// alpha*(1 + alpha + sqrt(min(kappa_D, rank_E))) + (alpha(1+alpha)/2)^2.
double sparse_update_bound(double alpha, double kappa_d, Index rank_e_upper);

/// Number of edge edits separating two graphs on the same vertex set.
Index edit_distance(const GraphState& a, const GraphState& b);

} // namespace spectrack
