#include "spectrack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace spectrack {

namespace {

Edge normalized_edge(Index u, Index v) { return u < v ? Edge{u, v} : Edge{v, u}; }

} // namespace

GraphState make_graph_state(SparseSymmetric adjacency, double tau) {
    GraphState s;
    s.n = adjacency.size();
    s.raw_degrees = adjacency.row_sums();
    s.adjacency = std::make_shared<const SparseSymmetric>(std::move(adjacency));
    s.tau = tau;
    if (tau == 0.0) {
        for (Index i = 0; i < s.n; ++i)
            if (s.raw_degrees(i) <= 0.0)
                throw IsolatedVertex("vertex " + std::to_string(i) + " isolated with tau == 0");
    }
    return s;
}

TemporalEdgeList load_temporal_edges(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open edge file: " + path);
    return load_temporal_edges(in);
}

TemporalEdgeList load_temporal_edges(std::istream& in) {
    struct RawEdge {
        long long u, v, t;
        long order;
    };
    std::vector<RawEdge> raw;
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        long long u, v, t;
        if (!(fields >> u >> v >> t)) throw ParseError("expected `src dst timestamp`", line_number);
        std::string rest;
        if (fields >> rest) throw ParseError("trailing tokens", line_number);
        if (u == v) continue; // self-loop
        raw.push_back({u, v, t, line_number});
    }
    if (raw.empty()) throw EmptyStream("no edges in stream");

    // keep the earliest occurrence of each undirected pair
    std::map<std::pair<long long, long long>, std::pair<long long, long>> earliest;
    for (const auto& e : raw) {
        const auto key = e.u < e.v ? std::make_pair(e.u, e.v) : std::make_pair(e.v, e.u);
        auto it = earliest.find(key);
        const auto stamp = std::make_pair(e.t, e.order);
        if (it == earliest.end() || stamp < it->second) earliest[key] = stamp;
    }

    // compact ids in ascending original order
    std::set<long long> ids;
    for (const auto& [key, stamp] : earliest) {
        ids.insert(key.first);
        ids.insert(key.second);
    }
    TemporalEdgeList out;
    out.original_ids.assign(ids.begin(), ids.end());
    out.n = static_cast<Index>(out.original_ids.size());
    std::map<long long, Index> compact;
    for (Index i = 0; i < out.n; ++i) compact[out.original_ids[i]] = i;

    struct Keyed {
        long long t;
        long order;
        TemporalEdge edge;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(earliest.size());
    for (const auto& [key, stamp] : earliest)
        keyed.push_back({stamp.first, stamp.second, {compact[key.first], compact[key.second], stamp.first}});
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.t, a.order) < std::tie(b.t, b.order);
    });
    out.edges.reserve(keyed.size());
    for (const auto& k : keyed) out.edges.push_back(k.edge);
    return out;
}

ComponentResult largest_connected_component(const GraphState& state) {
    const Index n = state.n;
    std::vector<Index> component(n, -1);
    Index count = 0;
    std::vector<Index> stack;
    const auto edges = state.adjacency->edge_list();
    std::vector<std::vector<Index>> adj(n);
    for (const auto& [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (Index start = 0; start < n; ++start) {
        if (component[start] >= 0) continue;
        stack.push_back(start);
        component[start] = count;
        while (!stack.empty()) {
            const Index u = stack.back();
            stack.pop_back();
            for (Index v : adj[u]) {
                if (component[v] < 0) {
                    component[v] = count;
                    stack.push_back(v);
                }
            }
        }
        ++count;
    }

    std::vector<Index> sizes(count, 0);
    for (Index i = 0; i < n; ++i) ++sizes[component[i]];
    // largest component; ties resolved by the smallest contained vertex id,
    // which is the component discovered first
    Index best = 0;
    for (Index c = 1; c < count; ++c)
        if (sizes[c] > sizes[best]) best = c;

    ComponentResult out;
    out.relabeling.assign(n, -1);
    Index next = 0;
    for (Index i = 0; i < n; ++i)
        if (component[i] == best) out.relabeling[i] = next++;

    std::vector<Edge> kept;
    for (const auto& [u, v] : edges)
        if (out.relabeling[u] >= 0 && out.relabeling[v] >= 0)
            kept.emplace_back(out.relabeling[u], out.relabeling[v]);
    out.state = make_graph_state(SparseSymmetric::from_edges(next, kept), state.tau);
    return out;
}

GraphState sample_sbm(const SBMConfig& cfg, double tau) {
    if (cfg.p_in < 0.0 || cfg.p_in > 1.0 || cfg.p_out < 0.0 || cfg.p_out > cfg.p_in)
        throw InvalidConfig("sample_sbm expects 0 <= p_out <= p_in <= 1");
    if (cfg.blocks < 1 || cfg.n < cfg.blocks) throw InvalidConfig("invalid block count");

    const Index per_block = cfg.n / cfg.blocks;
    auto block_of = [&](Index v) {
        const Index b = v / per_block;
        return std::min<Index>(b, cfg.blocks - 1); // remainder joins the last block
    };

    Rng rng(Rng::derive_seed(cfg.seed, 0x73626d));
    std::vector<Edge> edges;
    for (Index u = 0; u < cfg.n; ++u) {
        for (Index v = u + 1; v < cfg.n; ++v) {
            const double p = block_of(u) == block_of(v) ? cfg.p_in : cfg.p_out;
            if (p > 0.0 && rng.bernoulli(p)) edges.emplace_back(u, v);
        }
    }
    SparseSymmetric adj = SparseSymmetric::from_edges(cfg.n, edges);
    // allow empty/disconnected draws: regularization handles zero degrees,
    // tau == 0 callers get the IsolatedVertex error from make_graph_state
    return make_graph_state(std::move(adj), tau);
}

EdgeBatch interpolation_step(const GraphState& current, const GraphState& target, double h,
                             Rng& rng) {
    if (current.n != target.n) throw DimensionMismatch("interpolation expects a shared vertex set");
    const Index n = current.n;

    EdgeBatch batch;
    const bool toward = rng.bernoulli(h);
    if (toward) {
        // uniform over the symmetric difference
        std::vector<std::pair<Edge, bool>> pool; // (edge, is_addition)
        for (const auto& e : target.adjacency->edge_list())
            if (!current.adjacency->has_edge(e.first, e.second)) pool.emplace_back(e, true);
        for (const auto& e : current.adjacency->edge_list())
            if (!target.adjacency->has_edge(e.first, e.second)) pool.emplace_back(e, false);
        if (pool.empty()) throw Exhausted("graphs coincide; no edit decreases the distance");
        const auto& [edge, is_add] = pool[rng.integer(pool.size())];
        if (is_add)
            batch.additions.push_back(edge);
        else
            batch.deletions.push_back(edge);
        return batch;
    }

    // away edit: 50/50 between adding a pair absent from both graphs and
    // deleting an edge present in both
    bool try_add = rng.bernoulli(0.5);
    for (int attempt = 0; attempt < 2; ++attempt, try_add = !try_add) {
        if (try_add) {
            const std::uint64_t max_tries = 20ULL * static_cast<std::uint64_t>(n) * n + 64;
            for (std::uint64_t t = 0; t < max_tries; ++t) {
                const Index u = static_cast<Index>(rng.integer(n));
                const Index v = static_cast<Index>(rng.integer(n));
                if (u == v) continue;
                const auto e = normalized_edge(u, v);
                if (!current.adjacency->has_edge(e.first, e.second) &&
                    !target.adjacency->has_edge(e.first, e.second)) {
                    batch.additions.push_back(e);
                    return batch;
                }
            }
        } else {
            std::vector<Edge> shared;
            for (const auto& e : current.adjacency->edge_list())
                if (target.adjacency->has_edge(e.first, e.second)) shared.push_back(e);
            if (!shared.empty()) {
                batch.deletions.push_back(shared[rng.integer(shared.size())]);
                return batch;
            }
        }
    }
    throw Exhausted("no admissible away edit exists");
}

BatchResult apply_batch(const GraphState& state, const EdgeBatch& batch) {
    const Index n = state.n;
    std::set<Edge> touched;
    auto check_pair = [&](Index u, Index v) {
        if (u < 0 || u >= n || v < 0 || v >= n) throw InvalidEdit("vertex out of range");
        if (u == v) throw InvalidEdit("self-loops are not allowed");
        if (!touched.insert(normalized_edge(u, v)).second)
            throw InvalidEdit("batch touches the same pair twice");
    };

    Vector net = Vector::Zero(n);
    for (const auto& [u, v] : batch.additions) {
        check_pair(u, v);
        if (state.adjacency->has_edge(u, v)) throw InvalidEdit("addition already present");
        net(u) += 1.0;
        net(v) += 1.0;
    }
    for (const auto& [u, v] : batch.deletions) {
        check_pair(u, v);
        if (!state.adjacency->has_edge(u, v)) throw InvalidEdit("deletion not present");
        net(u) -= 1.0;
        net(v) -= 1.0;
    }

    const Vector regularized = state.regularized_degrees();
    double alpha = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (net(i) == 0.0) continue;
        alpha = std::max(alpha, std::abs(net(i)) / regularized(i));
        if (state.raw_degrees(i) + net(i) + state.tau <= 0.0)
            throw DegreeViolation("update would zero out the regularized degree of vertex " +
                                  std::to_string(i));
    }
    if (alpha >= 1.0) throw DegreeViolation("alpha >= 1: batch too aggressive for vertex degrees");

    BatchResult out;
    out.alpha = alpha;
    GraphState next;
    next.n = n;
    next.tau = state.tau;
    next.adjacency = std::make_shared<const SparseSymmetric>(
        state.adjacency->with_edges_toggled(batch.additions, batch.deletions));
    next.raw_degrees = state.raw_degrees + net;
    out.perturbation = perturbation_from_graph_update(state.normalized(), next.normalized());
    out.state = std::move(next);
    return out;
}

double sparse_update_bound(double alpha, double kappa_d, Index rank_e_upper) {
    if (alpha < 0.0) throw InvalidConfig("alpha must be nonnegative");
    if (alpha >= 1.0) throw AlphaTooLarge("bound requires alpha < 1");
    const double effective_rank = std::min(kappa_d, static_cast<double>(rank_e_upper));
    const double linear = alpha * (1.0 + alpha + std::sqrt(std::max(0.0, effective_rank)));
    const double quadratic = std::pow(alpha * (1.0 + alpha) / 2.0, 2);
    return linear + quadratic;
}

Index edit_distance(const GraphState& a, const GraphState& b) {
    if (a.n != b.n) throw DimensionMismatch("edit distance expects a shared vertex set");
    Index distance = 0;
    for (const auto& e : a.adjacency->edge_list())
        if (!b.adjacency->has_edge(e.first, e.second)) ++distance;
    for (const auto& e : b.adjacency->edge_list())
        if (!a.adjacency->has_edge(e.first, e.second)) ++distance;
    return distance;
}

} // namespace spectrack
