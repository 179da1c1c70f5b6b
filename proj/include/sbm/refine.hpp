#pragma once

#include "sbm/graph.hpp"
#include "sbm/parallel.hpp"
#include "sbm/spectral.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sbm {

// Block edge densities under a (possibly partial) labeling. Entries are
// NaN where no pair of the required kind exists; label 0 is excluded
// from every count.
struct ConnectivityEstimate {
    Eigen::MatrixXd matrix;     // k x k densities
    double a_hat = 0.0;         // n * min defined diagonal
    double b_hat = 0.0;         // n * max defined off-diagonal; NaN if none defined
    std::vector<int> excluded;  // 1-based communities with at most one member
};

inline ConnectivityEstimate estimate_connectivity(const Graph& g, const LabelVector& labels) {
    labels.validate(/*allow_partial=*/true);
    if (labels.size() != g.node_count())
        throw std::invalid_argument("estimate_connectivity: labels do not cover the graph");
    const int k = labels.k;
    const double n = static_cast<double>(g.node_count());
    const auto sizes = labels.sizes();

    Eigen::MatrixXd edge_counts = Eigen::MatrixXd::Zero(k, k);
    g.for_each_edge([&](int u, int v) {
        const int i = labels[u];
        const int j = labels[v];
        if (i == 0 || j == 0) return;
        edge_counts(i - 1, j - 1) += 1.0;
        if (i != j) edge_counts(j - 1, i - 1) += 1.0;
    });

    const double nan = std::numeric_limits<double>::quiet_NaN();
    ConnectivityEstimate est;
    est.matrix = Eigen::MatrixXd::Constant(k, k, nan);
    for (int i = 0; i < k; ++i) {
        const double si = static_cast<double>(sizes[static_cast<size_t>(i) + 1]);
        if (si <= 1.0) {
            est.excluded.push_back(i + 1);
        } else {
            est.matrix(i, i) = edge_counts(i, i) / (0.5 * si * (si - 1.0));
        }
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const double sj = static_cast<double>(sizes[static_cast<size_t>(j) + 1]);
            if (si >= 1.0 && sj >= 1.0) est.matrix(i, j) = edge_counts(i, j) / (si * sj);
        }
    }

    est.a_hat = nan;
    for (int i = 0; i < k; ++i)
        if (std::isfinite(est.matrix(i, i)))
            est.a_hat = std::isnan(est.a_hat) ? n * est.matrix(i, i)
                                              : std::min(est.a_hat, n * est.matrix(i, i));
    if (std::isnan(est.a_hat))
        throw std::runtime_error(
            "estimate_connectivity: every community has at most one member");
    est.b_hat = nan;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j && std::isfinite(est.matrix(i, j)))
                est.b_hat = std::isnan(est.b_hat) ? n * est.matrix(i, j)
                                                  : std::max(est.b_hat, n * est.matrix(i, j));
    return est;
}

enum class PenaltyMode { Adaptive, Truncated, Known };

struct PenaltyOptions {
    PenaltyMode mode = PenaltyMode::Adaptive;
    double epsilon0 = 0.1;   // Truncated: cap t at log(2/epsilon0)
    double known_a = 0.0;    // Known: supplied rates replace the estimates
    double known_b = 0.0;
};

struct TiltResult {
    double t = 0.0;
    bool degenerate = false;  // a_hat <= b_hat (or undefined estimates): t <= 0
    bool infinite = false;    // b_hat = 0 or a_hat = n and no truncation binds
};

// t = (1/2) log[ a(1 - b/n) / (b(1 - a/n)) ], capped at log(2/epsilon0)
// in Truncated mode. Degeneracies are flagged, not thrown; callers fall
// back to a zero penalty.
inline TiltResult penalty_t(double a_hat, double b_hat, double n, const PenaltyOptions& opts = {}) {
    if (opts.mode == PenaltyMode::Known) {
        a_hat = opts.known_a;
        b_hat = opts.known_b;
    }
    TiltResult out;
    if (std::isnan(a_hat) || std::isnan(b_hat)) {
        out.t = std::numeric_limits<double>::quiet_NaN();
        out.degenerate = true;
        return out;
    }
    const double p = a_hat / n;
    const double q = b_hat / n;
    out.t = 0.5 * std::log((a_hat * (1.0 - q)) / (b_hat * (1.0 - p)));
    if (opts.mode == PenaltyMode::Truncated) {
        const double cap = std::log(2.0 / opts.epsilon0);
        out.t = std::min(out.t, cap);
    }
    if (std::isnan(out.t) || out.t <= 0.0) out.degenerate = true;
    if (std::isinf(out.t)) out.infinite = true;
    return out;
}

// rho = -(1/(2t)) log[ (p e^{-t} + 1 - p) / (q e^{t} + 1 - q) ] with
// p = a_hat/n, q = b_hat/n. Requires a positive finite tilt.
inline double penalty_rho(double a_hat, double b_hat, double n, double t) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw std::invalid_argument("penalty_rho: tilt must be positive and finite");
    const double p = a_hat / n;
    const double q = b_hat / n;
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("penalty_rho: rate arguments outside [0, 1]");
    const double numer = p * std::exp(-t) + 1.0 - p;
    const double denom = q * std::exp(t) + 1.0 - q;
    return -std::log(numer / denom) / (2.0 * t);
}

struct PenaltyValue {
    double t = 0.0;
    double rho = 0.0;
    bool fallback = false;  // degenerate tilt; vote ran with rho = 0
};

// Penalty pipeline with the zero-rho fallback for degenerate tilts.
inline PenaltyValue resolve_penalty(double a_hat, double b_hat, double n,
                                    const PenaltyOptions& opts = {}) {
    const TiltResult tilt = penalty_t(a_hat, b_hat, n, opts);
    PenaltyValue out;
    out.t = tilt.t;
    if (tilt.degenerate || tilt.infinite) {
        out.rho = 0.0;
        out.fallback = true;
        return out;
    }
    const double a = opts.mode == PenaltyMode::Known ? opts.known_a : a_hat;
    const double b = opts.mode == PenaltyMode::Known ? opts.known_b : b_hat;
    out.rho = penalty_rho(a, b, n, tilt.t);
    return out;
}

// argmax over labels l of (neighbors of u labeled l) - rho * |label l|;
// ties break toward the lowest label. Label 0 never scores.
inline int penalized_vote(const Graph& g, int u, const LabelVector& labels, double rho) {
    if (labels.size() != g.node_count())
        throw std::invalid_argument("penalized_vote: labels do not cover the graph");
    const int k = labels.k;
    std::vector<std::int64_t> neighbor_count(static_cast<size_t>(k) + 1, 0);
    for (int v : g.neighbors(u)) ++neighbor_count[static_cast<size_t>(labels[v])];
    const auto sizes = labels.sizes();
    int best = 1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int l = 1; l <= k; ++l) {
        const double score = static_cast<double>(neighbor_count[static_cast<size_t>(l)]) -
                             rho * static_cast<double>(sizes[static_cast<size_t>(l)]);
        if (score > best_score) {
            best_score = score;
            best = l;
        }
    }
    return best;
}

// Label map aligning `other` onto `reference`:
// map(i) = argmax_l |{v : reference(v) = l} cap {v : other(v) = i}|.
// Reported, never rejected, when it fails to be a permutation.
struct ConsensusMap {
    std::vector<int> map;  // map[i-1] is the image of label i
    bool is_permutation = false;

    int operator()(int label) const { return map[static_cast<size_t>(label) - 1]; }
};

inline ConsensusMap consensus_align(const LabelVector& reference, const LabelVector& other) {
    reference.validate();
    other.validate();
    if (reference.size() != other.size())
        throw std::invalid_argument("consensus_align: label vectors differ in length");
    if (reference.k != other.k)
        throw std::invalid_argument("consensus_align: label vectors differ in k");
    const int k = reference.k;
    std::vector<std::vector<std::int64_t>> overlap(
        static_cast<size_t>(k), std::vector<std::int64_t>(static_cast<size_t>(k), 0));
    for (int v = 0; v < reference.size(); ++v)
        ++overlap[static_cast<size_t>(reference[v]) - 1][static_cast<size_t>(other[v]) - 1];

    ConsensusMap out;
    out.map.assign(static_cast<size_t>(k), 1);
    for (int i = 0; i < k; ++i) {
        std::int64_t best = -1;
        for (int l = 0; l < k; ++l) {
            if (overlap[static_cast<size_t>(l)][static_cast<size_t>(i)] > best) {
                best = overlap[static_cast<size_t>(l)][static_cast<size_t>(i)];
                out.map[static_cast<size_t>(i)] = l + 1;
            }
        }
    }
    std::vector<char> seen(static_cast<size_t>(k), false);
    out.is_permutation = true;
    for (int image : out.map) {
        if (seen[static_cast<size_t>(image) - 1]) out.is_permutation = false;
        seen[static_cast<size_t>(image) - 1] = true;
    }
    return out;
}

// Initial community detection method fed to the refinement schemes.
struct InitializerSpec {
    enum class Kind { Usc, Nsc, Fixed };

    Kind kind = Kind::Usc;
    TauPolicy tau = TauPolicy::average_degree_multiple(2.0);
    double mu = 0.5;
    LabelVector fixed_labels;

    static InitializerSpec usc_default() {
        return {Kind::Usc, TauPolicy::average_degree_multiple(2.0), 0.5, {}};
    }
    static InitializerSpec nsc_default() {
        return {Kind::Nsc, TauPolicy::average_degree_multiple(1.0), 0.5, {}};
    }
    static InitializerSpec fixed(LabelVector labels) {
        return {Kind::Fixed, TauPolicy::infinite(), 0.5, std::move(labels)};
    }

    LabelVector run(const Graph& g, int k) const {
        switch (kind) {
            case Kind::Usc: return usc(g, k, tau, mu);
            case Kind::Nsc: return nsc(g, k, tau, mu);
            case Kind::Fixed:
                if (fixed_labels.size() != g.node_count())
                    throw std::invalid_argument("initializer: fixed labels do not cover the graph");
                return fixed_labels;
        }
        throw std::logic_error("initializer: unknown kind");
    }

    // Leave-one-out run: the initializer sees the graph without node u
    // and the result comes back as an n-vector with 0 at u.
    LabelVector run_excluding(const Graph& g, int k, int u) const {
        LabelVector out;
        out.k = k;
        out.values.assign(static_cast<size_t>(g.node_count()), 0);
        if (kind == Kind::Fixed) {
            if (fixed_labels.size() != g.node_count())
                throw std::invalid_argument("initializer: fixed labels do not cover the graph");
            out.values = fixed_labels.values;
            out[u] = 0;
            return out;
        }
        const SubgraphResult sub = subgraph_excluding(g, u);
        const LabelVector sub_labels = run(sub.graph, k);
        for (int v = 0; v < g.node_count(); ++v)
            if (v != u) out[v] = sub_labels[sub.old_to_new[static_cast<size_t>(v)]];
        return out;
    }
};

struct RefineOptions {
    PenaltyOptions penalty;
    InitializerSpec init = InitializerSpec::usc_default();
    int jobs = 1;
};

struct RefineDiagnostics {
    std::vector<double> t_values;    // per node
    std::vector<double> rho_values;  // per node
    int fallback_count = 0;
    int non_permutation_consensus = 0;
    double seconds = 0.0;
};

// Leave-one-out refinement: for every node, re-initialize on the graph
// without it, estimate the connectivity, and re-vote that node with the
// adaptive penalty; then align the n per-node assignments by maximum
// label overlap against the first one.
inline std::pair<LabelVector, RefineDiagnostics> refine_full(const Graph& g, int k,
                                                             const RefineOptions& options) {
    const int n = g.node_count();
    if (n < k || k < 2) throw std::invalid_argument("refine_full: need n >= k >= 2");
    const auto start = std::chrono::steady_clock::now();

    RefineDiagnostics diag;
    diag.t_values.assign(static_cast<size_t>(n), 0.0);
    diag.rho_values.assign(static_cast<size_t>(n), 0.0);
    std::vector<LabelVector> per_node(static_cast<size_t>(n));
    std::vector<char> fallback(static_cast<size_t>(n), false);

    parallel_for(0, n, options.jobs, [&](int u) {
        LabelVector sigma0;
        try {
            sigma0 = options.init.run_excluding(g, k, u);
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "refine_full: initializer failed at node " << u << ": " << e.what();
            throw std::runtime_error(os.str());
        }
        PenaltyValue penalty;
        if (options.penalty.mode == PenaltyMode::Known) {
            penalty = resolve_penalty(0.0, 0.0, static_cast<double>(n), options.penalty);
        } else {
            const ConnectivityEstimate est = estimate_connectivity(g, sigma0);
            penalty = resolve_penalty(est.a_hat, est.b_hat, static_cast<double>(n),
                                      options.penalty);
        }
        sigma0[u] = penalized_vote(g, u, sigma0, penalty.rho);
        per_node[static_cast<size_t>(u)] = std::move(sigma0);
        diag.t_values[static_cast<size_t>(u)] = penalty.t;
        diag.rho_values[static_cast<size_t>(u)] = penalty.rho;
        fallback[static_cast<size_t>(u)] = penalty.fallback;
    });

    for (char f : fallback) diag.fallback_count += f ? 1 : 0;

    LabelVector result;
    result.k = k;
    result.values.assign(static_cast<size_t>(n), 0);
    result[0] = per_node[0][0];
    for (int u = 1; u < n; ++u) {
        const ConsensusMap xi = consensus_align(per_node[0], per_node[static_cast<size_t>(u)]);
        if (!xi.is_permutation) ++diag.non_permutation_consensus;
        result[u] = xi(per_node[static_cast<size_t>(u)][u]);
    }
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(result), std::move(diag)};
}

struct RefineStepInfo {
    double a_hat = 0.0;
    double b_hat = 0.0;
    double t = 0.0;
    double rho = 0.0;
    bool fallback = false;
};

// Single-shot refinement: one initialization on the full graph, one
// global penalty, every node re-voted against the initial labels.
inline LabelVector refine_simplified(const Graph& g, int k, const LabelVector& init_labels,
                                     const PenaltyOptions& penalty_options = {},
                                     RefineStepInfo* info = nullptr) {
    const int n = g.node_count();
    if (init_labels.size() != n)
        throw std::invalid_argument("refine_simplified: labels do not cover the graph");
    init_labels.validate();

    PenaltyValue penalty;
    double a_hat = std::numeric_limits<double>::quiet_NaN();
    double b_hat = std::numeric_limits<double>::quiet_NaN();
    if (penalty_options.mode == PenaltyMode::Known) {
        penalty = resolve_penalty(0.0, 0.0, static_cast<double>(n), penalty_options);
        a_hat = penalty_options.known_a;
        b_hat = penalty_options.known_b;
    } else {
        const ConnectivityEstimate est = estimate_connectivity(g, init_labels);
        a_hat = est.a_hat;
        b_hat = est.b_hat;
        penalty = resolve_penalty(est.a_hat, est.b_hat, static_cast<double>(n), penalty_options);
    }
    if (info) *info = {a_hat, b_hat, penalty.t, penalty.rho, penalty.fallback};

    LabelVector out;
    out.k = k;
    out.values.assign(static_cast<size_t>(n), 0);
    for (int u = 0; u < n; ++u) out[u] = penalized_vote(g, u, init_labels, penalty.rho);
    return out;
}

struct IterationTrace {
    std::vector<int> changes;  // labels changed at each application
    bool converged = false;
    bool cycle_detected = false;
};

// Repeated simplified refinement until a fixed point, a revisited state,
// or the iteration cap.
inline std::pair<LabelVector, IterationTrace> iterate_refinement(
    const Graph& g, int k, const LabelVector& init_labels,
    const PenaltyOptions& penalty_options = {}, int max_iters = 20) {
    if (max_iters < 1) throw std::invalid_argument("iterate_refinement: max_iters must be >= 1");
    IterationTrace trace;
    std::vector<LabelVector> history;
    history.push_back(init_labels);
    LabelVector current = init_labels;
    for (int iter = 0; iter < max_iters; ++iter) {
        LabelVector next = refine_simplified(g, k, current, penalty_options);
        int changed = 0;
        for (int u = 0; u < next.size(); ++u)
            if (next[u] != current[u]) ++changed;
        trace.changes.push_back(changed);
        if (changed == 0) {
            trace.converged = true;
            break;
        }
        for (const LabelVector& past : history) {
            if (past == next) {
                trace.cycle_detected = true;
                break;
            }
        }
        current = std::move(next);
        if (trace.cycle_detected) break;
        history.push_back(current);
    }
    return {std::move(current), std::move(trace)};
}

// Exact maximizer of the within-community edge count enumerated over
// the balanced label space (community sizes inside [n/k - 1, n/k + 1],
// the equal-size parameter window the estimator targets); without the
// size constraint the objective is degenerate, since lumping every node
// into one community keeps all edges internal. Ties resolve to the
// lexicographically first assignment. A test oracle: refuses instances
// with more than 10^7 assignments.
inline LabelVector brute_force_mle(const Graph& g, int k) {
    const int n = g.node_count();
    if (k < 1) throw std::invalid_argument("brute_force_mle: k must be positive");
    if (n * std::log(static_cast<double>(k)) > std::log(1e7))
        throw std::invalid_argument("brute_force_mle: instance too large");
    std::vector<std::pair<int, int>> edges;
    g.for_each_edge([&edges](int u, int v) { edges.emplace_back(u, v); });
    const double size_lo = static_cast<double>(n) / k - 1.0;
    const double size_hi = static_cast<double>(n) / k + 1.0;

    std::vector<int> assignment(static_cast<size_t>(n), 1);
    std::vector<int> best;
    std::int64_t best_score = -1;
    std::vector<int> sizes(static_cast<size_t>(k) + 1, 0);
    while (true) {
        std::fill(sizes.begin(), sizes.end(), 0);
        for (int x : assignment) ++sizes[static_cast<size_t>(x)];
        bool balanced = true;
        for (int l = 1; l <= k; ++l)
            if (sizes[static_cast<size_t>(l)] < size_lo || sizes[static_cast<size_t>(l)] > size_hi)
                balanced = false;
        if (balanced) {
            std::int64_t score = 0;
            for (const auto& [u, v] : edges)
                if (assignment[static_cast<size_t>(u)] == assignment[static_cast<size_t>(v)])
                    ++score;
            if (score > best_score) {  // first maximum in lexicographic order
                best_score = score;
                best = assignment;
            }
        }
        int pos = n - 1;
        while (pos >= 0 && assignment[static_cast<size_t>(pos)] == k) {
            assignment[static_cast<size_t>(pos)] = 1;
            --pos;
        }
        if (pos < 0) break;
        ++assignment[static_cast<size_t>(pos)];
    }
    if (best.empty())
        throw std::invalid_argument("brute_force_mle: no balanced assignment exists");
    return LabelVector(std::move(best), k);
}

}  // namespace sbm
