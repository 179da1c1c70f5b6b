#pragma once

#include "sbm/eig.hpp"
#include "sbm/graph.hpp"
#include "sbm/greedy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sbm {

// Regularization parameter choice for the spectral initializers.
struct TauPolicy {
    enum class Mode { Infinite, Zero, AverageDegreeMultiple, Fixed, KnownAMultiple };

    Mode mode = Mode::AverageDegreeMultiple;
    double value = 1.0;    // multiplier (AverageDegreeMultiple, KnownAMultiple) or fixed tau
    double known_a = 0.0;  // within-rate numerator for KnownAMultiple

    static TauPolicy infinite() { return {Mode::Infinite, 0.0, 0.0}; }
    static TauPolicy zero() { return {Mode::Zero, 0.0, 0.0}; }
    static TauPolicy average_degree_multiple(double c) {
        if (!(c > 0.0)) throw std::invalid_argument("tau policy: multiplier must be positive");
        return {Mode::AverageDegreeMultiple, c, 0.0};
    }
    static TauPolicy fixed(double tau) {
        if (!(tau >= 0.0)) throw std::invalid_argument("tau policy: fixed tau must be >= 0");
        return {Mode::Fixed, tau, 0.0};
    }
    static TauPolicy known_a_multiple(double c, double a) {
        if (!(c > 0.0) || !(a > 0.0))
            throw std::invalid_argument("tau policy: known-a multiplier and a must be positive");
        return {Mode::KnownAMultiple, c, a};
    }

    double resolve(const Graph& g) const {
        switch (mode) {
            case Mode::Infinite: return std::numeric_limits<double>::infinity();
            case Mode::Zero: return 0.0;
            case Mode::AverageDegreeMultiple: return value * average_degree(g);
            case Mode::Fixed: return value;
            case Mode::KnownAMultiple: return value * known_a;
        }
        throw std::logic_error("tau policy: unknown mode");
    }
};

struct TrimResult {
    Eigen::MatrixXd matrix;
    std::vector<int> trimmed_nodes;
};

// T_tau(A): rows and columns of nodes with d_u >= tau replaced by zero.
inline TrimResult trim(const Graph& g, double tau) {
    TrimResult out;
    out.matrix = g.dense();
    if (std::isinf(tau)) return out;
    const auto d = degrees(g);
    for (int u = 0; u < g.node_count(); ++u) {
        if (static_cast<double>(d[static_cast<size_t>(u)]) >= tau) {
            out.matrix.row(u).setZero();
            out.matrix.col(u).setZero();
            out.trimmed_nodes.push_back(u);
        }
    }
    return out;
}

// L(A_tau) for A_tau = A + (tau/n) 11^T, normalized by the degrees of
// A_tau itself (d_u + tau).
inline Eigen::MatrixXd regularized_laplacian(const Graph& g, double tau) {
    if (!(tau >= 0.0) || std::isinf(tau))
        throw std::invalid_argument("regularized_laplacian: tau must be finite and >= 0");
    const int n = g.node_count();
    if (n == 0) throw std::invalid_argument("regularized_laplacian: empty graph");
    const auto d = degrees(g);
    Eigen::VectorXd inv_sqrt(n);
    for (int u = 0; u < n; ++u) {
        const double du = static_cast<double>(d[static_cast<size_t>(u)]) + tau;
        if (du <= 0.0) {
            std::ostringstream os;
            os << "regularized_laplacian: node " << u << " has zero degree and tau = 0";
            throw std::invalid_argument(os.str());
        }
        inv_sqrt(u) = 1.0 / std::sqrt(du);
    }
    const double fill = tau / static_cast<double>(n);
    Eigen::MatrixXd l = fill * (inv_sqrt * inv_sqrt.transpose());
    g.for_each_edge([&](int u, int v) {
        l(u, v) += inv_sqrt(u) * inv_sqrt(v);
        l(v, u) += inv_sqrt(u) * inv_sqrt(v);
    });
    return l;
}

struct EigvecResult {
    Eigen::MatrixXd rows;        // n x k, columns orthonormal
    bool degenerate_spectrum = false;  // |eigenvalue| tie at the k-th position
};

// Leading k eigenvectors ordered by descending |eigenvalue| (the SVD
// ordering of a symmetric matrix). Deterministic sign convention: the
// first entry of each column with |entry| > 1e-12 is made positive.
inline EigvecResult leading_eigenvectors(const Eigen::MatrixXd& m, int k) {
    const int n = static_cast<int>(m.rows());
    if (m.cols() != n) throw std::invalid_argument("leading_eigenvectors: matrix not square");
    if (k < 1 || k > n)
        throw std::invalid_argument("leading_eigenvectors: k outside [1, n]");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
        throw std::invalid_argument("leading_eigenvectors: matrix asymmetry beyond tolerance");

    const SymmetricEigen es = symmetric_eigen(m);
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&es](int i, int j) {
        return std::abs(es.values(i)) > std::abs(es.values(j));
    });

    EigvecResult out;
    out.rows.resize(n, k);
    for (int j = 0; j < k; ++j) {
        Eigen::VectorXd col = es.vectors.col(order[static_cast<size_t>(j)]);
        for (int i = 0; i < n; ++i) {
            if (std::abs(col(i)) > 1e-12) {
                if (col(i) < 0.0) col = -col;
                break;
            }
        }
        out.rows.col(j) = col;
    }
    if (k < n) {
        const double boundary = std::abs(es.values(order[static_cast<size_t>(k) - 1]));
        const double next = std::abs(es.values(order[static_cast<size_t>(k)]));
        if (boundary == next) out.degenerate_spectrum = true;
    }
    return out;
}

enum class SpectralMethod { Usc, Nsc };

// Spectral embedding of the graph: n rows, one per node, k columns.
struct Embedding {
    Eigen::MatrixXd rows;
    SpectralMethod source = SpectralMethod::Usc;
    double tau = 0.0;
    bool degenerate_spectrum = false;
    std::vector<int> trimmed_nodes;  // USC only
};

inline Embedding usc_embedding(const Graph& g, int k, const TauPolicy& policy) {
    const double tau = policy.resolve(g);
    if (!std::isinf(tau) && !(tau > 0.0))
        throw std::invalid_argument("usc: tau must be positive or infinite");
    TrimResult trimmed = trim(g, tau);
    EigvecResult eig = leading_eigenvectors(trimmed.matrix, k);
    Embedding e;
    e.rows = std::move(eig.rows);
    e.source = SpectralMethod::Usc;
    e.tau = tau;
    e.degenerate_spectrum = eig.degenerate_spectrum;
    e.trimmed_nodes = std::move(trimmed.trimmed_nodes);
    return e;
}

inline Embedding nsc_embedding(const Graph& g, int k, const TauPolicy& policy) {
    const double tau = policy.resolve(g);
    EigvecResult eig = leading_eigenvectors(regularized_laplacian(g, tau), k);
    Embedding e;
    e.rows = std::move(eig.rows);
    e.source = SpectralMethod::Nsc;
    e.tau = tau;
    e.degenerate_spectrum = eig.degenerate_spectrum;
    return e;
}

struct SpectralDiagnostics {
    double tau = 0.0;
    int trimmed = 0;
    bool degenerate_spectrum = false;
    bool degenerate_clustering = false;
    int leftover_assigned = 0;
};

inline LabelVector cluster_embedding(const Embedding& e, int k, double mu,
                                     SpectralDiagnostics* diag = nullptr) {
    if (!(mu > 0.0)) throw std::invalid_argument("cluster_embedding: mu must be positive");
    const int n = static_cast<int>(e.rows.rows());
    GreedyConfig config{k, mu * std::sqrt(static_cast<double>(k) / static_cast<double>(n))};
    GreedyResult res = greedy_cluster(e.rows, config);
    if (diag) {
        diag->tau = e.tau;
        diag->trimmed = static_cast<int>(e.trimmed_nodes.size());
        diag->degenerate_spectrum = e.degenerate_spectrum;
        diag->degenerate_clustering = res.degenerate;
        diag->leftover_assigned = res.leftover_assigned;
    }
    return std::move(res.labels);
}

// Unnormalized spectral clustering of T_tau(A). Trimmed nodes keep their
// zero rows and fall to the leftover rule of the greedy step.
inline LabelVector usc(const Graph& g, int k, const TauPolicy& policy, double mu = 0.5,
                       SpectralDiagnostics* diag = nullptr) {
    return cluster_embedding(usc_embedding(g, k, policy), k, mu, diag);
}

// Normalized spectral clustering of L(A_tau).
inline LabelVector nsc(const Graph& g, int k, const TauPolicy& policy, double mu = 0.5,
                       SpectralDiagnostics* diag = nullptr) {
    return cluster_embedding(nsc_embedding(g, k, policy), k, mu, diag);
}

}  // namespace sbm
