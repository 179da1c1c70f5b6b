#pragma once

#include "sbm/graph.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sbm {

// Agreement counts between two complete label vectors over a common
// label range: counts[i][j] = |{u : truth(u) = i+1, estimate(u) = j+1}|.
struct ConfusionMatrix {
    int k = 0;
    std::vector<std::vector<std::int64_t>> counts;
    std::vector<std::int64_t> row_marginals;
    std::vector<std::int64_t> col_marginals;
    std::int64_t total = 0;

    static ConfusionMatrix build(const LabelVector& truth, const LabelVector& estimate) {
        if (truth.size() != estimate.size())
            throw std::invalid_argument("confusion: label vectors differ in length");
        truth.validate();
        estimate.validate();
        // Vectors with different declared k are compared after padding
        // the smaller label range.
        ConfusionMatrix cm;
        cm.k = std::max(truth.k, estimate.k);
        cm.counts.assign(static_cast<size_t>(cm.k),
                         std::vector<std::int64_t>(static_cast<size_t>(cm.k), 0));
        cm.row_marginals.assign(static_cast<size_t>(cm.k), 0);
        cm.col_marginals.assign(static_cast<size_t>(cm.k), 0);
        for (int u = 0; u < truth.size(); ++u) {
            const int i = truth[u] - 1;
            const int j = estimate[u] - 1;
            ++cm.counts[static_cast<size_t>(i)][static_cast<size_t>(j)];
            ++cm.row_marginals[static_cast<size_t>(i)];
            ++cm.col_marginals[static_cast<size_t>(j)];
            ++cm.total;
        }
        return cm;
    }
};

namespace detail {

// Exact max-weight assignment on a k x k integer matrix (Hungarian
// algorithm with potentials, minimizing the negated weights).
inline std::vector<int> hungarian_max_assignment(
    const std::vector<std::vector<std::int64_t>>& weight) {
    const int n = static_cast<int>(weight.size());
    const std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> u(static_cast<size_t>(n) + 1, 0), v(static_cast<size_t>(n) + 1, 0);
    std::vector<int> match(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<std::int64_t> minv(static_cast<size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<size_t>(n) + 1, false);
        do {
            used[static_cast<size_t>(j0)] = true;
            const int i0 = match[static_cast<size_t>(j0)];
            std::int64_t delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const std::int64_t cost =
                    -weight[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                    u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cost < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cost;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> perm(static_cast<size_t>(n), 0);  // perm[i] = matched column of row i
    for (int j = 1; j <= n; ++j)
        if (match[static_cast<size_t>(j)] > 0)
            perm[static_cast<size_t>(match[static_cast<size_t>(j)]) - 1] = j;
    return perm;
}

inline std::int64_t assignment_value(const std::vector<std::vector<std::int64_t>>& weight,
                                     const std::vector<int>& perm) {
    std::int64_t s = 0;
    for (size_t i = 0; i < perm.size(); ++i)
        s += weight[i][static_cast<size_t>(perm[i]) - 1];
    return s;
}

inline std::int64_t hungarian_max_value(const std::vector<std::vector<std::int64_t>>& weight) {
    if (weight.empty()) return 0;
    return assignment_value(weight, hungarian_max_assignment(weight));
}

}  // namespace detail

// Agreement maximized by exhaustive permutation search; permutations are
// visited in lexicographic order so the first optimum is the
// lexicographically smallest one. Intended for small k.
inline std::pair<std::int64_t, std::vector<int>> max_agreement_by_enumeration(
    const ConfusionMatrix& cm) {
    std::vector<int> perm(static_cast<size_t>(cm.k));
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<int> best_perm = perm;
    std::int64_t best = -1;
    do {
        std::int64_t agree = 0;
        for (int i = 0; i < cm.k; ++i)
            agree += cm.counts[static_cast<size_t>(i)][static_cast<size_t>(perm[static_cast<size_t>(i)]) - 1];
        if (agree > best) {
            best = agree;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best, best_perm};
}

// Agreement maximized by an exact assignment solve; the permutation is
// then refined to the lexicographically smallest optimum by fixing one
// image at a time and re-solving the remainder.
inline std::pair<std::int64_t, std::vector<int>> max_agreement_by_assignment(
    const ConfusionMatrix& cm) {
    const int k = cm.k;
    const std::int64_t best = detail::hungarian_max_value(cm.counts);
    std::vector<int> perm(static_cast<size_t>(k), 0);
    std::vector<char> used(static_cast<size_t>(k) + 1, false);
    std::int64_t fixed_sum = 0;
    for (int i = 0; i < k; ++i) {
        for (int j = 1; j <= k; ++j) {
            if (used[static_cast<size_t>(j)]) continue;
            // Candidate perm[i] = j; check that the remaining rows can
            // still reach the optimum.
            std::vector<std::vector<std::int64_t>> rest;
            rest.reserve(static_cast<size_t>(k - i - 1));
            for (int r = i + 1; r < k; ++r) {
                std::vector<std::int64_t> row;
                row.reserve(static_cast<size_t>(k - i - 1));
                for (int c = 1; c <= k; ++c)
                    if (!used[static_cast<size_t>(c)] && c != j)
                        row.push_back(cm.counts[static_cast<size_t>(r)][static_cast<size_t>(c) - 1]);
                rest.push_back(std::move(row));
            }
            const std::int64_t here =
                cm.counts[static_cast<size_t>(i)][static_cast<size_t>(j) - 1];
            if (fixed_sum + here + detail::hungarian_max_value(rest) == best) {
                perm[static_cast<size_t>(i)] = j;
                used[static_cast<size_t>(j)] = true;
                fixed_sum += here;
                break;
            }
        }
    }
    return {best, perm};
}

namespace detail {

inline std::pair<std::int64_t, std::vector<int>> max_agreement(const ConfusionMatrix& cm) {
    // Brute force stays exact and fast through k = 8; larger label
    // counts go through the assignment solver. Both paths are exact.
    return cm.k <= 8 ? max_agreement_by_enumeration(cm) : max_agreement_by_assignment(cm);
}

}  // namespace detail

// Misclassification proportion minimized over all relabelings of the
// community symbols.
inline double loss(const LabelVector& truth, const LabelVector& estimate) {
    const ConfusionMatrix cm = ConfusionMatrix::build(truth, estimate);
    if (cm.total == 0) throw std::invalid_argument("loss: empty label vectors");
    const auto [agree, perm] = detail::max_agreement(cm);
    (void)perm;
    return 1.0 - static_cast<double>(agree) / static_cast<double>(cm.total);
}

// Plain Hamming proportion; no relabeling.
inline double loss_unpermuted(const LabelVector& s1, const LabelVector& s2) {
    if (s1.size() != s2.size())
        throw std::invalid_argument("loss_unpermuted: label vectors differ in length");
    if (s1.size() == 0) throw std::invalid_argument("loss_unpermuted: empty label vectors");
    std::int64_t mismatches = 0;
    for (int u = 0; u < s1.size(); ++u)
        if (s1[u] != s2[u]) ++mismatches;
    return static_cast<double>(mismatches) / static_cast<double>(s1.size());
}

// A loss-minimizing permutation; lowest lexicographic among ties.
// perm[i] is the image of label i+1.
inline std::vector<int> best_permutation(const LabelVector& truth, const LabelVector& estimate) {
    const ConfusionMatrix cm = ConfusionMatrix::build(truth, estimate);
    return detail::max_agreement(cm).second;
}

inline std::int64_t misclassified_count(const LabelVector& truth, const LabelVector& estimate) {
    const ConfusionMatrix cm = ConfusionMatrix::build(truth, estimate);
    return cm.total - detail::max_agreement(cm).first;
}

inline LabelVector apply_permutation(const LabelVector& labels, const std::vector<int>& perm) {
    LabelVector out = labels;
    for (auto& x : out.values)
        if (x >= 1) x = perm[static_cast<size_t>(x) - 1];
    return out;
}

}  // namespace sbm
