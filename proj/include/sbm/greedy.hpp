#pragma once

#include "sbm/graph.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sbm {

struct GreedyConfig {
    int k = 1;
    double r = 0.0;  // critical radius; ball membership is strict (< r)

    void validate() const {
        if (k < 1) throw std::invalid_argument("greedy: k must be at least 1");
        if (!(r > 0.0)) throw std::invalid_argument("greedy: radius must be positive");
    }
};

struct GreedyResult {
    LabelVector labels;
    std::vector<int> centers;      // chosen ball centers, one per extracted community
    int empty_communities = 0;     // communities never extracted (ran out of nodes)
    int leftover_assigned = 0;     // nodes routed through the mean-distance rule
    bool degenerate = false;
};

// |{v in S : ||row_v - row_u|| < r}| with strict inequality; v = u counts.
inline int count_ball(const Eigen::MatrixXd& rows, int u, const std::vector<int>& members,
                      double r) {
    const double r2 = r * r;
    int count = 0;
    for (int v : members)
        if ((rows.row(v) - rows.row(u)).squaredNorm() < r2) ++count;
    return count;
}

// Radius-ball clustering: k rounds each extract the densest remaining
// ball; leftovers go to the community with the smallest mean distance.
// All argmax/argmin ties break toward the lowest index.
inline GreedyResult greedy_cluster(const Eigen::MatrixXd& rows, const GreedyConfig& config) {
    config.validate();
    const int n = static_cast<int>(rows.rows());
    if (n < config.k)
        throw std::invalid_argument("greedy: fewer rows than communities");
    if (!rows.allFinite())
        throw std::invalid_argument("greedy: embedding rows must be finite");

    // Transposed copy: points live in contiguous columns, which keeps the
    // quadratic distance pass cache-friendly.
    const Eigen::MatrixXd points = rows.transpose();
    const double r2 = config.r * config.r;
    auto dist_sq = [&points](int u, int v) {
        return (points.col(u) - points.col(v)).squaredNorm();
    };

    GreedyResult result;
    result.labels.values.assign(static_cast<size_t>(n), 0);
    result.labels.k = config.k;

    std::vector<int> remaining(static_cast<size_t>(n));
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<std::vector<int>> communities(static_cast<size_t>(config.k));

    for (int i = 0; i < config.k; ++i) {
        if (remaining.empty()) {
            result.empty_communities = config.k - i;
            result.degenerate = true;
            break;
        }
        int center = -1;
        int best_count = -1;
        for (int u : remaining) {
            int c = 0;
            for (int v : remaining)
                if (dist_sq(u, v) < r2) ++c;
            if (c > best_count) {  // first maximizer in index order wins
                best_count = c;
                center = u;
            }
        }
        result.centers.push_back(center);
        std::vector<int>& ball = communities[static_cast<size_t>(i)];
        std::vector<int> rest;
        rest.reserve(remaining.size());
        for (int v : remaining) {
            if (dist_sq(v, center) < r2) {
                ball.push_back(v);
                result.labels[v] = i + 1;
            } else {
                rest.push_back(v);
            }
        }
        remaining.swap(rest);
    }

    // Leftover rule: argmin over nonempty communities of the mean
    // distance to the extracted ball.
    for (int u : remaining) {
        int best = -1;
        double best_mean = 0.0;
        for (int i = 0; i < config.k; ++i) {
            const auto& ball = communities[static_cast<size_t>(i)];
            if (ball.empty()) continue;
            double sum = 0.0;
            for (int v : ball) sum += std::sqrt(dist_sq(u, v));
            const double mean = sum / static_cast<double>(ball.size());
            if (best < 0 || mean < best_mean) {
                best = i;
                best_mean = mean;
            }
        }
        if (best < 0) {  // every ball empty; unreachable for n >= 1 but kept total
            result.degenerate = true;
            best = 0;
        }
        result.labels[u] = best + 1;
        ++result.leftover_assigned;
    }
    return result;
}

}  // namespace sbm
