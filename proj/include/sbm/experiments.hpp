#pragma once

#include "sbm/graph.hpp"
#include "sbm/io.hpp"
#include "sbm/metrics.hpp"
#include "sbm/model.hpp"
#include "sbm/parallel.hpp"
#include "sbm/refine.hpp"
#include "sbm/spectral.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sbm {

enum class Preset { Balanced, Imbalanced, Sparse, Polblogs, Custom };

inline std::string preset_name(Preset p) {
    switch (p) {
        case Preset::Balanced: return "balanced";
        case Preset::Imbalanced: return "imbalanced";
        case Preset::Sparse: return "sparse";
        case Preset::Polblogs: return "polblogs";
        case Preset::Custom: return "custom";
    }
    return "unknown";
}

struct InitializerChoice {
    std::string name;
    SpectralMethod method = SpectralMethod::Usc;
    TauPolicy tau;
};

// The four spectral initializers the simulation and real-data studies
// compare: plain USC, trimmed USC at twice the average degree, plain NSC
// and NSC regularized at the average degree.
inline std::vector<InitializerChoice> default_initializers() {
    return {
        {"usc(inf)", SpectralMethod::Usc, TauPolicy::infinite()},
        {"usc(2dbar)", SpectralMethod::Usc, TauPolicy::average_degree_multiple(2.0)},
        {"nsc(0)", SpectralMethod::Nsc, TauPolicy::zero()},
        {"nsc(dbar)", SpectralMethod::Nsc, TauPolicy::average_degree_multiple(1.0)},
    };
}

struct ExperimentSpec {
    Preset preset = Preset::Custom;
    GeneralSbmParams model;
    int replications = 20;
    std::uint64_t seed_base = 1;
    double mu = 0.5;
    PenaltyOptions penalty;
    std::vector<InitializerChoice> initializers = default_initializers();
    bool run_simplified = true;
    bool run_full = false;  // leave-one-out refinement; cost scales with n
    bool run_iterated = false;
    int max_iterations = 30;
    int jobs = 1;
    std::string dataset_edges;   // polblogs input files
    std::string dataset_labels;

    void validate() const {
        if (replications < 1)
            throw std::invalid_argument("experiment: replications must be >= 1");
        if (initializers.empty())
            throw std::invalid_argument("experiment: need at least one initializer");
        if (preset != Preset::Polblogs) model.validate();
    }
};

inline std::string dataset_directory() {
    const char* env = std::getenv("SBM_DATA_DIR");
    return env ? std::string(env) : std::string("data");
}

inline ExperimentSpec make_preset(Preset preset) {
    ExperimentSpec spec;
    spec.preset = preset;
    switch (preset) {
        case Preset::Balanced: {
            // 2500 nodes, 10 communities of 250; within 0.48, between 0.32.
            Eigen::MatrixXd b = Eigen::MatrixXd::Constant(10, 10, 0.32);
            b.diagonal().setConstant(0.48);
            spec.model.connectivity = ConnectivityMatrix(10, std::move(b));
            spec.model.sizes.assign(10, 250);
            break;
        }
        case Preset::Imbalanced: {
            // 2000 nodes, 4 communities of 200/400/600/800.
            Eigen::MatrixXd b(4, 4);
            b << 0.50, 0.29, 0.35, 0.25,
                 0.29, 0.45, 0.25, 0.30,
                 0.35, 0.25, 0.50, 0.35,
                 0.25, 0.30, 0.35, 0.45;
            spec.model.connectivity = ConnectivityMatrix(4, std::move(b));
            spec.model.sizes = {200, 400, 600, 800};
            break;
        }
        case Preset::Sparse: {
            // 4000 nodes, 10 communities of 400; within 0.032, between
            // 0.005 (average degree around 30).
            Eigen::MatrixXd b = Eigen::MatrixXd::Constant(10, 10, 0.005);
            b.diagonal().setConstant(0.032);
            spec.model.connectivity = ConnectivityMatrix(10, std::move(b));
            spec.model.sizes.assign(10, 400);
            break;
        }
        case Preset::Polblogs: {
            spec.dataset_edges = dataset_directory() + "/polblogs_edges.txt";
            spec.dataset_labels = dataset_directory() + "/polblogs_labels.csv";
            spec.run_iterated = true;
            spec.replications = 1;
            break;
        }
        case Preset::Custom: break;
    }
    return spec;
}

struct ResultRow {
    int replication = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::int64_t misclassified = 0;
    double loss = 0.0;
    double seconds = 0.0;  // wall clock; kept out of the CSV payload

    bool operator==(const ResultRow& other) const {
        return replication == other.replication && seed == other.seed &&
               method == other.method && misclassified == other.misclassified &&
               loss == other.loss && seconds == other.seconds;
    }
};

struct ExperimentReport {
    std::string schema = "sbm-report-v1";
    std::string preset;
    int n = 0;
    int k = 0;
    int replications = 0;
    std::uint64_t seed_base = 0;
    std::vector<ResultRow> rows;
    std::map<std::string, std::vector<int>> trajectories;  // iterated refinement
    std::vector<std::string> warnings;
    int fallback_votes = 0;  // votes that ran with the zero-penalty fallback

    bool operator==(const ExperimentReport& other) const {
        return schema == other.schema && preset == other.preset && n == other.n &&
               k == other.k && replications == other.replications &&
               seed_base == other.seed_base && rows == other.rows &&
               trajectories == other.trajectories && warnings == other.warnings &&
               fallback_votes == other.fallback_votes;
    }
};

inline std::vector<std::string> report_methods(const ExperimentReport& report) {
    std::vector<std::string> methods;
    for (const auto& row : report.rows)
        if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
            methods.push_back(row.method);
    return methods;
}

inline std::vector<std::int64_t> method_counts(const ExperimentReport& report,
                                               const std::string& method) {
    std::vector<std::int64_t> counts;
    for (const auto& row : report.rows)
        if (row.method == method) counts.push_back(row.misclassified);
    return counts;
}

inline double median_of(std::vector<std::int64_t> values) {
    if (values.empty()) throw std::invalid_argument("median_of: empty sample");
    std::sort(values.begin(), values.end());
    const size_t m = values.size();
    return m % 2 ? static_cast<double>(values[m / 2])
                 : 0.5 * static_cast<double>(values[m / 2 - 1] + values[m / 2]);
}

inline double quantile_of(std::vector<std::int64_t> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile_of: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return (1.0 - frac) * static_cast<double>(values[lo]) +
           frac * static_cast<double>(values[hi]);
}

struct MethodSummary {
    std::string method;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    std::int64_t min = 0;
    std::int64_t max = 0;
};

inline std::vector<MethodSummary> summarize(const ExperimentReport& report) {
    std::vector<MethodSummary> out;
    for (const auto& method : report_methods(report)) {
        auto counts = method_counts(report, method);
        MethodSummary s;
        s.method = method;
        s.q25 = quantile_of(counts, 0.25);
        s.median = median_of(counts);
        s.q75 = quantile_of(counts, 0.75);
        s.min = *std::min_element(counts.begin(), counts.end());
        s.max = *std::max_element(counts.begin(), counts.end());
        out.push_back(std::move(s));
    }
    return out;
}

namespace detail {

class StopWatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct ReplicationOutput {
    std::vector<ResultRow> rows;
    int fallback_votes = 0;
};

inline ReplicationOutput run_simulated_replication(const ExperimentSpec& spec, int replication) {
    const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(replication);
    auto [graph, truth] = sample_general_sbm(spec.model, seed);
    const int k = spec.model.k();

    ReplicationOutput out;
    auto push = [&](const std::string& method, const LabelVector& labels, double seconds) {
        ResultRow row;
        row.replication = replication;
        row.seed = seed;
        row.method = method;
        row.misclassified = misclassified_count(truth, labels);
        row.loss = loss(truth, labels);
        row.seconds = seconds;
        out.rows.push_back(std::move(row));
    };

    for (const auto& init : spec.initializers) {
        StopWatch watch;
        const LabelVector init_labels =
            init.method == SpectralMethod::Usc ? usc(graph, k, init.tau, spec.mu)
                                               : nsc(graph, k, init.tau, spec.mu);
        push(init.name, init_labels, watch.lap());
        if (spec.run_simplified) {
            RefineStepInfo info;
            const LabelVector refined =
                refine_simplified(graph, k, init_labels, spec.penalty, &info);
            if (info.fallback) ++out.fallback_votes;
            push(init.name + "+simplified", refined, watch.lap());
        }
        if (spec.run_full) {
            RefineOptions options;
            options.penalty = spec.penalty;
            options.init = {init.method == SpectralMethod::Usc ? InitializerSpec::Kind::Usc
                                                               : InitializerSpec::Kind::Nsc,
                            init.tau, spec.mu, {}};
            auto [refined, diag] = refine_full(graph, k, options);
            out.fallback_votes += diag.fallback_count;
            push(init.name + "+full", refined, watch.lap());
        }
        if (spec.run_iterated) {
            auto [refined, trace] =
                iterate_refinement(graph, k, init_labels, spec.penalty, spec.max_iterations);
            (void)trace;
            push(init.name + "+iterated", refined, watch.lap());
        }
    }
    return out;
}

}  // namespace detail

// Simulation harness: sample, initialize, refine, score — one row per
// (replication, method). Replication r uses seed seed_base + r, so the
// report is independent of scheduling.
inline ExperimentReport run_preset(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.preset == Preset::Polblogs)
        throw std::invalid_argument("run_preset: use run_polblogs for the dataset pipeline");

    ExperimentReport report;
    report.preset = preset_name(spec.preset);
    report.n = spec.model.n();
    report.k = spec.model.k();
    report.replications = spec.replications;
    report.seed_base = spec.seed_base;

    std::vector<detail::ReplicationOutput> slots(static_cast<size_t>(spec.replications));
    parallel_for(0, spec.replications, spec.jobs,
                 [&](int r) { slots[static_cast<size_t>(r)] = detail::run_simulated_replication(spec, r); });
    for (auto& slot : slots) {
        report.fallback_votes += slot.fallback_votes;
        for (auto& row : slot.rows) report.rows.push_back(std::move(row));
    }
    return report;
}

// Real-data pipeline: symmetrize the edge list, restrict to the largest
// connected component, then run every initializer directly, with
// single-shot refinement, and iterated to convergence.
inline ExperimentReport run_polblogs(const std::string& edges_path,
                                     const std::string& labels_path,
                                     const ExperimentSpec& spec) {
    Graph raw = load_graph(edges_path);
    LabelVector raw_labels = load_labels(labels_path, 2);
    if (raw_labels.size() < raw.node_count())
        throw std::runtime_error("polblogs: label file shorter than the node range");

    const SubgraphResult lcc = largest_connected_component(raw);
    const Graph& graph = lcc.graph;
    LabelVector truth;
    truth.k = 2;
    truth.values.assign(static_cast<size_t>(graph.node_count()), 0);
    for (int old = 0; old < raw.node_count(); ++old)
        if (lcc.old_to_new[static_cast<size_t>(old)] >= 0)
            truth[lcc.old_to_new[static_cast<size_t>(old)]] = raw_labels[old];
    truth.validate();

    ExperimentReport report;
    report.preset = preset_name(Preset::Polblogs);
    report.n = graph.node_count();
    report.k = 2;
    report.replications = 1;
    report.seed_base = spec.seed_base;
    if (graph.node_count() != 1222) {
        std::ostringstream os;
        os << "largest connected component has " << graph.node_count()
           << " nodes (canonical file has 1222); results are not comparable";
        report.warnings.push_back(os.str());
    }

    auto push = [&](const std::string& method, const LabelVector& labels, double seconds) {
        ResultRow row;
        row.replication = 0;
        row.seed = spec.seed_base;
        row.method = method;
        row.misclassified = misclassified_count(truth, labels);
        row.loss = loss(truth, labels);
        row.seconds = seconds;
        report.rows.push_back(std::move(row));
    };

    const int k = 2;
    for (const auto& init : spec.initializers) {
        detail::StopWatch watch;
        SpectralDiagnostics sd;
        const LabelVector init_labels =
            init.method == SpectralMethod::Usc ? usc(graph, k, init.tau, spec.mu, &sd)
                                               : nsc(graph, k, init.tau, spec.mu, &sd);
        if (sd.trimmed > 0) {
            std::ostringstream os;
            os << init.name << ": trimmed " << sd.trimmed << " high-degree nodes";
            report.warnings.push_back(os.str());
        }
        push(init.name, init_labels, watch.lap());
        if (spec.run_simplified) {
            RefineStepInfo info;
            const LabelVector refined =
                refine_simplified(graph, k, init_labels, spec.penalty, &info);
            if (info.fallback) ++report.fallback_votes;
            push(init.name + "+simplified", refined, watch.lap());
        }
        if (spec.run_full) {
            RefineOptions options;
            options.penalty = spec.penalty;
            options.init = {init.method == SpectralMethod::Usc ? InitializerSpec::Kind::Usc
                                                               : InitializerSpec::Kind::Nsc,
                            init.tau, spec.mu, {}};
            options.jobs = spec.jobs;
            auto [refined, diag] = refine_full(graph, k, options);
            report.fallback_votes += diag.fallback_count;
            push(init.name + "+full", refined, watch.lap());
        }
        if (spec.run_iterated) {
            auto [refined, trace] =
                iterate_refinement(graph, k, init_labels, spec.penalty, spec.max_iterations);
            push(init.name + "+iterated", refined, watch.lap());
            std::vector<int> errors;  // misclassification after each application
            LabelVector current = init_labels;
            errors.push_back(static_cast<int>(misclassified_count(truth, current)));
            for (size_t i = 0; i < trace.changes.size(); ++i) {
                current = refine_simplified(graph, k, current, spec.penalty);
                errors.push_back(static_cast<int>(misclassified_count(truth, current)));
            }
            report.trajectories[init.name] = std::move(errors);
        }
    }
    return report;
}

inline std::string format_float(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g", value);
    return buffer;
}

// Deterministic CSV payload: stable column order, floats at six
// significant digits, no wall-clock columns.
inline void write_report_csv(const ExperimentReport& report, std::ostream& out) {
    out << "# " << report.schema << "\n";
    out << "preset,n,k,replication,seed,method,misclassified,loss\n";
    for (const auto& row : report.rows) {
        out << report.preset << "," << report.n << "," << report.k << ","
            << row.replication << "," << row.seed << "," << row.method << ","
            << row.misclassified << "," << format_float(row.loss) << "\n";
    }
}

inline std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream os;
    write_report_csv(report, os);
    return os.str();
}

inline nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"replication", row.replication},
                        {"seed", row.seed},
                        {"method", row.method},
                        {"misclassified", row.misclassified},
                        {"loss", row.loss},
                        {"seconds", row.seconds}});
    }
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& s : summarize(report)) {
        summary.push_back({{"method", s.method},
                           {"q25", s.q25},
                           {"median", s.median},
                           {"q75", s.q75},
                           {"min", s.min},
                           {"max", s.max}});
    }
    return nlohmann::json{{"schema", report.schema},
                          {"preset", report.preset},
                          {"n", report.n},
                          {"k", report.k},
                          {"replications", report.replications},
                          {"seed_base", report.seed_base},
                          {"rows", rows},
                          {"summary", summary},
                          {"trajectories", report.trajectories},
                          {"warnings", report.warnings},
                          {"fallback_votes", report.fallback_votes}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport report;
    report.schema = j.at("schema").get<std::string>();
    report.preset = j.at("preset").get<std::string>();
    report.n = j.at("n").get<int>();
    report.k = j.at("k").get<int>();
    report.replications = j.at("replications").get<int>();
    report.seed_base = j.at("seed_base").get<std::uint64_t>();
    for (const auto& jr : j.at("rows")) {
        ResultRow row;
        row.replication = jr.at("replication").get<int>();
        row.seed = jr.at("seed").get<std::uint64_t>();
        row.method = jr.at("method").get<std::string>();
        row.misclassified = jr.at("misclassified").get<std::int64_t>();
        row.loss = jr.at("loss").get<double>();
        row.seconds = jr.at("seconds").get<double>();
        report.rows.push_back(std::move(row));
    }
    report.trajectories =
        j.at("trajectories").get<std::map<std::string, std::vector<int>>>();
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    report.fallback_votes = j.at("fallback_votes").get<int>();
    return report;
}

enum class ReportFormat { Csv, Json };

inline void emit_report(const ExperimentReport& report, ReportFormat format,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    if (format == ReportFormat::Csv) {
        write_report_csv(report, out);
    } else {
        out << report_to_json(report).dump(2) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Overrides any preset field from a flat key-value config.
inline void apply_config_overrides(ExperimentSpec& spec, const KeyValueConfig& config) {
    if (config.has("replications"))
        spec.replications = static_cast<int>(config.number("replications"));
    if (config.has("seed")) spec.seed_base = static_cast<std::uint64_t>(config.number("seed"));
    if (config.has("mu")) spec.mu = config.number("mu");
    if (config.has("jobs")) spec.jobs = static_cast<int>(config.number("jobs"));
    if (config.has("max_iters"))
        spec.max_iterations = static_cast<int>(config.number("max_iters"));
    if (config.has("simplified")) spec.run_simplified = config.number("simplified") != 0;
    if (config.has("full")) spec.run_full = config.number("full") != 0;
    if (config.has("iterated")) spec.run_iterated = config.number("iterated") != 0;
    if (config.has("epsilon0")) {
        spec.penalty.epsilon0 = config.number("epsilon0");
        spec.penalty.mode = PenaltyMode::Truncated;
    }
    if (config.has("penalty")) {
        const std::string mode = config.values("penalty").front();
        if (mode == "adaptive") spec.penalty.mode = PenaltyMode::Adaptive;
        else if (mode == "truncated") spec.penalty.mode = PenaltyMode::Truncated;
        else if (mode == "known") spec.penalty.mode = PenaltyMode::Known;
        else throw std::runtime_error("config: unknown penalty mode '" + mode + "'");
    }
    if (config.has("known_a")) spec.penalty.known_a = config.number("known_a");
    if (config.has("known_b")) spec.penalty.known_b = config.number("known_b");
    if (config.has("edges")) spec.dataset_edges = config.values("edges").front();
    if (config.has("labels")) spec.dataset_labels = config.values("labels").front();

    const bool model_touched = config.has("n") || config.has("k") || config.has("a") ||
                               config.has("b") || config.has("sizes") || config.has("B") ||
                               config.has("beta");
    if (!model_touched) return;
    const int n = static_cast<int>(config.number_or("n", spec.model.n()));
    const int k = static_cast<int>(config.number_or("k", spec.model.k()));
    std::vector<int> sizes;
    if (config.has("sizes")) {
        for (double s : config.numbers("sizes")) sizes.push_back(static_cast<int>(s));
    } else if (k == spec.model.k() && n == spec.model.n() && !spec.model.sizes.empty()) {
        sizes = spec.model.sizes;
    } else {
        sizes = most_equal_sizes(n, k);
    }
    if (static_cast<int>(sizes.size()) != k)
        throw std::runtime_error("config: sizes length does not match k");
    Eigen::MatrixXd b_matrix;
    if (config.has("B")) {
        const auto flat = config.numbers("B");
        if (static_cast<int>(flat.size()) != k * k)
            throw std::runtime_error("config: B wants k*k numbers");
        b_matrix.resize(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                b_matrix(i, j) = flat[static_cast<size_t>(i) * static_cast<size_t>(k) +
                                      static_cast<size_t>(j)];
    } else if (config.has("a") || config.has("b")) {
        const double a = config.number("a");
        const double b = config.number("b");
        const int total = [&sizes] {
            int t = 0;
            for (int s : sizes) t += s;
            return t;
        }();
        b_matrix = Eigen::MatrixXd::Constant(k, k, b / total);
        b_matrix.diagonal().setConstant(a / total);
    } else if (spec.model.k() == k) {
        b_matrix = spec.model.connectivity.probs;
    } else {
        throw std::runtime_error("config: new k needs B or (a, b)");
    }
    spec.model.connectivity = ConnectivityMatrix(k, std::move(b_matrix));
    spec.model.sizes = std::move(sizes);

    // an explicit beta bounds the community sizes by the usual window
    if (config.has("beta")) {
        const double beta = config.number("beta");
        const double total = spec.model.n();
        const double lo = total / (beta * k) - 1.0;
        const double hi = beta * total / k + 1.0;
        for (size_t i = 0; i < spec.model.sizes.size(); ++i) {
            const double s = spec.model.sizes[i];
            if (s < lo || s > hi) {
                std::ostringstream os;
                os << "config: community " << i + 1 << " size " << s
                   << " outside the beta=" << beta << " window [" << lo << "," << hi << "]";
                throw std::runtime_error(os.str());
            }
        }
    }
}

}  // namespace sbm
