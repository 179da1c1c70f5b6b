// Command-line front end: graph generation, spectral clustering,
// penalized-vote refinement, evaluation, and the experiment harness.

#include "sbm/experiments.hpp"
#include "sbm/greedy.hpp"
#include "sbm/io.hpp"
#include "sbm/metrics.hpp"
#include "sbm/model.hpp"
#include "sbm/refine.hpp"
#include "sbm/spectral.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

// --tau accepts "inf", "0", a plain number, "<c>dbar" (multiple of the
// average degree) or "<c>a" (multiple of a known within-rate numerator,
// supplied via --a).
sbm::TauPolicy parse_tau(const std::string& text, std::optional<double> known_a) {
    if (text == "inf" || text == "infinity") return sbm::TauPolicy::infinite();
    if (const auto pos = text.find("dbar"); pos != std::string::npos) {
        const std::string prefix = text.substr(0, pos);
        return sbm::TauPolicy::average_degree_multiple(prefix.empty() ? 1.0 : std::stod(prefix));
    }
    if (!text.empty() && text.back() == 'a' && text.find_first_not_of("0123456789.") == text.size() - 1) {
        if (!known_a)
            throw CLI::ValidationError("--tau", "multiple-of-a policy needs --a");
        const std::string prefix = text.substr(0, text.size() - 1);
        return sbm::TauPolicy::known_a_multiple(prefix.empty() ? 1.0 : std::stod(prefix),
                                                *known_a);
    }
    const double value = std::stod(text);
    if (value == 0.0) return sbm::TauPolicy::zero();
    return sbm::TauPolicy::fixed(value);
}

sbm::PenaltyOptions make_penalty(const std::string& mode, double epsilon0,
                                 std::optional<double> a, std::optional<double> b) {
    sbm::PenaltyOptions penalty;
    if (mode == "adaptive") {
        penalty.mode = sbm::PenaltyMode::Adaptive;
    } else if (mode == "truncated") {
        penalty.mode = sbm::PenaltyMode::Truncated;
        penalty.epsilon0 = epsilon0;
    } else if (mode == "known") {
        if (!a || !b) throw CLI::ValidationError("--penalty", "known mode needs --a and --b");
        penalty.mode = sbm::PenaltyMode::Known;
        penalty.known_a = *a;
        penalty.known_b = *b;
    } else {
        throw CLI::ValidationError("--penalty", "unknown mode '" + mode + "'");
    }
    return penalty;
}

int run_generate(const std::string& config_path, const std::string& preset_name,
                 std::uint64_t seed, const std::string& edges_out,
                 const std::string& labels_out) {
    sbm::ExperimentSpec spec;
    if (preset_name == "balanced") spec = sbm::make_preset(sbm::Preset::Balanced);
    else if (preset_name == "imbalanced") spec = sbm::make_preset(sbm::Preset::Imbalanced);
    else if (preset_name == "sparse") spec = sbm::make_preset(sbm::Preset::Sparse);
    else if (!preset_name.empty())
        throw CLI::ValidationError("--preset", "unknown preset '" + preset_name + "'");
    if (!config_path.empty())
        sbm::apply_config_overrides(spec, sbm::KeyValueConfig::parse_file(config_path));
    if (spec.model.sizes.empty())
        throw CLI::ValidationError("generate",
                                   "no model given: pass --preset or a --config with n/k/a/b");
    spec.model.validate();
    auto [graph, labels] = sbm::sample_general_sbm(spec.model, seed);
    sbm::save_edge_list(graph, edges_out);
    sbm::save_labels_csv(labels, labels_out);
    std::cout << "n=" << graph.node_count() << " edges=" << graph.edge_count()
              << " k=" << labels.k << " seed=" << seed << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage community detection for stochastic block models"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------
    std::string gen_config, gen_preset;
    std::uint64_t gen_seed = 1;
    std::string gen_edges = "edges.txt", gen_labels = "labels.csv";
    auto* generate = app.add_subcommand("generate", "Sample a block-model graph");
    generate->add_option("--config", gen_config, "Key-value parameter file");
    generate->add_option("--preset", gen_preset, "balanced | imbalanced | sparse");
    generate->add_option("--seed", gen_seed, "RNG seed");
    generate->add_option("--edges-out", gen_edges, "Edge list output path");
    generate->add_option("--labels-out", gen_labels, "Label CSV output path");

    // ---- cluster -----------------------------------------------------
    std::string cl_graph, cl_init = "usc", cl_tau, cl_out, cl_embedding_out;
    int cl_k = 2;
    double cl_mu = 0.5;
    bool cl_one_based = false;
    std::optional<double> cl_a;
    auto* cluster = app.add_subcommand("cluster", "Spectral initializer on a graph file");
    cluster->add_option("--graph", cl_graph, "Edge list path")->required();
    cluster->add_option("--k", cl_k, "Number of communities")->required();
    cluster->add_option("--init", cl_init, "usc | nsc");
    cluster->add_option("--tau", cl_tau, "inf | 0 | <value> | <c>dbar | <c>a");
    cluster->add_option("--mu", cl_mu, "Critical radius constant");
    cluster->add_flag("--one-based", cl_one_based, "Edge list uses 1-based node indices");
    cluster->add_option("--a", cl_a, "Known within-rate numerator (for --tau <c>a)");
    cluster->add_option("--labels-out", cl_out, "Label CSV output (default stdout)");
    cluster->add_option("--embedding-out", cl_embedding_out, "Embedding CSV (debug)");

    // ---- cluster-embedding -------------------------------------------
    std::string ce_path;
    int ce_k = 2;
    double ce_r = 0.0, ce_mu = 0.5;
    std::string ce_out;
    auto* cluster_embedding =
        app.add_subcommand("cluster-embedding", "Greedy radius-ball clustering of embedding rows");
    cluster_embedding->add_option("--embedding", ce_path, "Embedding CSV")->required();
    cluster_embedding->add_option("--k", ce_k, "Number of communities")->required();
    cluster_embedding->add_option("--r", ce_r, "Critical radius (0: use mu sqrt(k/n))");
    cluster_embedding->add_option("--mu", ce_mu, "Radius constant when --r is omitted");
    cluster_embedding->add_option("--labels-out", ce_out, "Label CSV output (default stdout)");

    // ---- refine --------------------------------------------------------
    std::string rf_graph, rf_algorithm = "auto", rf_init = "usc", rf_tau;
    std::string rf_init_labels, rf_labels_out, rf_diag_out;
    std::string rf_penalty = "adaptive";
    int rf_k = 2, rf_max_iters = 20, rf_jobs = 1;
    double rf_mu = 0.5, rf_epsilon0 = 0.1;
    bool rf_one_based = false;
    std::optional<double> rf_a, rf_b;
    std::uint64_t rf_seed = 1;
    auto* refine = app.add_subcommand("refine", "Penalized neighbor-voting refinement");
    refine->add_option("--graph", rf_graph, "Edge list path")->required();
    refine->add_option("--k", rf_k, "Number of communities")->required();
    refine->add_option("--algorithm", rf_algorithm,
                       "full | simplified | iterated | auto (full up to 1000 nodes)");
    refine->add_option("--init", rf_init, "usc | nsc | file");
    refine->add_option("--init-labels", rf_init_labels, "Label file for --init file");
    refine->add_option("--tau", rf_tau, "Initializer regularization policy");
    refine->add_option("--mu", rf_mu, "Critical radius constant");
    refine->add_flag("--one-based", rf_one_based, "Edge list uses 1-based node indices");
    refine->add_option("--penalty", rf_penalty, "adaptive | truncated | known");
    refine->add_option("--epsilon0", rf_epsilon0, "Truncation constant");
    refine->add_option("--a", rf_a, "Known within-rate numerator");
    refine->add_option("--b", rf_b, "Known between-rate numerator");
    refine->add_option("--max-iters", rf_max_iters, "Iterated refinement cap");
    refine->add_option("--jobs", rf_jobs, "Worker threads for the leave-one-out loop");
    refine->add_option("--seed", rf_seed, "Recorded in diagnostics");
    refine->add_option("--labels-out", rf_labels_out, "Label CSV output (default stdout)");
    refine->add_option("--diagnostics-out", rf_diag_out, "JSON diagnostics path");

    // ---- evaluate ------------------------------------------------------
    std::string ev_truth, ev_estimate;
    int ev_k = -1;
    auto* evaluate = app.add_subcommand("evaluate", "Misclassification against ground truth");
    evaluate->add_option("--truth", ev_truth, "Truth label file")->required();
    evaluate->add_option("--estimate", ev_estimate, "Estimated label file")->required();
    evaluate->add_option("--k", ev_k, "Label range (default: inferred)");

    // ---- experiment ----------------------------------------------------
    std::string ex_preset, ex_config, ex_output = ".";
    int ex_replications = -1, ex_jobs = 1;
    std::uint64_t ex_seed = 1;
    bool ex_full = false;
    auto* experiment = app.add_subcommand("experiment", "Reproduction harness");
    experiment->add_option("--preset", ex_preset, "balanced | imbalanced | sparse | polblogs")
        ->required();
    experiment->add_option("--config", ex_config, "Key-value overrides");
    experiment->add_option("--replications", ex_replications, "Replication count");
    experiment->add_option("--seed", ex_seed, "Seed base (replication r uses seed+r)");
    experiment->add_option("--jobs", ex_jobs, "Parallel replications");
    experiment->add_flag("--full", ex_full, "Also run leave-one-out refinement");
    experiment->add_option("--output", ex_output, "Directory for report CSV/JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed())
            return run_generate(gen_config, gen_preset, gen_seed, gen_edges, gen_labels);

        if (cluster->parsed()) {
            const sbm::Graph g = sbm::load_graph(cl_graph, -1, {.one_based = cl_one_based});
            sbm::TauPolicy tau = cl_init == "nsc" ? sbm::TauPolicy::average_degree_multiple(1.0)
                                                  : sbm::TauPolicy::average_degree_multiple(2.0);
            if (!cl_tau.empty()) tau = parse_tau(cl_tau, cl_a);
            const sbm::Embedding embedding = cl_init == "nsc"
                                                 ? sbm::nsc_embedding(g, cl_k, tau)
                                                 : sbm::usc_embedding(g, cl_k, tau);
            if (!cl_embedding_out.empty()) sbm::save_embedding_csv(embedding.rows, cl_embedding_out);
            const sbm::LabelVector labels = sbm::cluster_embedding(embedding, cl_k, cl_mu);
            if (cl_out.empty()) {
                for (int u = 0; u < labels.size(); ++u) std::cout << labels[u] << "\n";
            } else {
                sbm::save_labels_csv(labels, cl_out);
            }
            return 0;
        }

        if (cluster_embedding->parsed()) {
            const Eigen::MatrixXd rows = sbm::load_embedding_csv(ce_path);
            const double radius =
                ce_r > 0.0 ? ce_r
                           : ce_mu * std::sqrt(static_cast<double>(ce_k) /
                                               static_cast<double>(rows.rows()));
            const sbm::GreedyResult result = sbm::greedy_cluster(rows, {ce_k, radius});
            if (ce_out.empty()) {
                for (int u = 0; u < result.labels.size(); ++u) std::cout << result.labels[u] << "\n";
            } else {
                sbm::save_labels_csv(result.labels, ce_out);
            }
            if (result.degenerate)
                std::cerr << "warning: degenerate clustering (" << result.empty_communities
                          << " empty communities)\n";
            return 0;
        }

        if (refine->parsed()) {
            const sbm::Graph g = sbm::load_graph(rf_graph, -1, {.one_based = rf_one_based});
            const sbm::PenaltyOptions penalty = make_penalty(rf_penalty, rf_epsilon0, rf_a, rf_b);
            // the leave-one-out scheme costs a factor of n; default to it
            // only at small scale
            if (rf_algorithm == "auto")
                rf_algorithm = g.node_count() <= 1000 ? "full" : "simplified";

            sbm::InitializerSpec init;
            if (rf_init == "usc") init = sbm::InitializerSpec::usc_default();
            else if (rf_init == "nsc") init = sbm::InitializerSpec::nsc_default();
            else if (rf_init == "file") {
                if (rf_init_labels.empty())
                    throw CLI::ValidationError("--init", "file mode needs --init-labels");
                init = sbm::InitializerSpec::fixed(sbm::load_labels(rf_init_labels, rf_k));
            } else {
                throw CLI::ValidationError("--init", "unknown initializer '" + rf_init + "'");
            }
            if (!rf_tau.empty()) init.tau = parse_tau(rf_tau, rf_a);
            init.mu = rf_mu;

            json diagnostics;
            diagnostics["seed"] = rf_seed;
            diagnostics["algorithm"] = rf_algorithm;
            sbm::LabelVector labels;
            if (rf_algorithm == "full") {
                sbm::RefineOptions options{penalty, init, rf_jobs};
                auto [refined, diag] = sbm::refine_full(g, rf_k, options);
                labels = std::move(refined);
                diagnostics["fallback_votes"] = diag.fallback_count;
                diagnostics["non_permutation_consensus"] = diag.non_permutation_consensus;
                diagnostics["seconds"] = diag.seconds;
                diagnostics["t"] = diag.t_values;
                diagnostics["rho"] = diag.rho_values;
            } else if (rf_algorithm == "simplified" || rf_algorithm == "iterated") {
                const sbm::LabelVector start = init.run(g, rf_k);
                if (rf_algorithm == "simplified") {
                    sbm::RefineStepInfo info;
                    labels = sbm::refine_simplified(g, rf_k, start, penalty, &info);
                    diagnostics["a_hat"] = info.a_hat;
                    diagnostics["b_hat"] = info.b_hat;
                    diagnostics["t"] = info.t;
                    diagnostics["rho"] = info.rho;
                    diagnostics["fallback"] = info.fallback;
                } else {
                    auto [refined, trace] =
                        sbm::iterate_refinement(g, rf_k, start, penalty, rf_max_iters);
                    labels = std::move(refined);
                    diagnostics["changes_per_iteration"] = trace.changes;
                    diagnostics["converged"] = trace.converged;
                    diagnostics["cycle_detected"] = trace.cycle_detected;
                }
            } else {
                throw CLI::ValidationError("--algorithm",
                                           "unknown algorithm '" + rf_algorithm + "'");
            }

            if (rf_labels_out.empty()) {
                for (int u = 0; u < labels.size(); ++u) std::cout << labels[u] << "\n";
            } else {
                sbm::save_labels_csv(labels, rf_labels_out);
            }
            if (!rf_diag_out.empty()) {
                std::ofstream out(rf_diag_out);
                if (!out) throw std::runtime_error("cannot write diagnostics: " + rf_diag_out);
                out << diagnostics.dump(2) << "\n";
            }
            return 0;
        }

        if (evaluate->parsed()) {
            sbm::LabelVector truth = sbm::load_labels(ev_truth, ev_k);
            sbm::LabelVector estimate = sbm::load_labels(ev_estimate, ev_k);
            const int k = std::max(truth.k, estimate.k);
            truth.k = k;
            estimate.k = k;
            json out;
            out["loss"] = sbm::loss(truth, estimate);
            out["misclassified"] = sbm::misclassified_count(truth, estimate);
            out["permutation"] = sbm::best_permutation(truth, estimate);
            std::cout << out.dump(2) << "\n";
            return 0;
        }

        if (experiment->parsed()) {
            sbm::Preset preset;
            if (ex_preset == "balanced") preset = sbm::Preset::Balanced;
            else if (ex_preset == "imbalanced") preset = sbm::Preset::Imbalanced;
            else if (ex_preset == "sparse") preset = sbm::Preset::Sparse;
            else if (ex_preset == "polblogs") preset = sbm::Preset::Polblogs;
            else throw CLI::ValidationError("--preset", "unknown preset '" + ex_preset + "'");

            sbm::ExperimentSpec spec = sbm::make_preset(preset);
            spec.seed_base = ex_seed;
            spec.jobs = ex_jobs;
            if (ex_replications > 0) spec.replications = ex_replications;
            if (ex_full) spec.run_full = true;
            if (!ex_config.empty())
                sbm::apply_config_overrides(spec, sbm::KeyValueConfig::parse_file(ex_config));

            const sbm::ExperimentReport report =
                preset == sbm::Preset::Polblogs
                    ? sbm::run_polblogs(spec.dataset_edges, spec.dataset_labels, spec)
                    : sbm::run_preset(spec);

            namespace fs = std::filesystem;
            fs::create_directories(ex_output);
            const std::string stem = (fs::path(ex_output) / report.preset).string();
            sbm::emit_report(report, sbm::ReportFormat::Csv, stem + "_report.csv");
            sbm::emit_report(report, sbm::ReportFormat::Json, stem + "_report.json");

            for (const auto& warning : report.warnings)
                std::cerr << "warning: " << warning << "\n";
            std::cout << "method,q25,median,q75,min,max\n";
            for (const auto& s : sbm::summarize(report)) {
                std::cout << s.method << "," << sbm::format_float(s.q25) << ","
                          << sbm::format_float(s.median) << "," << sbm::format_float(s.q75)
                          << "," << s.min << "," << s.max << "\n";
            }
            std::cout << "reports: " << stem + "_report.csv" << " " << stem + "_report.json"
                      << "\n";
            return 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
