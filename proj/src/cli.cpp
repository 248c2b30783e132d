#include "specmap/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "specmap/errors.hpp"
#include "specmap/json_io.hpp"
#include "specmap/model.hpp"
#include "specmap/montecarlo.hpp"
#include "specmap/spiked.hpp"
#include "specmap/support.hpp"

namespace specmap::cli {

namespace {

using nlohmann::ordered_json;

void ensure_out_dir(const RunConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw ScenarioError("cannot create output directory: " + config.out_dir);
    if (!std::filesystem::is_directory(config.out_dir)) {
        throw ScenarioError("output path is not a directory: " + config.out_dir);
    }
}

std::string out_path(const RunConfig& config, const std::string& name) {
    return (std::filesystem::path(config.out_dir) / name).string();
}

ordered_json profile_json(const SupportProfile& profile) {
    ordered_json j;
    j["Q"] = profile.cluster_count();
    j["clusters"] = ordered_json::array();
    for (const Cluster& cl : profile.clusters()) {
        ordered_json jc;
        jc["q"] = cl.index;
        jc["x_minus"] = cl.x_minus;
        jc["x_plus"] = cl.x_plus;
        jc["w_minus"] = cl.w_minus;
        jc["w_plus"] = cl.w_plus;
        jc["eigs"] = cl.eigenvalue_indices;
        jc["mass_num"] = cl.mass.num;
        jc["mass_den"] = cl.mass.den;
        j["clusters"].push_back(jc);
    }
    return j;
}

/// density that never throws on grid points that happen to land on an edge:
/// boundary samples report the outer limit 0.
double grid_density(double x, const SupportProfile& profile) {
    if (profile.classify(x) == Region::SupportBoundary) return 0.0;
    return density(x, profile);
}

struct Gap {
    double lo = 0.0;
    double hi = 0.0;
};

std::vector<Gap> support_gaps(const SupportProfile& profile) {
    std::vector<Gap> gaps;
    const auto& clusters = profile.clusters();
    for (std::size_t q = 1; q < clusters.size(); ++q) {
        gaps.push_back({clusters[q - 1].x_plus, clusters[q].x_minus});
    }
    return gaps;
}

}  // namespace

void cmd_support(const RunConfig& config) {
    ensure_out_dir(config);
    const ModelSpec spec = load_scenario(config.scenario_path);
    const SupportProfile profile = analyze_support(spec);

    ordered_json j = profile_json(profile);
    // cross-checked masses ride along for consumers that want the float view
    j["mass_quadrature"] = ordered_json::array();
    for (const Cluster& cl : profile.clusters()) {
        (void)cluster_mass_closed_form(cl.index, profile);
        j["mass_quadrature"].push_back(cluster_mass_quadrature(cl.index, profile));
    }
    write_text_file(out_path(config, "support.json"), dump_deterministic(j));

    const double span = profile.support_max() - profile.support_min();
    const double pad = 0.1 * span;
    const double lo = std::max(0.0, profile.support_min() - pad);
    const double hi = profile.support_max() + pad;
    std::string csv = "x,density\n";
    for (int i = 0; i < config.grid; ++i) {
        const double x = lo + (hi - lo) * i / (config.grid - 1);
        csv += format_double(x);
        csv += ",";
        csv += format_double(grid_density(x, profile));
        csv += "\n";
    }
    write_text_file(out_path(config, "density.csv"), csv);
}

void cmd_spiked(const RunConfig& config) {
    ensure_out_dir(config);
    const ModelSpec spec = load_scenario(config.scenario_path);
    const SpikedPrediction prediction = spiked_prediction(spec);

    ordered_json j;
    j["K_s"] = prediction.k_s;
    j["threshold"] = prediction.threshold;
    j["bulk_edge"] = prediction.bulk_edge;
    j["spikes"] = ordered_json::array();
    for (const SpikePrediction& p : prediction.spikes) {
        ordered_json js;
        js["lambda"] = p.lambda;
        js["multiplicity"] = p.multiplicity;
        js["supercritical"] = p.supercritical;
        js["limit"] = p.limit;
        if (p.at_threshold) js["warning"] = "spike at detachment threshold; classified subcritical";
        if (p.h1) js["h1"] = *p.h1;
        if (p.h2) js["h2"] = *p.h2;
        if (p.edge_minus_asym) js["edge_minus_asym"] = *p.edge_minus_asym;
        if (p.edge_plus_asym) js["edge_plus_asym"] = *p.edge_plus_asym;
        j["spikes"].push_back(js);
    }
    write_text_file(out_path(config, "spiked.json"), dump_deterministic(j));
}

void cmd_separation(const RunConfig& config) {
    ensure_out_dir(config);
    const ModelSpec spec = load_scenario(config.scenario_path);
    const SupportProfile profile = analyze_support(spec);

    const std::vector<Gap> gaps = support_gaps(profile);
    if (gaps.empty()) {
        throw VacuousRequestError("single-cluster support; separation vacuous");
    }
    // default thresholds: midpoint of the widest gap (maximal numerical margin)
    const Gap widest = *std::max_element(gaps.begin(), gaps.end(), [](const Gap& x, const Gap& y) {
        return (x.hi - x.lo) < (y.hi - y.lo);
    });
    double a = config.a.value_or(0.5 * (widest.lo + widest.hi));
    double b = config.b.value_or(a);
    if (a > b) std::swap(a, b);

    const Gap* home = nullptr;
    for (const Gap& g : gaps) {
        if (a > g.lo && b < g.hi) home = &g;
    }
    if (home == nullptr) {
        throw VacuousRequestError("requested thresholds do not lie inside a support gap");
    }

    const SeparationReport report =
        exact_separation(a, b, config.trials, spec, profile, config.seed);
    // interval check on the central half of the surrounding gap
    const double quarter = 0.25 * (home->hi - home->lo);
    const IntervalCheckReport interval = check_no_eigenvalue_in(
        home->lo + quarter, home->hi - quarter, config.trials, spec, profile, config.seed);

    if (config.dump_eigenvalues) {
        std::string csv = "trial,k,value\n";
        for (const TrialResult& tr : run_trials(spec, config.seed, config.trials)) {
            for (std::size_t k = 0; k < tr.eigenvalues.size(); ++k) {
                csv += std::to_string(tr.trial) + "," + std::to_string(k + 1) + "," +
                       format_double(tr.eigenvalues[k]) + "\n";
            }
        }
        write_text_file(out_path(config, "eigenvalues.csv"), csv);
    }

    ordered_json j;
    j["a"] = report.a;
    j["b"] = report.b;
    j["w_a"] = report.w_a;
    j["w_b"] = report.w_b;
    j["predicted_below"] = report.predicted_below;
    j["predicted_above"] = report.predicted_above;
    j["trials"] = report.trials;
    j["match_rate"] = report.match_rate;
    j["interval_check"] = {{"a", interval.a},
                           {"b", interval.b},
                           {"clear_fraction", interval.clear_fraction}};
    j["rows"] = ordered_json::array();
    for (const SeparationTrialRow& row : report.rows) {
        j["rows"].push_back({{"trial", row.trial},
                             {"below", row.below},
                             {"above", row.above},
                             {"inside_gap", row.inside_gap},
                             {"match", row.match}});
    }
    write_text_file(out_path(config, "separation.json"), dump_deterministic(j));
}

void cmd_convergence(const RunConfig& config) {
    ensure_out_dir(config);
    const ModelSpec spec = load_scenario(config.scenario_path);
    const ConvergenceTable table =
        spike_convergence(spec, config.n_grid, config.trials, config.seed);

    ordered_json j;
    j["trials"] = table.trials;
    j["rows"] = ordered_json::array();
    std::string csv = "N,M,k,mean,stddev,std_error,predicted,abs_error\n";
    for (const ConvergenceRow& row : table.rows) {
        ordered_json jr;
        jr["N"] = row.n;
        jr["M"] = row.m;
        jr["mean"] = row.mean;
        jr["stddev"] = row.stddev;
        jr["std_error"] = row.std_error;
        jr["predicted"] = row.predicted;
        jr["abs_error"] = row.abs_error;
        j["rows"].push_back(jr);
        for (std::size_t i = 0; i < row.mean.size(); ++i) {
            csv += std::to_string(row.n) + "," + std::to_string(row.m) + "," +
                   std::to_string(i + 1) + "," + format_double(row.mean[i]) + "," +
                   format_double(row.stddev[i]) + "," + format_double(row.std_error[i]) + "," +
                   format_double(row.predicted[i]) + "," + format_double(row.abs_error[i]) + "\n";
        }
    }
    write_text_file(out_path(config, "convergence.json"), dump_deterministic(j));
    write_text_file(out_path(config, "convergence.csv"), csv);
}

void cmd_perturb_check(const RunConfig& config) {
    ensure_out_dir(config);
    const ModelSpec spec = load_scenario(config.scenario_path);
    const std::vector<double> eps_grid = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

    struct NamedProbe {
        std::string name;
        PerturbationProbe probe;
    };
    auto constant = [](double v) {
        return [v](std::complex<double>) { return std::complex<double>(v); };
    };
    std::vector<NamedProbe> probes;
    probes.push_back({"cubic_unit", {0.0, 0.0, constant(1.0), constant(0.0), 1.0}});
    probes.push_back({"cubic_wide", {0.0, 0.0, constant(4.0), constant(0.0), 1.0}});
    probes.push_back({"cubic_shifted", {0.0, 0.0, constant(1.0), constant(2.0), 1.0}});
    probes.push_back({"cubic_negative", {0.0, 0.0, constant(-1.0), constant(0.0), 1.0}});
    const KsResult ks = detect_supercritical(spec);
    if (ks.k_s > 0) probes.push_back({"scenario_spike", spike_cubic_probe(1, spec)});

    ordered_json j;
    j["cubic"] = ordered_json::array();
    for (const NamedProbe& np : probes) {
        ordered_json jp;
        jp["name"] = np.name;
        jp["h1_at_z0"] = np.probe.h1(np.probe.z0).real();
        jp["rows"] = ordered_json::array();
        for (double eps : eps_grid) {
            const CubicRootReport r = solve_perturbed_cubic(np.probe, eps);
            jp["rows"].push_back({{"eps", eps},
                                  {"err_minus", r.err_minus},
                                  {"err_plus", r.err_plus},
                                  {"err_middle", r.err_middle},
                                  {"lead_outer", r.lead_outer},
                                  {"lead_middle", r.lead_middle},
                                  {"outer_pair_real", r.outer_pair_real}});
        }
        jp["classification"] = np.probe.h1(np.probe.z0).real() > 0.0
                                   ? "three real"
                                   : "one real, two complex";
        j["cubic"].push_back(jp);
    }

    std::vector<NamedProbe> linear_probes;
    linear_probes.push_back({"linear_constant", {0.0, 0.0, constant(3.0), nullptr, 1.0}});
    linear_probes.push_back(
        {"linear_identity",
         {1.0, 1.0, [](std::complex<double> z) { return z; }, nullptr, 1.0}});
    j["linear"] = ordered_json::array();
    for (const NamedProbe& np : linear_probes) {
        ordered_json jp;
        jp["name"] = np.name;
        jp["rows"] = ordered_json::array();
        for (double eps : eps_grid) {
            const LinearRootReport r = solve_perturbed_linear(np.probe, eps);
            jp["rows"].push_back({{"eps", eps},
                                  {"root", r.root.real()},
                                  {"err", r.err},
                                  {"lead", r.lead}});
        }
        j["linear"].push_back(jp);
    }
    write_text_file(out_path(config, "perturb_check.json"), dump_deterministic(j));
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"deterministic-equivalent spectral analysis for signal-plus-noise Gram matrices"};
    app.require_subcommand(1);

    RunConfig config;
    std::string n_grid_csv;

    auto add_common = [&](CLI::App* sub, bool needs_trials) {
        sub->add_option("--scenario", config.scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", config.out_dir, "output directory")->required();
        sub->add_option("--seed", config.seed, "base RNG seed");
        if (needs_trials) sub->add_option("--trials", config.trials, "Monte Carlo trial count");
        return sub;
    };

    CLI::App* support = add_common(app.add_subcommand("support", "support, masses, density grid"),
                                   /*needs_trials=*/false);
    support->add_option("--grid", config.grid, "density grid resolution");

    add_common(app.add_subcommand("spiked", "spike classification and asymptotic predictions"),
               /*needs_trials=*/false);

    CLI::App* separation =
        add_common(app.add_subcommand("separation", "empirical eigenvalue-count separation"),
                   /*needs_trials=*/true);
    double a_flag = 0.0;
    double b_flag = 0.0;
    CLI::Option* a_opt = separation->add_option("--a", a_flag, "lower count threshold");
    CLI::Option* b_opt = separation->add_option("--b", b_flag, "upper count threshold");
    separation->add_flag("--dump-eigenvalues", config.dump_eigenvalues,
                         "write pooled per-trial eigenvalues as CSV");

    CLI::App* convergence =
        add_common(app.add_subcommand("convergence", "top-eigenvalue convergence sweep"),
                   /*needs_trials=*/true);
    convergence->add_option("--n-grid", n_grid_csv, "comma-separated N grid");

    add_common(app.add_subcommand("perturb-check", "perturbed-equation expansion sweeps"),
               /*needs_trials=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (config.trials < 1) throw ScenarioError("trial count must be >= 1");
        if (config.grid < 16) throw ScenarioError("grid resolution must be >= 16");
        if (*a_opt) config.a = a_flag;
        if (*b_opt) config.b = b_flag;
        if (!n_grid_csv.empty()) {
            config.n_grid.clear();
            std::stringstream ss(n_grid_csv);
            std::string token;
            while (std::getline(ss, token, ',')) {
                try {
                    std::size_t pos = 0;
                    const int v = std::stoi(token, &pos);
                    if (pos != token.size() || v < 1) throw std::invalid_argument(token);
                    config.n_grid.push_back(v);
                } catch (const std::exception&) {
                    throw ScenarioError("malformed N grid entry: \"" + token + "\"");
                }
            }
            if (config.n_grid.empty()) throw ScenarioError("empty N grid");
        }

        if (app.got_subcommand("support")) {
            cmd_support(config);
        } else if (app.got_subcommand("spiked")) {
            cmd_spiked(config);
        } else if (app.got_subcommand("separation")) {
            cmd_separation(config);
        } else if (app.got_subcommand("convergence")) {
            cmd_convergence(config);
        } else if (app.got_subcommand("perturb-check")) {
            cmd_perturb_check(config);
        }
        return 0;
    } catch (const VacuousRequestError& e) {
        std::cerr << "vacuous request: " << e.what() << "\n";
        return 4;
    } catch (const ScenarioError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace specmap::cli
