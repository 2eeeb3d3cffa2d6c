#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qsearch/errors.hpp"

namespace qsearch::cli {

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_echo(const RunConfig& cfg) {
    write_text(cfg.out / (cfg.command + ".config.json"), cfg.echo().dump(2) + "\n");
}

std::string fixed(double x, int digits = 6) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << x;
    return ss.str();
}

void row(std::ostream& out, const std::string& label, const std::string& value) {
    out << "  " << std::left << std::setw(22) << label << value << '\n';
}

void summary_table(std::ostream& out, const std::string& title, const SimSummary& s) {
    out << title << " (" << s.n_trials << " trials, seed " << s.seed << ")\n";
    row(out, "mean tau1", fixed(s.mean_tau1, 4) + " +- " + fixed(s.se_tau1, 4));
    row(out, "mean tau2", fixed(s.mean_tau2, 4) + " +- " + fixed(s.se_tau2, 4));
    row(out, "mean delay", fixed(s.mean_delay, 4) + " +- " + fixed(s.se_delay, 4));
    row(out, "mean switches", fixed(s.mean_switches, 4));
    row(out, "error rate", fixed(s.error_rate, 4) + " +- " + fixed(s.se_error, 4));
    row(out, "mean cost", fixed(s.mean_cost, 6) + " +- " + fixed(s.se_cost, 6));
}

}  // namespace

void RunConfig::validate() const {
    params.validate();
    settings.validate();
    if (trials < 1) throw ConfigError("--trials must be at least 1");
    if (workers < 1) throw ConfigError("--workers must be at least 1");
    if (command == "sweep") {
        if (snr_list.empty()) throw ConfigError("--snr needs at least one value");
        for (double s : snr_list) {
            if (!std::isfinite(s)) throw ConfigError("--snr values must be finite");
        }
    }
}

Json RunConfig::echo() const {
    Json j;
    j["command"] = command;
    j["params"] = to_json(params);
    j["settings"] = to_json(settings);
    j["trials"] = trials;
    j["workers"] = workers;
    j["out"] = out.string();
    j["bundle"] = bundle.string();
    j["force"] = force;
    j["snr_list"] = snr_list;
    j["solve_key"] = solve_key(params, settings);
    return j;
}

std::filesystem::path RunConfig::bundle_path() const {
    if (!bundle.empty()) return bundle;
    return out / "bundles" / (solve_key(params, settings) + ".json");
}

Solved load_or_solve(const RunConfig& cfg, std::ostream& log) {
    const auto path = cfg.bundle_path();
    if (!cfg.bundle.empty() && !std::filesystem::exists(path)) {
        throw BundleError(BundleError::Kind::io, "bundle " + path.string() + " does not exist");
    }
    if (!cfg.force && std::filesystem::exists(path)) {
        auto bundle = load_bundle(path);
        if (cfg.bundle.empty() && bundle.hash != solve_key(cfg.params, cfg.settings)) {
            throw BundleError(BundleError::Kind::hash, "cached bundle " + path.string() +
                                                          " was solved for other parameters");
        }
        bundle.params.rng_seed = cfg.params.rng_seed;
        log << "reusing bundle " << path.string() << '\n';
        auto policy = policy_from_bundle(bundle, tables_path(path));
        return {std::move(bundle), std::move(policy), true};
    }

    log << "solving M=" << cfg.settings.grid_m << " (" << triangular_node_count(cfg.settings.grid_m)
        << " nodes)\n";
    const auto t0 = std::chrono::steady_clock::now();
    auto policy = build_mixed_policy(cfg.params, cfg.settings);
    log << "solved in " << fixed(seconds_since(t0), 1) << " s\n";
    auto bundle = make_bundle(policy, cfg.settings, utc_now());
    save_bundle(bundle, path);
    save_tables(policy.refinement(), bundle.hash, tables_path(path));
    log << "wrote " << path.string() << '\n';
    return {std::move(bundle), std::move(policy), false};
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    write_echo(cfg);
    std::ostringstream log;
    auto solved = load_or_solve(cfg, cfg.json ? log : out);
    const auto& b = solved.bundle;
    const auto& policy = solved.policy;
    const auto& g = policy.refinement().g();
    const int m = b.grid_m;

    export_surface_csv(g, cfg.out / "exports" / "g.csv");
    export_surface_csv(policy.scanning().vs, cfg.out / "exports" / "vs.csv");
    export_surface_csv(policy.scanning().ac, cfg.out / "exports" / "ac.csv");

    Json j;
    j["bundle"] = cfg.bundle_path().string();
    j["cache_hit"] = solved.cache_hit;
    j["hash"] = b.hash;
    j["a_s"] = b.a_s;
    j["g_at_1_0"] = g.at(m, 0);
    j["g_at_0_0"] = g.at(0, 0);
    j["value_at_prior"] = policy.value_at_prior();
    j["refinement"] = to_json(b.refinement_stats);
    j["scanning"] = to_json(b.scanning_stats);
    if (cfg.json) {
        out << j.dump(2) << '\n';
        return 0;
    }
    out << "refinement: " << b.refinement_stats.iterations << " iterations, residual "
        << b.refinement_stats.residual << '\n';
    out << "scanning:   " << b.scanning_stats.iterations << " iterations, residual "
        << b.scanning_stats.residual << '\n';
    row(out, "A_s", fixed(b.a_s, 8));
    row(out, "g(1,0)", fixed(g.at(m, 0), 8));
    row(out, "g(0,0)", fixed(g.at(0, 0), 8));
    row(out, "V at prior", fixed(policy.value_at_prior(), 8));
    return 0;
}

int cmd_regions(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    write_echo(cfg);
    std::ostringstream log;
    auto solved = load_or_solve(cfg, cfg.json ? log : out);
    const auto& regions = solved.policy.regions();
    const auto path = cfg.out / "exports" / "regions.csv";
    export_regions_csv(solved.policy, path);
    if (cfg.json) {
        Json j{{"regions_csv", path.string()},
               {"stop_count", regions.stop_count()},
               {"switch_count", regions.switch_count()},
               {"nodes", regions.stop_mask.size()},
               {"a_s", regions.a_s}};
        out << j.dump(2) << '\n';
        return 0;
    }
    row(out, "nodes", std::to_string(regions.stop_mask.size()));
    row(out, "R_tau (stop)", std::to_string(regions.stop_count()));
    row(out, "R_phi (switch)", std::to_string(regions.switch_count()));
    out << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    write_echo(cfg);
    std::ostringstream log;
    auto solved = load_or_solve(cfg, cfg.json ? log : out);
    std::vector<TrialRecord> records;
    const auto summary =
        run_batch(solved.policy, cfg.trials, cfg.params.rng_seed, cfg.workers, &records);
    const double dp = solved.policy.value_at_prior();

    export_trials_csv(records, cfg.out / "exports" / "trials.csv");
    write_text(cfg.out / "simulate_summary.json", to_json(summary).dump(2) + "\n");
    Json j{{"summary", to_json(summary)},
           {"dp_value", dp},
           {"cost_gap", summary.mean_cost - dp},
           {"config", cfg.echo()}};
    write_text(cfg.out / "simulate.json", j.dump(2) + "\n");
    if (cfg.json) {
        out << j.dump(2) << '\n';
        return 0;
    }
    summary_table(out, "mixed policy", summary);
    row(out, "DP value at prior", fixed(dp, 6));
    row(out, "MC - DP", fixed(summary.mean_cost - dp, 6));
    return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    write_echo(cfg);
    std::ostringstream log;
    auto solved = load_or_solve(cfg, cfg.json ? log : out);
    const auto report =
        compare_strategies(solved.policy, cfg.trials, cfg.params.rng_seed, cfg.workers);
    Json j = to_json(report);
    j["config"] = cfg.echo();
    write_text(cfg.out / "compare.json", j.dump(2) + "\n");
    if (cfg.json) {
        out << j.dump(2) << '\n';
        return 0;
    }
    summary_table(out, "mixed policy", report.mixed);
    summary_table(out, "baseline", report.baseline);
    if (report.uninformative) {
        out << "observations are uninformative (f0 = f1); savings undefined\n";
        return 0;
    }
    row(out, "baseline pi_U", fixed(report.pi_upper, 6));
    row(out, "delay ratio", fixed(1.0 - report.savings, 4));
    row(out, "savings", fixed(report.savings, 4) + " +- " + fixed(report.savings_se, 4));
    return 0;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    write_echo(cfg);
    const auto points =
        sweep_snr(cfg.params, cfg.settings, cfg.snr_list, cfg.trials, cfg.params.rng_seed,
                  cfg.workers);

    Json arr = Json::array();
    std::vector<double> xs;
    std::vector<double> ys;
    std::ostringstream csv;
    csv << "snr_db,mean_cost,se_cost,error_rate,mean_delay,dp_value\n";
    bool failed = false;
    for (const auto& p : points) {
        Json pj{{"snr_db", p.snr_db}, {"dp_value", p.dp_value}};
        if (p.summary) {
            pj["summary"] = to_json(*p.summary);
            xs.push_back(p.snr_db);
            ys.push_back(p.summary->mean_cost);
            csv << format_double(p.snr_db) << ',' << format_double(p.summary->mean_cost) << ','
                << format_double(p.summary->se_cost) << ',' << format_double(p.summary->error_rate)
                << ',' << format_double(p.summary->mean_delay) << ',' << format_double(p.dp_value)
                << '\n';
        } else {
            pj["error"] = p.error;
            failed = true;
        }
        arr.push_back(std::move(pj));
    }
    Json j{{"points", arr}, {"config", cfg.echo()}};
    if (xs.size() >= 2) {
        j["slope"] = least_squares_slope(xs, ys);
    } else {
        j["slope"] = nullptr;
    }
    write_text(cfg.out / "sweep.json", j.dump(2) + "\n");
    write_text(cfg.out / "exports" / "sweep.csv", csv.str());

    if (cfg.json) {
        out << j.dump(2) << '\n';
    } else {
        out << std::left << std::setw(10) << "SNR dB" << std::setw(14) << "mean cost"
            << std::setw(12) << "SE" << std::setw(12) << "error" << "DP value\n";
        for (const auto& p : points) {
            out << std::left << std::setw(10) << p.snr_db;
            if (p.summary) {
                out << std::setw(14) << fixed(p.summary->mean_cost) << std::setw(12)
                    << fixed(p.summary->se_cost) << std::setw(12) << fixed(p.summary->error_rate, 4)
                    << fixed(p.dp_value) << '\n';
            } else {
                out << "failed: " << p.error << '\n';
            }
        }
        if (xs.size() >= 2) row(out, "slope (cost/dB)", fixed(least_squares_slope(xs, ys), 6));
    }
    return failed ? 1 : 0;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-stage quickest search with mixed observations"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env = std::getenv(kOutEnv); env && *env) cfg.out = env;
    double pi = cfg.params.pi;
    double c = cfg.params.c;
    double sigma2 = 1.0;
    std::optional<double> snr_db;
    std::optional<double> power;
    std::uint64_t seed = cfg.params.rng_seed;
    std::string out_dir = cfg.out.string();
    std::string bundle;
    std::vector<double> snr_list = cfg.snr_list;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--pi", pi, "prior probability of F1")->capture_default_str();
        sub->add_option("--c", c, "cost per observation")->capture_default_str();
        sub->add_option("--sigma2", sigma2, "noise variance of f0")->capture_default_str();
        auto* snr = sub->add_option("--snr-db", snr_db, "SNR 10 log10(P/sigma2) [default 3]");
        auto* p = sub->add_option("--p", power, "signal power P");
        snr->excludes(p);
        p->excludes(snr);
        sub->add_option("--seed", seed, "base RNG seed")->capture_default_str();
        sub->add_option("--grid-m", cfg.settings.grid_m, "simplex grid resolution M")
            ->capture_default_str();
        sub->add_option("--quad-points", cfg.settings.quad.n_points, "quadrature points")
            ->capture_default_str();
        sub->add_option("--tol", cfg.settings.tol, "value-iteration tolerance")->capture_default_str();
        sub->add_option("--max-iter", cfg.settings.max_iter, "value-iteration cap")
            ->capture_default_str();
        sub->add_option("--loglr-bound", cfg.settings.loglr_bound, "log-LR grid half width")
            ->capture_default_str();
        sub->add_option("--loglr-points", cfg.settings.loglr_points, "log-LR grid points (odd)")
            ->capture_default_str();
        sub->add_option("--trials", cfg.trials, "Monte-Carlo trials")->capture_default_str();
        sub->add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
        sub->add_option("--out", out_dir, std::string("output directory (env ") + kOutEnv + ")")
            ->capture_default_str();
        sub->add_option("--bundle", bundle, "bundle file to reuse");
        sub->add_flag("--force", cfg.force, "re-solve even when a cached bundle exists");
        sub->add_flag("--json", cfg.json, "print a machine-readable summary");
    };

    std::vector<std::pair<CLI::App*, int (*)(const RunConfig&, std::ostream&)>> commands;
    auto add_command = [&](const char* name, const char* help,
                           int (*fn)(const RunConfig&, std::ostream&)) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        commands.emplace_back(sub, fn);
        return sub;
    };
    add_command("solve", "solve the refinement and scanning problems and write a bundle", cmd_solve);
    add_command("regions", "export the stopping and switching regions", cmd_regions);
    add_command("simulate", "Monte-Carlo evaluation of the mixed policy", cmd_simulate);
    add_command("compare", "mixed policy vs error-matched single-observation baseline", cmd_compare);
    auto* sweep = add_command("sweep", "solve and simulate over a list of SNR values", cmd_sweep);
    sweep->add_option("--snr", snr_list, "comma-separated SNR values in dB")
        ->delimiter(',')
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        cfg.params.pi = pi;
        cfg.params.c = c;
        cfg.params.rng_seed = seed;
        if (!(sigma2 > 0.0)) throw ConfigError("--sigma2 must be positive");
        if (power) {
            if (!(*power >= 0.0)) throw ConfigError("--p must be non-negative");
            cfg.params.densities = DensityPair::gaussian(sigma2, *power);
        } else {
            cfg.params.densities = DensityPair::gaussian_snr_db(sigma2, snr_db.value_or(3.0));
        }
        cfg.out = out_dir;
        cfg.bundle = bundle;
        cfg.snr_list = snr_list;
        for (const auto& [sub, fn] : commands) {
            if (sub->parsed()) {
                cfg.command = sub->get_name();
                return fn(cfg, out);
            }
        }
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace qsearch::cli
