// Command-line front end: declarative experiment runs, frontier sweeps,
// norm-estimation inspection and calibration of the fallback scaling W.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ballbandit/harness.hpp"
#include "ballbandit/instances.hpp"
#include "ballbandit/norm_estimator.hpp"
#include "ballbandit/oful.hpp"
#include "ballbandit/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ballbandit;

namespace {

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path, "cannot open config file");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error(path, std::string("invalid JSON: ") + e.what());
    }
    return ExperimentConfig::from_json(j);
}

void write_outputs(const fs::path& out_dir, const RunSummary& summary) {
    fs::create_directories(out_dir);
    {
        std::ofstream f(out_dir / "config.json");
        f << summary.config.to_json().dump(2) << '\n';
    }
    {
        std::ofstream f(out_dir / "trace.csv");
        write_trace_csv(f, summary);
    }
    {
        std::ofstream f(out_dir / "summary.json");
        f << summary_to_json(summary).dump(2) << '\n';
    }
    {
        std::ofstream f(out_dir / "manifest.json");
        f << manifest_json(summary).dump(2) << '\n';
    }
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int seeds_override,
            int threads) {
    ExperimentConfig cfg = load_config(config_path);
    if (seeds_override > 0) {
        cfg.seed_list.clear();
        cfg.n_reps = seeds_override;
    }
    const RunSummary summary = run_experiment(cfg, threads);
    write_outputs(out_dir, summary);
    int failures = 0;
    for (const auto& r : summary.runs)
        if (r.failed) {
            ++failures;
            std::cerr << "rep " << r.rep_index << " failed: " << r.error << '\n';
        }
    std::cout << "config_hash=" << summary.config_hash
              << " reps=" << summary.runs.size() - static_cast<std::size_t>(failures)
              << " median_regret=" << summary.regret_quantile(0.5)
              << " median_hint_regret=" << summary.hint_regret_quantile(0.5) << '\n';
    return failures == 0 ? 0 : 3;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::vector<double> g_values, int threads) {
    ExperimentConfig cfg = load_config(config_path);
    const auto rows = sweep_frontier(cfg, g_values, threads);
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "frontier.csv");
    f << "G,median_hint_regret,median_regret,product\n";
    json jrows = json::array();
    for (const auto& row : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", row.g,
                      row.median_hint_regret, row.median_regret,
                      row.median_hint_regret * row.median_regret);
        f << buf;
        std::cout << buf;
        jrows.push_back({{"G", row.g},
                         {"median_hint_regret", row.median_hint_regret},
                         {"median_regret", row.median_regret}});
    }
    std::ofstream jf(fs::path(out_dir) / "frontier.json");
    jf << jrows.dump(2) << '\n';
    return 0;
}

// Norm-estimation phases only: r from EstimateNormHP(0, 1, delta/4), then
// r_perp from EstimateNormHP(h, Delta, delta/4) with Delta = 1/(sqrt(r) T^1/4).
int cmd_estimate(const std::string& config_path, const std::string& out_dir) {
    ExperimentConfig cfg = load_config(config_path);
    RepSetup setup = make_rep_setup(cfg, 0);
    Environment env(setup.instance, cfg.horizon);
    for (const auto& h : setup.hints) env.register_hint(ActionVec(h));
    fs::create_directories(out_dir);
    std::ofstream trace(fs::path(out_dir) / "estimate_trace.csv");
    trace << "stage,update,xbar,width,returned\n";

    RandomSource root(cfg.base_seed, cfg.seed_key(0));
    RandomSource est_rng = root.child(3);
    auto pull = [&](const ActionVec& a) { return env.pull(a, setup.env_rng); };

    const int d = setup.instance.dimension();
    HpNormEstimator c0(Vec(Vec::Zero(d)), 1.0, cfg.policy.delta_prob / 4.0, est_rng.child(1),
                       cfg.policy.hp_k);
    std::int64_t pulls_a = 0;
    std::optional<double> r;
    while (!r && env.round() < cfg.horizon) {
        const std::int64_t before = env.round();
        r = c0.play_and_update(pull);
        pulls_a += env.round() - before;
        if (c0.k() == 1) {
            const auto& in = c0.inner(0);
            char buf[128];
            std::snprintf(buf, sizeof buf, "norm,%lld,%.12g,%.12g,%d\n",
                          static_cast<long long>(in.n()), in.xbar(), in.width(),
                          in.returned() ? 1 : 0);
            trace << buf;
        }
    }
    json out;
    out["pulls_norm_phase"] = pulls_a;
    if (r) out["r"] = *r;
    std::optional<double> r_perp;
    std::int64_t pulls_b = 0;
    if (r && !setup.hints.empty()) {
        const double delta_probe =
            1.0 / (std::sqrt(*r) * std::pow(static_cast<double>(cfg.horizon), 0.25));
        out["Delta"] = delta_probe;
        HpNormEstimator cperp(setup.hints.at(0), delta_probe, cfg.policy.delta_prob / 4.0,
                              est_rng.child(2), cfg.policy.hp_k);
        while (!r_perp && env.round() < cfg.horizon) {
            const std::int64_t before = env.round();
            r_perp = cperp.play_and_update(pull);
            pulls_b += env.round() - before;
            if (cperp.k() == 1) {
                const auto& in = cperp.inner(0);
                char buf[128];
                std::snprintf(buf, sizeof buf, "orth,%lld,%.12g,%.12g,%d\n",
                              static_cast<long long>(in.n()), in.xbar(), in.width(),
                              in.returned() ? 1 : 0);
                trace << buf;
            }
        }
        out["pulls_orth_phase"] = pulls_b;
        if (r_perp) out["r_perp"] = *r_perp;
    }
    out["rounds_used"] = env.round();
    std::cout << out.dump(2) << '\n';
    std::ofstream jf(fs::path(out_dir) / "estimate.json");
    jf << out.dump(2) << '\n';
    return 0;
}

// Fit the fallback worst-case scaling W: 95th percentile of OFUL's final
// regret over seeds, divided by d ln(T) sqrt(T), maximized over the d list.
int cmd_calibrate(const std::string& d_list, std::int64_t horizon, int seeds, int threads) {
    std::vector<int> dims;
    std::stringstream ss(d_list);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) dims.push_back(std::stoi(tok));
    if (dims.empty()) throw config_error("d-list", "no dimensions given");
    double w_fit = 0.0;
    for (const int d : dims) {
        ExperimentConfig cfg;
        cfg.instance.kind = "random_unit";
        cfg.instance.dimension = d;
        cfg.hint.kind = "perfect";
        cfg.policy.kind = "oful";
        cfg.horizon = horizon;
        cfg.n_reps = seeds;
        const RunSummary s = run_experiment(cfg, threads);
        const double p95 = s.regret_quantile(0.95);
        const double w = p95 / (static_cast<double>(d) * std::log(static_cast<double>(horizon)) *
                                std::sqrt(static_cast<double>(horizon)));
        std::cout << "d=" << d << " p95_regret=" << p95 << " W=" << w << '\n';
        w_fit = std::max(w_fit, w);
    }
    std::cout << "fitted W=" << w_fit << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic linear bandit simulations on the unit ball with action hints"};
    app.set_version_flag("--version", kVersion);

    std::string config_path, out_dir = "out";
    int threads = 2, seeds_override = 0;
    std::vector<double> g_values;
    std::string d_list;
    std::int64_t horizon = 65536;
    int calib_seeds = 20;

    auto* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_dir, "output directory")->envname("BALLBANDIT_OUT");
    run->add_option("--seeds", seeds_override, "override replication count")
        ->envname("BALLBANDIT_SEEDS");
    run->add_option("--threads", threads, "worker threads")->envname("BALLBANDIT_THREADS");

    auto* sweep = app.add_subcommand("sweep-frontier", "Sweep the hint-regret budget G");
    sweep->add_option("config", config_path, "experiment config JSON")->required();
    sweep->add_option("--g-values", g_values, "G values")
        ->required()
        ->delimiter(',')
        ->envname("BALLBANDIT_GVALUES");
    sweep->add_option("--out", out_dir, "output directory")->envname("BALLBANDIT_OUT");
    sweep->add_option("--threads", threads, "worker threads")->envname("BALLBANDIT_THREADS");

    auto* est = app.add_subcommand("estimate", "Run only the norm-estimation phases");
    est->add_option("config", config_path, "experiment config JSON")->required();
    est->add_option("--out", out_dir, "output directory")->envname("BALLBANDIT_OUT");

    auto* cal = app.add_subcommand("calibrate-w", "Fit the fallback scaling W");
    cal->add_option("d-list", d_list, "comma-separated dimensions")->required();
    cal->add_option("T", horizon, "horizon")->required();
    cal->add_option("--seeds", calib_seeds, "seeds per dimension")->envname("BALLBANDIT_SEEDS");
    cal->add_option("--threads", threads, "worker threads")->envname("BALLBANDIT_THREADS");

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, out_dir, seeds_override, threads);
        if (*sweep) return cmd_sweep(config_path, out_dir, g_values, threads);
        if (*est) return cmd_estimate(config_path, out_dir);
        if (*cal) return cmd_calibrate(d_list, horizon, calib_seeds, threads);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
