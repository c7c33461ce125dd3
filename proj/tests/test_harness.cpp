#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ballbandit/harness.hpp"

using namespace ballbandit;
using nlohmann::json;

namespace {
ExperimentConfig quick_config() {
    ExperimentConfig cfg;
    cfg.instance.kind = "random_unit";
    cfg.instance.dimension = 4;
    cfg.hint.kind = "perfect";
    cfg.policy.kind = "play_hint";
    cfg.horizon = 256;
    cfg.noise_sigma = 1.0;
    cfg.base_seed = 1;
    cfg.n_reps = 4;
    cfg.record_every = 32;
    return cfg;
}

std::string trace_bytes(const RunSummary& s) {
    std::ostringstream os;
    write_trace_csv(os, s);
    return os.str();
}
}  // namespace

TEST_CASE("config round-trips through JSON losslessly") {
    ExperimentConfig cfg = quick_config();
    cfg.policy.kind = "frontier";
    cfg.policy.frontier_g = 12.345678901234;
    cfg.hint.kind = "quality";
    cfg.hint.quality = 0.333333333333333;
    const json j1 = cfg.to_json();
    const ExperimentConfig back = ExperimentConfig::from_json(j1);
    CHECK(back.to_json().dump() == j1.dump());
}

TEST_CASE("config hash changes iff content changes") {
    ExperimentConfig a = quick_config();
    ExperimentConfig b = quick_config();
    CHECK(a.hash() == b.hash());
    b.horizon += 1;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("config errors carry the offending field path") {
    ExperimentConfig cfg = quick_config();
    cfg.policy.kind = "nonsense";
    try {
        cfg.validate();
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(e.field == "policy.kind");
    }
    json j = quick_config().to_json();
    j["policy"]["kind"] = "frontier";
    j["policy"]["G"] = 1e9;  // > sqrt(horizon)
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), config_error);
}

TEST_CASE("perfect hint with play_hint and sigma=0 has zero regret") {
    ExperimentConfig cfg = quick_config();
    cfg.noise_sigma = 0.0;
    cfg.n_reps = 1;
    const RunSummary s = run_experiment(cfg);
    REQUIRE_FALSE(s.runs.at(0).failed);
    CHECK(s.runs.at(0).final_regret == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.runs.at(0).final_hint_regret.at(0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("identical configs and seeds give byte-identical traces") {
    ExperimentConfig cfg = quick_config();
    cfg.policy.kind = "oful";
    const RunSummary s1 = run_experiment(cfg);
    const RunSummary s2 = run_experiment(cfg);
    CHECK(trace_bytes(s1) == trace_bytes(s2));
}

TEST_CASE("parallel and serial execution produce identical traces") {
    ExperimentConfig cfg = quick_config();
    cfg.policy.kind = "pareto_bandit";
    cfg.policy.hp_k = 1;
    cfg.n_reps = 6;
    const RunSummary serial = run_experiment(cfg, 1);
    const RunSummary parallel = run_experiment(cfg, 2);
    CHECK(trace_bytes(serial) == trace_bytes(parallel));
}

TEST_CASE("trace CSV schema: stable header row") {
    const RunSummary s = run_experiment(quick_config());
    const std::string bytes = trace_bytes(s);
    CHECK(bytes.rfind("run_id,seed,t,cum_regret,cum_hint_regret_h0,phase\n", 0) == 0);
}

TEST_CASE("nearest-rank quantiles") {
    std::vector<double> v{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    CHECK(nearest_rank_quantile(v, 0.5) == 5.0);
    CHECK(nearest_rank_quantile(v, 0.25) == 3.0);
    CHECK(nearest_rank_quantile(v, 0.95) == 10.0);
    CHECK(nearest_rank_quantile({3.0}, 0.5) == 3.0);
}

TEST_CASE("a failing replication is recorded and does not disturb the others") {
    ExperimentConfig cfg = quick_config();
    cfg.hint.kind = "explicit";
    cfg.hint.explicit_h = {1.0, 0.0};  // dimension mismatch with d = 4
    const RunSummary s = run_experiment(cfg);
    for (const auto& r : s.runs) {
        CHECK(r.failed);
        CHECK(r.error.find("hint.vector") != std::string::npos);
    }
    // and a mixed case: failure is per-rep, not global
    const RunResult one = run_one(cfg, 0);
    CHECK(one.failed);
}

TEST_CASE("seed list overrides the base/count block") {
    ExperimentConfig cfg = quick_config();
    cfg.seed_list = {7, 9};
    const RunSummary s = run_experiment(cfg);
    REQUIRE(s.runs.size() == 2);
    CHECK(s.runs[0].seed_key == 7);
    CHECK(s.runs[1].seed_key == 9);
}

TEST_CASE("summary JSON exposes quantiles and per-seed finals") {
    ExperimentConfig cfg = quick_config();
    const RunSummary s = run_experiment(cfg);
    const json j = summary_to_json(s);
    CHECK(j.contains("config_hash"));
    CHECK(j.at("per_seed").size() == 4);
    CHECK(j.at("quantiles").contains("regret_median"));
    const json m = manifest_json(s, false);
    CHECK(m.at("config_hash") == s.config_hash);
    CHECK(m.at("seeds").size() == 4);
}

TEST_CASE("sweep_frontier echoes G exactly and returns medians") {
    ExperimentConfig cfg = quick_config();
    cfg.horizon = 1024;
    cfg.policy.kind = "frontier";
    cfg.policy.hp_k = 1;
    cfg.n_reps = 2;
    const std::vector<double> gs{4.0, 8.0, 16.0};
    const auto rows = sweep_frontier(cfg, gs, 2);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(rows[i].g == gs[i]);
        CHECK(std::isfinite(rows[i].median_regret));
        CHECK(std::isfinite(rows[i].median_hint_regret));
    }
}

TEST_CASE("oful median regret is stable across independent base seeds") {
    // +-30% stability contract, run at reduced scale
    ExperimentConfig cfg = quick_config();
    cfg.instance.dimension = 8;
    cfg.policy.kind = "oful";
    cfg.horizon = 8192;
    cfg.n_reps = 10;
    cfg.base_seed = 1;
    const double m1 = run_experiment(cfg, 2).regret_quantile(0.5);
    cfg.base_seed = 424242;
    const double m2 = run_experiment(cfg, 2).regret_quantile(0.5);
    CHECK(m1 > 0.0);
    CHECK(std::abs(m1 - m2) <= 0.3 * std::max(m1, m2));
}
