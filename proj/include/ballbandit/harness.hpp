#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ballbandit/environment.hpp"
#include "ballbandit/policies.hpp"

namespace ballbandit {

struct InstanceSpec {
    std::string kind = "random_unit";  // random_unit|scaled|pareto_family|cube_family|near_hint
    int dimension = 2;                 // ambient d (cube/near_hint output d+1)
    double norm = 1.0;                 // scaled
    double rho = 0.5;                  // pareto_family center scale
    double delta = 0.1;                // pareto_family / cube / near_hint spread
    double theta1 = 0.5;               // cube first coordinate
    int index = -1;                    // pareto_family member; -1 = drawn per seed
    std::vector<int> signs;            // cube corner; empty = drawn per seed
};

struct HintSpec {
    std::string kind = "perfect";  // perfect|negated|quality|explicit|family|multi
    double quality = 0.0;
    std::vector<double> explicit_h;
    int multi_m = 0;  // multi: one good hint + (m-1) at bad_quality
    double multi_good_quality = 0.0;
    double multi_bad_quality = 1.0;
};

struct PolicySpec {
    std::string kind = "oful";  // pareto_bandit|frontier|multi_hint|oful|play_hint|switch
    double delta_prob = 0.1;
    double worst_case_scale = kDefaultWorstCaseScale;
    int hp_k = 0;
    double frontier_g = 0.0;
    double c0 = 4.0;
    double c1 = 1.0;
    int exploration_ratio = 0;
    double oful_lambda = 1.0;
    double switch_r_hat = 0.0;
    double switch_r_lb = 0.0;
};

struct ExperimentConfig {
    InstanceSpec instance;
    HintSpec hint;
    PolicySpec policy;
    std::int64_t horizon = 1000;
    double noise_sigma = 1.0;
    std::uint64_t base_seed = 1;
    int n_reps = 1;
    std::vector<std::uint64_t> seed_list;  // overrides (base_seed, n_reps) keys when set
    int record_every = 64;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
    std::string hash() const;  // FNV-1a over the canonical serialization
    int rep_count() const {
        return seed_list.empty() ? n_reps : static_cast<int>(seed_list.size());
    }
    std::uint64_t seed_key(int rep) const {
        return seed_list.empty() ? static_cast<std::uint64_t>(rep)
                                 : seed_list[static_cast<std::size_t>(rep)];
    }
};

struct TraceRow {
    std::int64_t t = 0;
    double cum_regret = 0.0;
    std::vector<double> cum_hint_regret;
    int phase = 0;
};

struct RunResult {
    int rep_index = 0;
    std::uint64_t seed_key = 0;
    bool failed = false;
    std::string error;
    double final_regret = 0.0;
    std::vector<double> final_hint_regret;
    double r_estimate = std::numeric_limits<double>::quiet_NaN();
    double r_perp_estimate = std::numeric_limits<double>::quiet_NaN();
    std::vector<PhaseEvent> events;
    std::vector<TraceRow> trace;
};

struct RunSummary {
    ExperimentConfig config;
    std::string config_hash;
    std::vector<RunResult> runs;  // ordered by rep index

    // Nearest-rank quantile of the successful runs' final regret.
    double regret_quantile(double p) const;
    double hint_regret_quantile(double p, std::size_t hint_idx = 0) const;
};

// Nearest-rank quantile: the ceil(p*n)-th smallest value (1-based).
double nearest_rank_quantile(std::vector<double> values, double p);

RunSummary run_experiment(const ExperimentConfig& cfg, int threads = 1);

// One (G, median hint regret, median worst-case regret) row per swept value.
struct FrontierRow {
    double g = 0.0;
    double median_hint_regret = 0.0;
    double median_regret = 0.0;
};
std::vector<FrontierRow> sweep_frontier(const ExperimentConfig& base, const std::vector<double>& g_values,
                                        int threads = 1);

void write_trace_csv(std::ostream& os, const RunSummary& summary);
nlohmann::json summary_to_json(const RunSummary& summary);
nlohmann::json manifest_json(const RunSummary& summary, bool with_timestamp = true);

// Assembled per-rep simulation pieces, exposed for tests and the CLI.
struct RepSetup {
    BanditInstance instance;
    std::vector<Vec> hints;  // registered hints; hints[0] is the reference
    std::unique_ptr<Policy> policy;
    RandomSource env_rng;
};
RepSetup make_rep_setup(const ExperimentConfig& cfg, int rep);

RunResult run_one(const ExperimentConfig& cfg, int rep);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace ballbandit
