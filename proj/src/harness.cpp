#include "ballbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ballbandit/instances.hpp"
#include "ballbandit/oful.hpp"
#include "ballbandit/version.hpp"

namespace ballbandit {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

[[noreturn]] void bad_field(const std::string& path, const std::string& msg) {
    throw config_error(path, msg);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        if (j.contains("instance")) {
            const auto& ji = j.at("instance");
            cfg.instance.kind = get_or<std::string>(ji, "kind", cfg.instance.kind);
            cfg.instance.dimension = get_or<int>(ji, "dimension", cfg.instance.dimension);
            cfg.instance.norm = get_or<double>(ji, "norm", cfg.instance.norm);
            cfg.instance.rho = get_or<double>(ji, "rho", cfg.instance.rho);
            cfg.instance.delta = get_or<double>(ji, "delta", cfg.instance.delta);
            cfg.instance.theta1 = get_or<double>(ji, "theta1", cfg.instance.theta1);
            cfg.instance.index = get_or<int>(ji, "index", cfg.instance.index);
            cfg.instance.signs = get_or<std::vector<int>>(ji, "signs", cfg.instance.signs);
        }
        if (j.contains("hint")) {
            const auto& jh = j.at("hint");
            cfg.hint.kind = get_or<std::string>(jh, "kind", cfg.hint.kind);
            cfg.hint.quality = get_or<double>(jh, "quality", cfg.hint.quality);
            cfg.hint.explicit_h = get_or<std::vector<double>>(jh, "vector", cfg.hint.explicit_h);
            cfg.hint.multi_m = get_or<int>(jh, "m", cfg.hint.multi_m);
            cfg.hint.multi_good_quality =
                get_or<double>(jh, "good_quality", cfg.hint.multi_good_quality);
            cfg.hint.multi_bad_quality =
                get_or<double>(jh, "bad_quality", cfg.hint.multi_bad_quality);
        }
        if (j.contains("policy")) {
            const auto& jp = j.at("policy");
            cfg.policy.kind = get_or<std::string>(jp, "kind", cfg.policy.kind);
            cfg.policy.delta_prob = get_or<double>(jp, "delta", cfg.policy.delta_prob);
            cfg.policy.worst_case_scale = get_or<double>(jp, "W", cfg.policy.worst_case_scale);
            cfg.policy.hp_k = get_or<int>(jp, "hp_k", cfg.policy.hp_k);
            cfg.policy.frontier_g = get_or<double>(jp, "G", cfg.policy.frontier_g);
            cfg.policy.c0 = get_or<double>(jp, "c0", cfg.policy.c0);
            cfg.policy.c1 = get_or<double>(jp, "c1", cfg.policy.c1);
            cfg.policy.exploration_ratio = get_or<int>(jp, "B", cfg.policy.exploration_ratio);
            cfg.policy.oful_lambda = get_or<double>(jp, "lambda", cfg.policy.oful_lambda);
            cfg.policy.switch_r_hat = get_or<double>(jp, "r_hat", cfg.policy.switch_r_hat);
            cfg.policy.switch_r_lb = get_or<double>(jp, "R_LB", cfg.policy.switch_r_lb);
        }
        cfg.horizon = get_or<std::int64_t>(j, "horizon", cfg.horizon);
        cfg.noise_sigma = get_or<double>(j, "noise_sigma", cfg.noise_sigma);
        if (j.contains("seeds")) {
            const auto& js = j.at("seeds");
            if (js.contains("list")) {
                cfg.seed_list = js.at("list").get<std::vector<std::uint64_t>>();
            } else {
                cfg.base_seed = get_or<std::uint64_t>(js, "base", cfg.base_seed);
                cfg.n_reps = get_or<int>(js, "count", cfg.n_reps);
            }
        }
        cfg.record_every = get_or<int>(j, "record_every", cfg.record_every);
    } catch (const json::exception& e) {
        bad_field("<config>", e.what());
    }
    cfg.validate();
    return cfg;
}

json ExperimentConfig::to_json() const {
    json j;
    j["instance"] = {{"kind", instance.kind},     {"dimension", instance.dimension},
                     {"norm", instance.norm},     {"rho", instance.rho},
                     {"delta", instance.delta},   {"theta1", instance.theta1},
                     {"index", instance.index},   {"signs", instance.signs}};
    j["hint"] = {{"kind", hint.kind},
                 {"quality", hint.quality},
                 {"vector", hint.explicit_h},
                 {"m", hint.multi_m},
                 {"good_quality", hint.multi_good_quality},
                 {"bad_quality", hint.multi_bad_quality}};
    j["policy"] = {{"kind", policy.kind},
                   {"delta", policy.delta_prob},
                   {"W", policy.worst_case_scale},
                   {"hp_k", policy.hp_k},
                   {"G", policy.frontier_g},
                   {"c0", policy.c0},
                   {"c1", policy.c1},
                   {"B", policy.exploration_ratio},
                   {"lambda", policy.oful_lambda},
                   {"r_hat", policy.switch_r_hat},
                   {"R_LB", policy.switch_r_lb}};
    j["horizon"] = horizon;
    j["noise_sigma"] = noise_sigma;
    if (seed_list.empty())
        j["seeds"] = {{"base", base_seed}, {"count", n_reps}};
    else
        j["seeds"] = {{"list", seed_list}};
    j["record_every"] = record_every;
    return j;
}

void ExperimentConfig::validate() const {
    static const std::vector<std::string> kInstanceKinds{"random_unit", "scaled", "pareto_family",
                                                         "cube_family", "near_hint"};
    static const std::vector<std::string> kHintKinds{"perfect", "negated",  "quality",
                                                     "explicit", "family", "multi"};
    static const std::vector<std::string> kPolicyKinds{"pareto_bandit", "frontier", "multi_hint",
                                                       "oful",          "play_hint", "switch"};
    auto in = [](const std::vector<std::string>& v, const std::string& x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    if (!in(kInstanceKinds, instance.kind)) bad_field("instance.kind", "unknown kind");
    if (!in(kHintKinds, hint.kind)) bad_field("hint.kind", "unknown kind");
    if (!in(kPolicyKinds, policy.kind)) bad_field("policy.kind", "unknown kind");
    if (instance.dimension < 1) bad_field("instance.dimension", "must be >= 1");
    if (horizon < 1) bad_field("horizon", "must be >= 1");
    if (noise_sigma < 0.0) bad_field("noise_sigma", "must be >= 0");
    if (seed_list.empty() && n_reps < 1) bad_field("seeds.count", "must be >= 1");
    if (record_every < 1) bad_field("record_every", "must be >= 1");
    if (!(policy.delta_prob > 0.0 && policy.delta_prob < 1.0))
        bad_field("policy.delta", "must lie in (0,1)");
    if (policy.kind == "frontier") {
        if (!(policy.frontier_g > 0.0)) bad_field("policy.G", "must be positive");
        if (policy.frontier_g > std::sqrt(static_cast<double>(horizon)))
            bad_field("policy.G", "must not exceed sqrt(horizon)");
        if (!(policy.c0 > policy.c1)) bad_field("policy.c0", "must exceed policy.c1");
    }
    if (policy.kind == "multi_hint" && hint.kind != "multi")
        bad_field("hint.kind", "multi_hint policy requires hint.kind == multi");
    if (hint.kind == "multi" && hint.multi_m < 1) bad_field("hint.m", "must be >= 1");
    if (hint.kind == "quality" && hint.quality < 0.0) bad_field("hint.quality", "must be >= 0");
    if (policy.kind == "switch" && policy.switch_r_hat < 0.0)
        bad_field("policy.r_hat", "must be >= 0");
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json().dump())));
    return std::string(buf);
}

double nearest_rank_quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(p * n));
    if (rank < 1) rank = 1;
    if (rank > values.size()) rank = values.size();
    return values[rank - 1];
}

double RunSummary::regret_quantile(double p) const {
    std::vector<double> v;
    for (const auto& r : runs)
        if (!r.failed) v.push_back(r.final_regret);
    return nearest_rank_quantile(std::move(v), p);
}

double RunSummary::hint_regret_quantile(double p, std::size_t hint_idx) const {
    std::vector<double> v;
    for (const auto& r : runs)
        if (!r.failed && hint_idx < r.final_hint_regret.size())
            v.push_back(r.final_hint_regret[hint_idx]);
    return nearest_rank_quantile(std::move(v), p);
}

RepSetup make_rep_setup(const ExperimentConfig& cfg, int rep) {
    RepSetup out;
    RandomSource root(cfg.base_seed, cfg.seed_key(rep));
    RandomSource instance_rng = root.child(1);
    RandomSource hint_rng = root.child(2);
    RandomSource policy_rng = root.child(3);
    out.env_rng = root.child(4);

    const auto& is = cfg.instance;
    Vec family_hint;
    if (is.kind == "random_unit") {
        out.instance = gen_random_unit(is.dimension, cfg.noise_sigma, instance_rng);
    } else if (is.kind == "scaled") {
        out.instance = gen_scaled(is.dimension, is.norm, cfg.noise_sigma, instance_rng);
    } else if (is.kind == "pareto_family") {
        family_hint = random_unit_vector(is.dimension, instance_rng);
        auto family = gen_pareto_family(family_hint, is.rho, is.delta, is.dimension,
                                        cfg.noise_sigma, instance_rng);
        std::size_t idx;
        if (is.index >= 0) {
            idx = static_cast<std::size_t>(is.index);
            if (idx >= family.size()) bad_field("instance.index", "family member out of range");
        } else {
            idx = static_cast<std::size_t>(instance_rng.uniform_index(family.size()));
        }
        out.instance = family[idx];
    } else if (is.kind == "cube_family") {
        std::vector<int> signs = is.signs;
        if (signs.empty())
            for (int i = 0; i < is.dimension; ++i)
                signs.push_back(instance_rng.uniform_index(2) == 0 ? 1 : -1);
        out.instance = gen_cube_family(is.theta1, is.delta, is.dimension, signs, cfg.noise_sigma);
    } else {  // near_hint
        family_hint = random_unit_vector(is.dimension + 1, instance_rng);
        out.instance =
            gen_near_hint(family_hint, is.delta, is.dimension, cfg.noise_sigma, instance_rng);
    }

    const int d = out.instance.dimension();
    const auto& hs = cfg.hint;
    auto make_quality_hint = [&](double q, RandomSource& r) {
        return gen_hint_of_quality(out.instance, q, r);
    };
    if (hs.kind == "perfect") {
        out.hints.push_back(out.instance.optimal_action());
    } else if (hs.kind == "negated") {
        out.hints.push_back(-out.instance.optimal_action());
    } else if (hs.kind == "quality") {
        out.hints.push_back(make_quality_hint(hs.quality, hint_rng));
    } else if (hs.kind == "explicit") {
        if (static_cast<int>(hs.explicit_h.size()) != d)
            bad_field("hint.vector", "dimension mismatch with the instance");
        Vec h(d);
        for (int i = 0; i < d; ++i) h[i] = hs.explicit_h[static_cast<std::size_t>(i)];
        out.hints.push_back(h);
    } else if (hs.kind == "family") {
        if (family_hint.size() == 0)
            bad_field("hint.kind", "family hint requires a family instance kind");
        out.hints.push_back(family_hint);
    } else {  // multi
        out.hints.push_back(make_quality_hint(hs.multi_good_quality, hint_rng));
        for (int i = 1; i < hs.multi_m; ++i) {
            RandomSource hr = hint_rng.child(static_cast<std::uint64_t>(i));
            out.hints.push_back(make_quality_hint(hs.multi_bad_quality, hr));
        }
    }

    const auto& ps = cfg.policy;
    OfulConfig oc;
    oc.dimension = d;
    oc.delta_prob = ps.delta_prob;
    oc.ridge_lambda = ps.oful_lambda;
    PolicyFactory fallback = [oc]() -> std::unique_ptr<Policy> {
        return std::make_unique<OfulPolicy>(oc);
    };
    if (ps.kind == "oful") {
        out.policy = std::make_unique<OfulPolicy>(oc);
    } else if (ps.kind == "play_hint") {
        out.policy = std::make_unique<PlayHintPolicy>(ActionVec(out.hints.at(0)));
    } else if (ps.kind == "switch") {
        out.policy = std::make_unique<SwitchPolicy>(
            SwitchConfig{ActionVec(out.hints.at(0)), ps.switch_r_hat, cfg.horizon,
                         ps.switch_r_lb},
            fallback());
    } else if (ps.kind == "pareto_bandit") {
        ParetoBanditConfig pc;
        pc.h = ActionVec(out.hints.at(0));
        pc.horizon = cfg.horizon;
        pc.delta_prob = ps.delta_prob;
        pc.worst_case_scale = ps.worst_case_scale;
        pc.hp_k_override = ps.hp_k;
        out.policy = std::make_unique<ParetoBanditPolicy>(std::move(pc), fallback, policy_rng);
    } else if (ps.kind == "frontier") {
        FrontierConfig fc;
        fc.h = ActionVec(out.hints.at(0));
        fc.horizon = cfg.horizon;
        fc.delta_prob = ps.delta_prob;
        fc.target_hint_regret = ps.frontier_g;
        fc.c0 = ps.c0;
        fc.c1 = ps.c1;
        fc.hp_k_override = ps.hp_k;
        out.policy = std::make_unique<FrontierBanditPolicy>(std::move(fc), fallback, policy_rng);
    } else {  // multi_hint
        MultiHintConfig mc;
        mc.hints = out.hints;
        mc.horizon = cfg.horizon;
        mc.delta_prob = ps.delta_prob;
        mc.worst_case_scale = ps.worst_case_scale;
        mc.exploration_ratio = ps.exploration_ratio;
        mc.c0 = ps.c0;
        mc.hp_k_override = ps.hp_k;
        out.policy = std::make_unique<MultiHintBanditPolicy>(std::move(mc), fallback, policy_rng);
    }
    return out;
}

RunResult run_one(const ExperimentConfig& cfg, int rep) {
    RunResult res;
    res.rep_index = rep;
    res.seed_key = cfg.seed_key(rep);
    try {
        RepSetup setup = make_rep_setup(cfg, rep);
        Environment env(setup.instance, cfg.horizon);
        std::vector<double> hint_rewards;
        for (const auto& h : setup.hints) {
            env.register_hint(ActionVec(h));
            hint_rewards.push_back(setup.instance.theta_star.dot(h));
        }
        const double theta_norm = setup.instance.theta_norm();
        for (std::int64_t t = 0; t < cfg.horizon; ++t) {
            const ActionVec a = setup.policy->next_action();
            const double y = env.pull(a, setup.env_rng);
            setup.policy->observe(y);
            for (auto& e : setup.policy->drain_events()) {
                if (e.label == "phase1_done") res.r_estimate = e.r;
                if (!std::isnan(e.r_perp)) res.r_perp_estimate = e.r_perp;
                res.events.push_back(std::move(e));
            }
            if ((t + 1) % cfg.record_every == 0 || t + 1 == cfg.horizon) {
                TraceRow row;
                row.t = t + 1;
                row.cum_regret = env.ledger().cum_regret;
                row.cum_hint_regret = env.ledger().cum_hint_regret;
                row.phase = setup.policy->current_phase();
                res.trace.push_back(std::move(row));
            }
        }
        // Ledger identity: Reg(T) = T r(a*, h) + Reg_h(T) for every hint.
        const auto& led = env.ledger();
        for (std::size_t jh = 0; jh < setup.hints.size(); ++jh) {
            const double lhs = led.cum_regret;
            const double rhs = static_cast<double>(led.round) * (theta_norm - hint_rewards[jh]) +
                               led.cum_hint_regret[jh];
            const double tol =
                1e-9 * static_cast<double>(led.round) * std::max(1.0, theta_norm);
            if (std::abs(lhs - rhs) > tol)
                throw std::logic_error("ledger identity violated beyond tolerance");
        }
        res.final_regret = led.cum_regret;
        res.final_hint_regret = led.cum_hint_regret;
    } catch (const std::exception& e) {
        res.failed = true;
        res.error = e.what();
    }
    return res;
}

RunSummary run_experiment(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    RunSummary summary;
    summary.config = cfg;
    summary.config_hash = cfg.hash();
    const int reps = cfg.rep_count();
    summary.runs.resize(static_cast<std::size_t>(reps));
    const int workers = std::max(1, std::min(threads, reps));
    if (workers == 1) {
        for (int i = 0; i < reps; ++i) summary.runs[static_cast<std::size_t>(i)] = run_one(cfg, i);
    } else {
        std::atomic<int> next{0};
        auto body = [&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= reps) return;
                summary.runs[static_cast<std::size_t>(i)] = run_one(cfg, i);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    return summary;
}

std::vector<FrontierRow> sweep_frontier(const ExperimentConfig& base,
                                        const std::vector<double>& g_values, int threads) {
    std::vector<FrontierRow> rows;
    for (const double g : g_values) {
        ExperimentConfig cfg = base;
        cfg.policy.kind = "frontier";
        cfg.policy.frontier_g = g;
        cfg.validate();
        const RunSummary s = run_experiment(cfg, threads);
        FrontierRow row;
        row.g = g;
        row.median_hint_regret = s.hint_regret_quantile(0.5);
        row.median_regret = s.regret_quantile(0.5);
        rows.push_back(row);
    }
    return rows;
}

void write_trace_csv(std::ostream& os, const RunSummary& summary) {
    std::size_t n_hints = 0;
    for (const auto& r : summary.runs)
        if (!r.failed && !r.trace.empty())
            n_hints = std::max(n_hints, r.trace.front().cum_hint_regret.size());
    os << "run_id,seed,t,cum_regret";
    for (std::size_t j = 0; j < n_hints; ++j) os << ",cum_hint_regret_h" << j;
    os << ",phase\n";
    char buf[64];
    for (const auto& r : summary.runs) {
        if (r.failed) continue;
        for (const auto& row : r.trace) {
            os << summary.config_hash << '-' << r.rep_index << ',' << r.seed_key << ',' << row.t;
            std::snprintf(buf, sizeof buf, ",%.12g", row.cum_regret);
            os << buf;
            for (std::size_t j = 0; j < n_hints; ++j) {
                const double v = j < row.cum_hint_regret.size() ? row.cum_hint_regret[j] : 0.0;
                std::snprintf(buf, sizeof buf, ",%.12g", v);
                os << buf;
            }
            os << ',' << row.phase << '\n';
        }
    }
}

json summary_to_json(const RunSummary& summary) {
    json per_seed = json::array();
    for (const auto& r : summary.runs) {
        json jr;
        jr["rep"] = r.rep_index;
        jr["seed"] = r.seed_key;
        jr["failed"] = r.failed;
        if (r.failed) {
            jr["error"] = r.error;
        } else {
            jr["final_regret"] = r.final_regret;
            jr["final_hint_regret"] = r.final_hint_regret;
            if (!std::isnan(r.r_estimate)) jr["r"] = r.r_estimate;
            if (!std::isnan(r.r_perp_estimate)) jr["r_perp"] = r.r_perp_estimate;
            json ev = json::array();
            for (const auto& e : r.events) {
                json je;
                je["round"] = e.policy_round;
                je["phase"] = e.phase;
                je["label"] = e.label;
                if (!std::isnan(e.r)) je["r"] = e.r;
                if (!std::isnan(e.r_perp)) je["r_perp"] = e.r_perp;
                if (e.eliminated_sign != 0) je["eliminated_sign"] = e.eliminated_sign;
                ev.push_back(std::move(je));
            }
            jr["events"] = std::move(ev);
        }
        per_seed.push_back(std::move(jr));
    }
    json j;
    j["config_hash"] = summary.config_hash;
    j["per_seed"] = std::move(per_seed);
    j["quantiles"] = {{"regret_q25", summary.regret_quantile(0.25)},
                      {"regret_median", summary.regret_quantile(0.5)},
                      {"regret_q75", summary.regret_quantile(0.75)},
                      {"regret_q95", summary.regret_quantile(0.95)},
                      {"hint_regret_median", summary.hint_regret_quantile(0.5)}};
    return j;
}

json manifest_json(const RunSummary& summary, bool with_timestamp) {
    json j;
    j["config_hash"] = summary.config_hash;
    j["library_version"] = kVersion;
    std::vector<std::uint64_t> seeds;
    for (const auto& r : summary.runs) seeds.push_back(r.seed_key);
    j["seeds"] = seeds;
    j["base_seed"] = summary.config.base_seed;
    if (with_timestamp)
        j["created_unix"] = std::chrono::duration_cast<std::chrono::seconds>(
                                std::chrono::system_clock::now().time_since_epoch())
                                .count();
    return j;
}

}  // namespace ballbandit
