#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ballbandit/vec.hpp"

namespace ballbandit {

// Hidden ground truth of one simulation.
struct BanditInstance {
    Vec theta_star;
    double noise_sigma = 1.0;

    int dimension() const { return static_cast<int>(theta_star.size()); }
    double theta_norm() const { return theta_star.norm(); }
    Vec optimal_action() const { return theta_star / theta_star.norm(); }

    void validate() const {
        if (theta_star.size() < 1 || theta_star.norm() == 0.0)
            throw std::domain_error("BanditInstance: theta_star must be nonzero");
        if (noise_sigma < 0.0) throw std::domain_error("BanditInstance: negative noise scale");
    }
};

// r(a*, a) = ||theta*|| - <theta*, a>.
inline double instantaneous_regret(const BanditInstance& inst, const Vec& action) {
    return inst.theta_norm() - inst.theta_star.dot(action);
}

// Bounds (1/2, 3) * ||P^perp_a theta*||^2 / ||theta*|| on the instantaneous
// regret of a unit action with <a, theta*> >= -||theta*||/2.
inline std::pair<double, double> regret_sandwich_bounds(const BanditInstance& inst,
                                                        const Vec& action) {
    const double an = action.norm();
    if (std::abs(an - 1.0) > 1e-9)
        throw std::domain_error("regret_sandwich_bounds: action must be unit norm");
    const double tn = inst.theta_norm();
    if (inst.theta_star.dot(action) < -0.5 * tn - 1e-12)
        throw std::domain_error("regret_sandwich_bounds: <a, theta*> >= -||theta*||/2 required");
    const double orth2 = project_orth(inst.theta_star, action).squaredNorm();
    const double base = orth2 / tn;
    return {0.5 * base, 3.0 * base};
}

// Cumulative pseudo-regret and per-hint regret, owned by the environment and
// visible only to the harness.
struct RegretLedger {
    std::int64_t round = 0;
    double cum_regret = 0.0;
    std::vector<double> cum_hint_regret;
};

class Environment {
  public:
    Environment(BanditInstance inst, std::int64_t horizon)
        : inst_(std::move(inst)), horizon_(horizon) {
        inst_.validate();
        theta_norm_ = inst_.theta_star.norm();
    }

    // Hints are registered before play; one ledger column each.
    void register_hint(const ActionVec& h) {
        if (ledger_.round > 0)
            throw state_error("Environment: hints must be registered before the first pull");
        hint_rewards_.push_back(inst_.theta_star.dot(h.vec()));
        ledger_.cum_hint_regret.push_back(0.0);
    }

    double pull(const ActionVec& action, RandomSource& rng) {
        if (ledger_.round >= horizon_) throw budget_error("Environment: horizon exhausted");
        const double mean = inst_.theta_star.dot(action.vec());
        const double reward =
            inst_.noise_sigma == 0.0 ? mean : mean + inst_.noise_sigma * rng.normal();
        ledger_.cum_regret += theta_norm_ - mean;
        for (std::size_t j = 0; j < hint_rewards_.size(); ++j)
            ledger_.cum_hint_regret[j] += hint_rewards_[j] - mean;
        ++ledger_.round;
        return reward;
    }

    const RegretLedger& ledger() const { return ledger_; }
    const BanditInstance& instance() const { return inst_; }
    std::int64_t horizon() const { return horizon_; }
    std::int64_t round() const { return ledger_.round; }
    double hint_mean_reward(std::size_t j) const { return hint_rewards_[j]; }

  private:
    BanditInstance inst_;
    std::int64_t horizon_;
    double theta_norm_;
    std::vector<double> hint_rewards_;
    RegretLedger ledger_;
};

}  // namespace ballbandit
