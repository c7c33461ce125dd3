#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ballbandit/concentration.hpp"
#include "ballbandit/norm_estimator.hpp"
#include "ballbandit/vec.hpp"

namespace ballbandit {

// Worst-case scaling constant W of the three-phase algorithm; default fitted
// by `calibrate-w` (fallback 95th-percentile regret at d in {8,16}, T = 2^16,
// divided by d ln(T) sqrt(T)).
inline constexpr double kDefaultWorstCaseScale = 0.193;

struct PhaseEvent {
    std::int64_t policy_round = 0;
    int phase = 0;
    double r = std::numeric_limits<double>::quiet_NaN();
    double r_perp = std::numeric_limits<double>::quiet_NaN();
    int eliminated_sign = 0;
    std::string label;
};

// Decision-maker interface. A policy sees only its own actions and rewards;
// it never reads theta*, a*, or the ledger. next_action() and observe()
// strictly alternate, one observe per action.
class Policy {
  public:
    virtual ~Policy() = default;

    ActionVec next_action() {
        if (awaiting_reward_) throw state_error("Policy: observe() expected");
        ActionVec a = do_next_action();
        awaiting_reward_ = true;
        return a;
    }

    void observe(double reward) {
        if (!awaiting_reward_) throw state_error("Policy: next_action() expected");
        awaiting_reward_ = false;
        ++pulls_;
        do_observe(reward);
    }

    virtual int current_phase() const { return 0; }
    std::int64_t pulls() const { return pulls_; }

    std::vector<PhaseEvent> drain_events() {
        std::vector<PhaseEvent> out;
        out.swap(events_);
        return out;
    }

  protected:
    virtual ActionVec do_next_action() = 0;
    virtual void do_observe(double reward) = 0;

    void emit(PhaseEvent e) {
        e.policy_round = pulls_;
        events_.push_back(std::move(e));
    }

  private:
    bool awaiting_reward_ = false;
    std::int64_t pulls_ = 0;
    std::vector<PhaseEvent> events_;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

// Constant policy: plays the hint every round.
class PlayHintPolicy final : public Policy {
  public:
    explicit PlayHintPolicy(ActionVec h) : h_(std::move(h)) {}

  protected:
    ActionVec do_next_action() override { return h_; }
    void do_observe(double) override {}

  private:
    ActionVec h_;
};

struct SwitchConfig {
    ActionVec h;
    double r_hat = 0.0;  // lower estimate of the hint's instantaneous regret
    std::int64_t horizon = 0;
    double fallback_regret_bound = 0.0;  // R_LB
};

// Plays the hint iff r_hat * T <= R_LB (inclusive); otherwise delegates every
// round to the fallback. The branch decision consumes no pulls.
class SwitchPolicy final : public Policy {
  public:
    SwitchPolicy(SwitchConfig cfg, std::unique_ptr<Policy> fallback)
        : cfg_(std::move(cfg)), fallback_(std::move(fallback)) {
        if (cfg_.r_hat < 0.0) throw std::domain_error("SwitchPolicy: r_hat must be >= 0");
        play_hint_ = cfg_.r_hat * static_cast<double>(cfg_.horizon) <= cfg_.fallback_regret_bound;
    }

    bool hint_branch() const { return play_hint_; }

  protected:
    ActionVec do_next_action() override {
        return play_hint_ ? cfg_.h : fallback_->next_action();
    }
    void do_observe(double reward) override {
        if (!play_hint_) fallback_->observe(reward);
    }

  private:
    SwitchConfig cfg_;
    std::unique_ptr<Policy> fallback_;
    bool play_hint_ = true;
};

// Two-arm scheduler favoring arm 0 (the hint arm). Arm 1 is pulled only while
// its optimistic bound still overlaps arm 0's and its pull count stays under
// the exploration schedule 2 G ln(2 + n0); an arm whose upper bound drops
// below the other's lower bound is eliminated.
class HintFavoringTwoArmMab {
  public:
    HintFavoringTwoArmMab(double target_hint_regret, double delta)
        : G_(target_hint_regret), delta_(delta) {
        if (!(G_ > 0.0)) throw std::domain_error("HintFavoringTwoArmMab: G must be positive");
    }

    int next_arm() const {
        if (elim_[0] && !elim_[1]) return 1;
        if (elim_[1]) return 0;
        if (n_[0] == 0) return 0;
        const double budget = 2.0 * G_ * std::log(2.0 + static_cast<double>(n_[0]));
        if (static_cast<double>(n_[1]) < budget && ucb(1) >= lcb(0)) return 1;
        return 0;
    }

    void record(int arm, double reward) {
        sum_[arm] += reward;
        ++n_[arm];
        for (int i = 0; i < 2; ++i) {
            const int j = 1 - i;
            if (!elim_[i] && n_[i] > 0 && n_[j] > 0 && ucb(i) < lcb(j)) elim_[i] = true;
        }
    }

    bool eliminated(int arm) const { return elim_[arm]; }
    std::int64_t pulls(int arm) const { return n_[arm]; }
    double mean(int arm) const {
        return n_[arm] ? sum_[arm] / static_cast<double>(n_[arm]) : 0.0;
    }

  private:
    double width(int arm) const {
        return n_[arm] == 0 ? std::numeric_limits<double>::infinity()
                            : anytime_hoeffding_width(n_[arm], 1.0, delta_);
    }
    double ucb(int arm) const { return mean(arm) + width(arm); }
    double lcb(int arm) const { return mean(arm) - width(arm); }

    double G_;
    double delta_;
    std::int64_t n_[2] = {0, 0};
    double sum_[2] = {0.0, 0.0};
    bool elim_[2] = {false, false};
};

struct ParetoBanditConfig {
    ActionVec h;                // unit hint
    std::int64_t horizon = 0;   // T
    double delta_prob = 0.1;    // delta
    double worst_case_scale = kDefaultWorstCaseScale;  // W
    int hp_k_override = 0;      // 0 = default k = ceil(560 ln(1/delta))
};

// Three-phase hint-exploiting algorithm: estimate ||theta*||, estimate
// ||P^perp_h theta*|| on both signs of the hint with CI elimination of the
// worse sign, then switch between committing to the surviving hint and the
// hint-agnostic fallback.
class ParetoBanditPolicy final : public Policy {
  public:
    ParetoBanditPolicy(ParetoBanditConfig cfg, PolicyFactory fallback_factory, RandomSource rng);

    int current_phase() const override { return phase_; }
    double r_estimate() const { return r_; }
    double r_perp_estimate() const { return r_perp_; }
    double probe_scale() const { return pert_scale_; }

  protected:
    ActionVec do_next_action() override;
    void do_observe(double reward) override;

  private:
    enum class Route { kC0, kSignHp, kSignSlot, kPhase3 };

    void start_phase2(double r);
    void begin_sweep();
    void sign_update_done();
    void sweep_boundary();
    void enter_phase3(double r_perp);

    ParetoBanditConfig cfg_;
    PolicyFactory fallback_factory_;
    RandomSource rng_;
    int d_;
    double log_t_;
    int phase_ = 1;

    std::unique_ptr<HpNormEstimator> c0_;
    double r_ = std::numeric_limits<double>::quiet_NaN();
    double pert_scale_ = 0.0;  // Delta

    Vec sign_h_[2];
    std::unique_ptr<HpNormEstimator> sign_hp_[2];
    bool active_[2] = {true, true};
    double ysum_[2] = {0.0, 0.0};
    std::int64_t ycount_[2] = {0, 0};

    std::vector<int> sweep_list_;
    std::size_t sweep_pos_ = 0;

    Route pending_route_ = Route::kC0;
    int pending_sign_ = 0;
    bool pending_is_hint_ = false;

    double r_perp_ = std::numeric_limits<double>::quiet_NaN();
    std::unique_ptr<SwitchPolicy> switch_;
};

struct FrontierConfig {
    ActionVec h;
    std::int64_t horizon = 0;
    double delta_prob = 0.1;
    double target_hint_regret = 0.0;  // G <= sqrt(T)
    double c0 = 4.0;
    double c1 = 1.0;
    int hp_k_override = 0;
};

// Pareto-frontier variant: the probe radius scales with the hint-regret
// budget G and phase 2's sign selection is delegated to a hint-favoring
// two-arm scheduler whose pulls are whole estimator updates.
class FrontierBanditPolicy final : public Policy {
  public:
    FrontierBanditPolicy(FrontierConfig cfg, PolicyFactory fallback_factory, RandomSource rng);

    int current_phase() const override { return phase_; }
    double r_estimate() const { return r_; }
    double r_perp_estimate() const { return r_perp_; }
    double probe_scale() const { return pert_scale_; }

  protected:
    ActionVec do_next_action() override;
    void do_observe(double reward) override;

  private:
    enum class Route { kC0, kSignHp, kSignSlot, kPhase3 };

    void start_phase2(double r);
    void pick_arm();
    void arm_update_done();
    void enter_phase3(double r_perp);

    FrontierConfig cfg_;
    PolicyFactory fallback_factory_;
    RandomSource rng_;
    int d_;
    double log_t_;
    int phase_ = 1;

    std::unique_ptr<HpNormEstimator> c0_;
    double r_ = std::numeric_limits<double>::quiet_NaN();
    double pert_scale_ = 0.0;

    Vec sign_h_[2];
    std::unique_ptr<HpNormEstimator> sign_hp_[2];
    std::unique_ptr<HintFavoringTwoArmMab> mab_;
    int cur_arm_ = -1;
    double upd_ysum_ = 0.0;
    std::int64_t upd_ycount_ = 0;

    Route pending_route_ = Route::kC0;
    bool pending_is_hint_ = false;

    double r_perp_ = std::numeric_limits<double>::quiet_NaN();
    std::unique_ptr<SwitchPolicy> switch_;
};

struct MultiHintConfig {
    std::vector<Vec> hints;  // m base hints; +-h instances are built per hint
    std::int64_t horizon = 0;
    double delta_prob = 0.1;
    double worst_case_scale = kDefaultWorstCaseScale;
    int exploration_ratio = 0;  // B; 0 = ceil(m^(1/3))
    double c0 = 4.0;
    int hp_k_override = 0;
};

// Multi-hint tournament: per-sign estimators for every hint are advanced
// round-robin with CI elimination and removal of hints whose estimated
// orthogonal norm is already disqualifying, for at most T/(mB) iterations;
// the surviving hint is handed to ParetoBandit.
class MultiHintBanditPolicy final : public Policy {
  public:
    MultiHintBanditPolicy(MultiHintConfig cfg, PolicyFactory fallback_factory, RandomSource rng);

    int current_phase() const override;
    int active_instances() const;
    std::int64_t tournament_iterations() const { return iter_; }
    const Vec& committed_hint() const {
        if (!committed_policy_) throw state_error("MultiHintBanditPolicy: not committed yet");
        return committed_hint_;
    }

  protected:
    ActionVec do_next_action() override;
    void do_observe(double reward) override;

  private:
    enum class Route { kC0, kInstHp, kInstSlot, kCommitted };

    void start_tournament(double r);
    void inst_update_done();
    void sweep_boundary();
    void commit();

    MultiHintConfig cfg_;
    PolicyFactory fallback_factory_;
    RandomSource rng_;
    int d_;
    int m_;
    int b_ratio_;
    double log_t_;
    std::int64_t iter_cap_ = 0;
    std::int64_t iter_ = 0;
    int phase_ = 1;

    std::unique_ptr<HpNormEstimator> c0_;
    double r_ = std::numeric_limits<double>::quiet_NaN();
    double pert_scale_ = 0.0;

    std::vector<Vec> inst_h_;
    std::vector<std::unique_ptr<HpNormEstimator>> insts_;
    std::vector<bool> active_;
    std::vector<double> ysum_;
    std::vector<std::int64_t> ycount_;

    std::vector<int> sweep_list_;
    std::size_t sweep_pos_ = 0;

    Route pending_route_ = Route::kC0;
    int pending_inst_ = 0;
    bool pending_is_hint_ = false;

    Vec committed_hint_;
    std::unique_ptr<Policy> committed_policy_;
};

}  // namespace ballbandit
