#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ballbandit/concentration.hpp"
#include "ballbandit/vec.hpp"

namespace ballbandit {

// Low-regret estimator of ||P^perp_h theta*||. One update plays the reference
// action h and the fixed perturbed action (h+p)/sqrt(||h||^2+||p||^2), tracks
// xbar_n = zbar_n sqrt(||h||^2+||p||^2) - ybar_n, and returns
// (sqrt(d')/Delta)|xbar_n| once |xbar_n| >= 2 b_n. The perturbation p is
// sampled once at construction and never resampled.
class NormEstimator {
  public:
    NormEstimator(const Vec& h, double delta, RandomSource& rng) : delta_(delta) {
        const double hn = h.norm();
        if (!(delta > 0.0)) throw std::domain_error("NormEstimator: delta must be positive");
        const bool has_h = hn > kBallSlack;
        if (has_h && std::abs(hn - 1.0) > 1e-9)
            throw std::domain_error("NormEstimator: reference action must be zero or unit");
        if (has_h && h.size() < 2)
            throw std::domain_error("NormEstimator: orthogonal perturbation needs d >= 2");
        h_act_ = ActionVec(has_h ? Vec(h / hn) : Vec(Vec::Zero(h.size())));
        dprime_ = static_cast<double>(h.size() - (has_h ? 1 : 0));
        do {
            p_ = sample_projected_gaussian(h_act_.vec(), delta * delta, rng);
        } while (!has_h && p_.squaredNorm() == 0.0);
        pert_act_ = perturb(h_act_, p_);
        h_norm_sq_ = has_h ? 1.0 : 0.0;
        p_norm_sq_ = p_.squaredNorm();
        scale_ = std::sqrt(h_norm_sq_ + p_norm_sq_);
        test_coef_ = 12.0 * (1.0 + h_norm_sq_ + p_norm_sq_);
        value_coef_ = std::sqrt(dprime_) / delta_;
    }

    // Action for the pending pull: h first, then the perturbed action.
    const ActionVec& pending_action() const {
        if (returned_) throw state_error("NormEstimator: already returned");
        return awaiting_z_ ? pert_act_ : h_act_;
    }

    bool pending_is_hint_play() const { return !awaiting_z_; }

    // Feed the reward of the pending pull. At the end of an update, returns
    // the estimate if the stopping rule fired.
    std::optional<double> absorb(double reward) {
        if (returned_) throw state_error("NormEstimator: already returned");
        if (!awaiting_z_) {
            sum_y_ += reward;
            awaiting_z_ = true;
            return std::nullopt;
        }
        sum_z_ += reward;
        awaiting_z_ = false;
        ++n_;
        const double nd = static_cast<double>(n_);
        const double sx = scale_ * sum_z_ - sum_y_;
        const double lhs = sx * sx;
        // log_cached_ lower-bounds ln(40 ln(2n)), which is increasing in n,
        // so failing this test means the exact stopping rule cannot fire.
        if (lhs < test_coef_ * nd * log_cached_) return std::nullopt;
        log_cached_ = std::log(40.0 * std::log(2.0 * nd));
        if (lhs >= test_coef_ * nd * log_cached_) {
            returned_ = true;
            value_ = value_coef_ * std::abs(sx) / nd;
            return value_;
        }
        return std::nullopt;
    }

    // One full update through an environment-pull callback (two pulls).
    template <class PullFn>
    std::optional<double> play_and_update(PullFn&& pull) {
        if (returned_) throw state_error("NormEstimator: already returned");
        absorb(pull(h_act_));
        return absorb(pull(pert_act_));
    }

    bool returned() const { return returned_; }
    double value() const {
        if (!returned_) throw state_error("NormEstimator: no value yet");
        return value_;
    }

    std::int64_t n() const { return n_; }
    double xbar() const { return n_ ? (scale_ * sum_z_ - sum_y_) / static_cast<double>(n_) : 0.0; }
    double ybar() const { return n_ ? sum_y_ / static_cast<double>(n_) : 0.0; }
    double width() const { return n_ ? estimator_width(n_, h_norm_sq_, p_norm_sq_) : 0.0; }
    const Vec& perturbation() const { return p_; }
    const ActionVec& hint_action() const { return h_act_; }
    const ActionVec& perturbed_action() const { return pert_act_; }
    double delta() const { return delta_; }
    double dprime() const { return dprime_; }

  private:
    ActionVec h_act_, pert_act_;
    Vec p_;
    double delta_;
    double dprime_;
    double h_norm_sq_ = 0.0, p_norm_sq_ = 0.0;
    double scale_ = 0.0;
    double test_coef_ = 0.0;
    double value_coef_ = 0.0;
    double sum_y_ = 0.0, sum_z_ = 0.0;
    double log_cached_ = 0.0;
    std::int64_t n_ = 0;
    bool awaiting_z_ = false;
    bool returned_ = false;
    double value_ = 0.0;
};

// Median-of-means amplification: k independent NormEstimator instances advance
// in fixed index order; once ceil(0.67 k) have returned, the lower median of
// the return set is emitted. Afterwards an update is a single unperturbed play
// of h that returns the median again.
class HpNormEstimator {
  public:
    HpNormEstimator(const Vec& h, double delta, double delta_prob, const RandomSource& parent_rng,
                    int k_override = 0) {
        if (!(delta_prob > 0.0 && delta_prob < 1.0))
            throw std::domain_error("HpNormEstimator: delta_prob must lie in (0,1)");
        k_ = k_override > 0 ? k_override : default_k(delta_prob);
        quorum_ = static_cast<int>(std::ceil(0.67 * static_cast<double>(k_)));
        const double hn = h.norm();
        const bool has_h = hn > kBallSlack;
        h_act_ = ActionVec(has_h ? Vec(h / hn) : Vec(Vec::Zero(h.size())));
        inner_.reserve(static_cast<std::size_t>(k_));
        for (int i = 0; i < k_; ++i) {
            RandomSource child = parent_rng.child(static_cast<std::uint64_t>(i) + 1);
            inner_.emplace_back(h, delta, child);
        }
        begin_update();
    }

    static int default_k(double delta_prob) {
        return std::max(1, static_cast<int>(std::ceil(560.0 * std::log(1.0 / delta_prob))));
    }

    int k() const { return k_; }
    int quorum() const { return quorum_; }
    int returned_count() const { return static_cast<int>(returns_.size()); }
    int active_count() const { return k_ - returned_count(); }

    // Pareto phase-2 behavior: inner instances that already returned keep a
    // slot that plays the unperturbed hint (no perturbation).
    void set_returned_slots_play_hint(bool on) { slot_mode_ = on; }

    bool committed() const { return committed_; }
    double value() const {
        if (!committed_) throw state_error("HpNormEstimator: no value yet");
        return value_;
    }

    bool update_in_progress() const { return mid_update_; }

    const ActionVec& pending_action() const {
        // post-commit updates and returned-instance slots play the bare hint
        if (committed_ || slot_play_) return h_act_;
        return inner_[static_cast<std::size_t>(cursor_)].pending_action();
    }

    bool pending_is_hint_play() const {
        if (committed_ || slot_play_) return true;
        return inner_[static_cast<std::size_t>(cursor_)].pending_is_hint_play();
    }

    std::optional<double> absorb(double reward) {
        if (committed_) {
            // Post-quorum update: one unperturbed play, then the median again.
            mid_update_ = false;
            return value_;
        }
        mid_update_ = true;
        auto& inst = inner_[static_cast<std::size_t>(cursor_)];
        if (slot_play_) {
            // Returned instance's slot: the reward only feeds the caller's CI.
            advance_cursor();
        } else {
            auto res = inst.absorb(reward);
            if (res) {
                returns_.push_back(*res);
                advance_cursor();
            } else if (!inst.pending_is_hint_play()) {
                // still mid-update (z pull pending)
            } else {
                advance_cursor();
            }
        }
        if (!sweep_done_) return std::nullopt;
        mid_update_ = false;
        if (returned_count() >= quorum_) {
            commit();
            return value_;
        }
        begin_update();
        return std::nullopt;
    }

    // One full update; same pull sequence as the stepwise interface but
    // driven directly (do not interleave with pending_action/absorb).
    template <class PullFn>
    std::optional<double> play_and_update(PullFn&& pull) {
        if (committed_) {
            pull(h_act_);
            return value_;
        }
        for (auto& inst : inner_) {
            if (inst.returned()) {
                if (slot_mode_) pull(h_act_);
                continue;
            }
            if (auto res = inst.play_and_update(pull)) returns_.push_back(*res);
        }
        if (returned_count() >= quorum_) {
            commit();
            return value_;
        }
        begin_update();
        return std::nullopt;
    }

    const std::vector<double>& returned_values() const { return returns_; }
    const ActionVec& hint_action() const { return h_act_; }
    const NormEstimator& inner(int i) const { return inner_[static_cast<std::size_t>(i)]; }

  private:
    void begin_update() {
        sweep_done_ = false;
        mid_update_ = false;
        cursor_ = -1;
        advance_cursor();
    }

    // Move to the next instance slot in this sweep; skip returned instances
    // unless slot_mode keeps them playing the hint.
    void advance_cursor() {
        slot_play_ = false;
        for (int i = cursor_ + 1; i < k_; ++i) {
            const bool ret = inner_[static_cast<std::size_t>(i)].returned();
            if (!ret || slot_mode_) {
                cursor_ = i;
                slot_play_ = ret;
                return;
            }
        }
        sweep_done_ = true;
    }

    void commit() {
        std::vector<double> vals = returns_;
        const std::size_t m = vals.size();
        const std::size_t idx = (m + 1) / 2 - 1;  // lower median
        std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(idx),
                         vals.end());
        value_ = vals[idx];
        committed_ = true;
    }

    ActionVec h_act_;
    std::vector<NormEstimator> inner_;
    std::vector<double> returns_;
    int k_ = 1;
    int quorum_ = 1;
    int cursor_ = -1;
    bool slot_mode_ = false;
    bool slot_play_ = false;
    bool sweep_done_ = false;
    bool mid_update_ = false;
    bool committed_ = false;
    double value_ = 0.0;
};

}  // namespace ballbandit
