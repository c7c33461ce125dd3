#include "ballbandit/policies.hpp"

#include <cmath>

namespace ballbandit {

namespace {
ActionVec unit_action(const Vec& v) { return ActionVec(v); }
}  // namespace

// ---------------------------------------------------------------------------
// ParetoBanditPolicy

ParetoBanditPolicy::ParetoBanditPolicy(ParetoBanditConfig cfg, PolicyFactory fallback_factory,
                                       RandomSource rng)
    : cfg_(std::move(cfg)), fallback_factory_(std::move(fallback_factory)), rng_(rng) {
    d_ = static_cast<int>(cfg_.h.dim());
    if (d_ < 2) throw std::domain_error("ParetoBanditPolicy: dimension must be >= 2");
    if (std::abs(cfg_.h.norm() - 1.0) > 1e-9)
        throw std::domain_error("ParetoBanditPolicy: hint must be unit norm");
    if (cfg_.horizon < 1) throw std::domain_error("ParetoBanditPolicy: horizon must be >= 1");
    if (!fallback_factory_) throw std::domain_error("ParetoBanditPolicy: missing fallback factory");
    log_t_ = std::log(static_cast<double>(cfg_.horizon));
    c0_ = std::make_unique<HpNormEstimator>(Vec(Vec::Zero(d_)), 1.0, cfg_.delta_prob / 4.0,
                                            rng_.child(1), cfg_.hp_k_override);
}

ActionVec ParetoBanditPolicy::do_next_action() {
    switch (phase_) {
        case 1:
            pending_route_ = Route::kC0;
            return c0_->pending_action();
        case 2: {
            const int s = sweep_list_[sweep_pos_];
            pending_sign_ = s;
            auto& hp = *sign_hp_[s];
            if (hp.committed()) {
                pending_route_ = Route::kSignSlot;
                pending_is_hint_ = true;
                return unit_action(sign_h_[s]);
            }
            pending_route_ = Route::kSignHp;
            pending_is_hint_ = hp.pending_is_hint_play();
            return hp.pending_action();
        }
        default:
            pending_route_ = Route::kPhase3;
            return switch_->next_action();
    }
}

void ParetoBanditPolicy::do_observe(double reward) {
    switch (pending_route_) {
        case Route::kC0: {
            auto res = c0_->absorb(reward);
            if (res) start_phase2(*res);
            return;
        }
        case Route::kSignHp: {
            const int s = pending_sign_;
            if (pending_is_hint_) {
                ysum_[s] += reward;
                ++ycount_[s];
            }
            auto& hp = *sign_hp_[s];
            hp.absorb(reward);
            if (hp.committed() || !hp.update_in_progress()) sign_update_done();
            return;
        }
        case Route::kSignSlot: {
            ysum_[pending_sign_] += reward;
            ++ycount_[pending_sign_];
            sign_update_done();
            return;
        }
        case Route::kPhase3:
            switch_->observe(reward);
            return;
    }
}

void ParetoBanditPolicy::start_phase2(double r) {
    r_ = r;
    pert_scale_ = 1.0 / (std::sqrt(r_) * std::pow(static_cast<double>(cfg_.horizon), 0.25));
    sign_h_[0] = cfg_.h.vec();
    sign_h_[1] = -cfg_.h.vec();
    for (int s = 0; s < 2; ++s) {
        sign_hp_[s] = std::make_unique<HpNormEstimator>(
            sign_h_[s], pert_scale_, cfg_.delta_prob / 4.0, rng_.child(2 + s),
            cfg_.hp_k_override);
        sign_hp_[s]->set_returned_slots_play_hint(true);
    }
    phase_ = 2;
    PhaseEvent e;
    e.phase = 2;
    e.r = r_;
    e.label = "phase1_done";
    emit(std::move(e));
    begin_sweep();
}

void ParetoBanditPolicy::begin_sweep() {
    sweep_list_.clear();
    for (int s = 0; s < 2; ++s)
        if (active_[s]) sweep_list_.push_back(s);
    sweep_pos_ = 0;
}

void ParetoBanditPolicy::sign_update_done() {
    ++sweep_pos_;
    if (sweep_pos_ >= sweep_list_.size()) sweep_boundary();
}

void ParetoBanditPolicy::sweep_boundary() {
    if (active_[0] && active_[1] && ycount_[0] > 0 && ycount_[1] > 0) {
        const ConfidenceInterval y0{ysum_[0] / static_cast<double>(ycount_[0]),
                                    anytime_hoeffding_width(ycount_[0], 1.0, cfg_.delta_prob)};
        const ConfidenceInterval y1{ysum_[1] / static_cast<double>(ycount_[1]),
                                    anytime_hoeffding_width(ycount_[1], 1.0, cfg_.delta_prob)};
        if (intervals_disjoint(y0, y1)) {
            const int worse = y0.center < y1.center ? 0 : 1;
            active_[worse] = false;
            PhaseEvent e;
            e.phase = 2;
            e.r = r_;
            e.eliminated_sign = worse == 0 ? +1 : -1;
            e.label = "sign_eliminated";
            emit(std::move(e));
        }
    }
    const double exit_thresh = 10.0 * cfg_.worst_case_scale * static_cast<double>(d_) * log_t_ /
                               std::sqrt(static_cast<double>(cfg_.horizon));
    for (int s = 0; s < 2; ++s) {
        if (active_[s] && sign_hp_[s]->committed()) {
            const double rp = sign_hp_[s]->value();
            if (0.0012 * rp * rp / r_ >= exit_thresh) {
                enter_phase3(rp);
                return;
            }
        }
    }
    if (active_[0] != active_[1]) {
        const int s = active_[0] ? 0 : 1;
        if (sign_hp_[s]->committed()) {
            enter_phase3(sign_hp_[s]->value());
            return;
        }
    }
    begin_sweep();
}

void ParetoBanditPolicy::enter_phase3(double r_perp) {
    r_perp_ = r_perp;
    std::vector<int> act;
    for (int s = 0; s < 2; ++s)
        if (active_[s]) act.push_back(s);
    const int chosen = act[rng_.uniform_index(act.size())];
    const double r_hat = 0.0012 * r_perp_ * r_perp_ / r_;
    std::int64_t t_rem = cfg_.horizon - pulls();
    if (t_rem < 0) t_rem = 0;
    const double r_lb = cfg_.worst_case_scale * static_cast<double>(d_) * log_t_ *
                        std::sqrt(static_cast<double>(cfg_.horizon));
    switch_ = std::make_unique<SwitchPolicy>(
        SwitchConfig{unit_action(sign_h_[chosen]), r_hat, t_rem, r_lb}, fallback_factory_());
    phase_ = 3;
    PhaseEvent e;
    e.phase = 3;
    e.r = r_;
    e.r_perp = r_perp_;
    e.label = switch_->hint_branch() ? "switch_hint" : "switch_fallback";
    emit(std::move(e));
}

// ---------------------------------------------------------------------------
// FrontierBanditPolicy

FrontierBanditPolicy::FrontierBanditPolicy(FrontierConfig cfg, PolicyFactory fallback_factory,
                                           RandomSource rng)
    : cfg_(std::move(cfg)), fallback_factory_(std::move(fallback_factory)), rng_(rng) {
    d_ = static_cast<int>(cfg_.h.dim());
    if (d_ < 2) throw std::domain_error("FrontierBanditPolicy: dimension must be >= 2");
    if (std::abs(cfg_.h.norm() - 1.0) > 1e-9)
        throw std::domain_error("FrontierBanditPolicy: hint must be unit norm");
    if (cfg_.horizon < 1) throw std::domain_error("FrontierBanditPolicy: horizon must be >= 1");
    if (!(cfg_.target_hint_regret > 0.0))
        throw std::domain_error("FrontierBanditPolicy: G must be positive");
    if (cfg_.target_hint_regret > std::sqrt(static_cast<double>(cfg_.horizon)))
        throw std::domain_error("FrontierBanditPolicy: G must not exceed sqrt(T)");
    if (!(cfg_.c0 > cfg_.c1)) throw std::domain_error("FrontierBanditPolicy: c0 > c1 required");
    if (!fallback_factory_)
        throw std::domain_error("FrontierBanditPolicy: missing fallback factory");
    log_t_ = std::log(static_cast<double>(cfg_.horizon));
    c0_ = std::make_unique<HpNormEstimator>(Vec(Vec::Zero(d_)), 1.0, cfg_.delta_prob / 4.0,
                                            rng_.child(1), cfg_.hp_k_override);
}

ActionVec FrontierBanditPolicy::do_next_action() {
    switch (phase_) {
        case 1:
            pending_route_ = Route::kC0;
            return c0_->pending_action();
        case 2: {
            if (cur_arm_ < 0) pick_arm();
            auto& hp = *sign_hp_[cur_arm_];
            if (hp.committed()) {
                pending_route_ = Route::kSignSlot;
                pending_is_hint_ = true;
                return unit_action(sign_h_[cur_arm_]);
            }
            pending_route_ = Route::kSignHp;
            pending_is_hint_ = hp.pending_is_hint_play();
            return hp.pending_action();
        }
        default:
            pending_route_ = Route::kPhase3;
            return switch_->next_action();
    }
}

void FrontierBanditPolicy::do_observe(double reward) {
    switch (pending_route_) {
        case Route::kC0: {
            auto res = c0_->absorb(reward);
            if (res) start_phase2(*res);
            return;
        }
        case Route::kSignHp: {
            if (pending_is_hint_) {
                upd_ysum_ += reward;
                ++upd_ycount_;
            }
            auto& hp = *sign_hp_[cur_arm_];
            hp.absorb(reward);
            if (hp.committed() || !hp.update_in_progress()) arm_update_done();
            return;
        }
        case Route::kSignSlot: {
            upd_ysum_ += reward;
            ++upd_ycount_;
            arm_update_done();
            return;
        }
        case Route::kPhase3:
            switch_->observe(reward);
            return;
    }
}

void FrontierBanditPolicy::start_phase2(double r) {
    r_ = r;
    pert_scale_ =
        std::sqrt(cfg_.target_hint_regret / (r_ * static_cast<double>(cfg_.horizon)));
    sign_h_[0] = cfg_.h.vec();
    sign_h_[1] = -cfg_.h.vec();
    for (int s = 0; s < 2; ++s) {
        sign_hp_[s] = std::make_unique<HpNormEstimator>(
            sign_h_[s], pert_scale_, cfg_.delta_prob / 4.0, rng_.child(2 + s),
            cfg_.hp_k_override);
        sign_hp_[s]->set_returned_slots_play_hint(true);
    }
    mab_ = std::make_unique<HintFavoringTwoArmMab>(cfg_.target_hint_regret, cfg_.delta_prob);
    phase_ = 2;
    cur_arm_ = -1;
    PhaseEvent e;
    e.phase = 2;
    e.r = r_;
    e.label = "phase1_done";
    emit(std::move(e));
}

void FrontierBanditPolicy::pick_arm() {
    cur_arm_ = mab_->next_arm();
    upd_ysum_ = 0.0;
    upd_ycount_ = 0;
}

void FrontierBanditPolicy::arm_update_done() {
    const double ymean = upd_ycount_ ? upd_ysum_ / static_cast<double>(upd_ycount_) : 0.0;
    const bool was_elim0 = mab_->eliminated(0), was_elim1 = mab_->eliminated(1);
    mab_->record(cur_arm_, ymean);
    if (!was_elim0 && mab_->eliminated(0)) {
        PhaseEvent e;
        e.phase = 2;
        e.r = r_;
        e.eliminated_sign = +1;
        e.label = "sign_eliminated";
        emit(std::move(e));
    }
    if (!was_elim1 && mab_->eliminated(1)) {
        PhaseEvent e;
        e.phase = 2;
        e.r = r_;
        e.eliminated_sign = -1;
        e.label = "sign_eliminated";
        emit(std::move(e));
    }
    const double exit_thresh =
        cfg_.c0 * static_cast<double>(d_) * log_t_ / cfg_.target_hint_regret;
    for (int s = 0; s < 2; ++s) {
        if (!mab_->eliminated(s) && sign_hp_[s]->committed()) {
            const double rp = sign_hp_[s]->value();
            if (rp * rp / r_ >= exit_thresh) {
                enter_phase3(rp);
                return;
            }
        }
    }
    if (mab_->eliminated(0) != mab_->eliminated(1)) {
        const int s = mab_->eliminated(0) ? 1 : 0;
        if (sign_hp_[s]->committed()) {
            enter_phase3(sign_hp_[s]->value());
            return;
        }
    }
    cur_arm_ = -1;
}

void FrontierBanditPolicy::enter_phase3(double r_perp) {
    r_perp_ = r_perp;
    std::vector<int> act;
    for (int s = 0; s < 2; ++s)
        if (!mab_->eliminated(s)) act.push_back(s);
    const int chosen = act[rng_.uniform_index(act.size())];
    const double r_hat = r_perp_ * r_perp_ / r_;
    std::int64_t t_rem = cfg_.horizon - pulls();
    if (t_rem < 0) t_rem = 0;
    const double r_lb = cfg_.c1 * static_cast<double>(d_) * log_t_ *
                        static_cast<double>(cfg_.horizon) / cfg_.target_hint_regret;
    switch_ = std::make_unique<SwitchPolicy>(
        SwitchConfig{unit_action(sign_h_[chosen]), r_hat, t_rem, r_lb}, fallback_factory_());
    phase_ = 3;
    PhaseEvent e;
    e.phase = 3;
    e.r = r_;
    e.r_perp = r_perp_;
    e.label = switch_->hint_branch() ? "switch_hint" : "switch_fallback";
    emit(std::move(e));
}

// ---------------------------------------------------------------------------
// MultiHintBanditPolicy

MultiHintBanditPolicy::MultiHintBanditPolicy(MultiHintConfig cfg, PolicyFactory fallback_factory,
                                             RandomSource rng)
    : cfg_(std::move(cfg)), fallback_factory_(std::move(fallback_factory)), rng_(rng) {
    m_ = static_cast<int>(cfg_.hints.size());
    if (m_ < 1) throw std::domain_error("MultiHintBanditPolicy: at least one hint required");
    d_ = static_cast<int>(cfg_.hints.front().size());
    if (d_ < 2) throw std::domain_error("MultiHintBanditPolicy: dimension must be >= 2");
    if (cfg_.horizon < 1) throw std::domain_error("MultiHintBanditPolicy: horizon must be >= 1");
    for (const auto& h : cfg_.hints) {
        if (h.size() != d_) throw std::domain_error("MultiHintBanditPolicy: mixed dimensions");
        if (std::abs(h.norm() - 1.0) > 1e-9)
            throw std::domain_error("MultiHintBanditPolicy: hints must be unit norm");
    }
    // The +-h pairs are built below; duplicate or antipodal inputs would break
    // the negation closure by duplicating instances.
    for (int i = 0; i < m_; ++i)
        for (int j = i + 1; j < m_; ++j)
            if (std::abs(cfg_.hints[static_cast<std::size_t>(i)].dot(
                    cfg_.hints[static_cast<std::size_t>(j)])) > 1.0 - 1e-9)
                throw std::domain_error(
                    "MultiHintBanditPolicy: duplicate or antipodal hints break negation closure");
    if (!fallback_factory_)
        throw std::domain_error("MultiHintBanditPolicy: missing fallback factory");
    b_ratio_ = cfg_.exploration_ratio > 0
                   ? cfg_.exploration_ratio
                   : static_cast<int>(std::ceil(std::cbrt(static_cast<double>(m_))));
    iter_cap_ = std::max<std::int64_t>(
        1, cfg_.horizon / (static_cast<std::int64_t>(m_) * static_cast<std::int64_t>(b_ratio_)));
    log_t_ = std::log(static_cast<double>(cfg_.horizon));
    c0_ = std::make_unique<HpNormEstimator>(Vec(Vec::Zero(d_)), 1.0, cfg_.delta_prob / 4.0,
                                            rng_.child(1), cfg_.hp_k_override);
}

int MultiHintBanditPolicy::current_phase() const {
    if (committed_policy_) return 2 + committed_policy_->current_phase();
    return phase_;
}

int MultiHintBanditPolicy::active_instances() const {
    int n = 0;
    for (bool a : active_) n += a ? 1 : 0;
    return n;
}

ActionVec MultiHintBanditPolicy::do_next_action() {
    if (committed_policy_) {
        pending_route_ = Route::kCommitted;
        return committed_policy_->next_action();
    }
    if (phase_ == 1) {
        pending_route_ = Route::kC0;
        return c0_->pending_action();
    }
    const int i = sweep_list_[sweep_pos_];
    pending_inst_ = i;
    auto& hp = *insts_[static_cast<std::size_t>(i)];
    if (hp.committed()) {
        pending_route_ = Route::kInstSlot;
        pending_is_hint_ = true;
        return unit_action(inst_h_[static_cast<std::size_t>(i)]);
    }
    pending_route_ = Route::kInstHp;
    pending_is_hint_ = hp.pending_is_hint_play();
    return hp.pending_action();
}

void MultiHintBanditPolicy::do_observe(double reward) {
    switch (pending_route_) {
        case Route::kC0: {
            auto res = c0_->absorb(reward);
            if (res) start_tournament(*res);
            return;
        }
        case Route::kInstHp: {
            const auto i = static_cast<std::size_t>(pending_inst_);
            if (pending_is_hint_) {
                ysum_[i] += reward;
                ++ycount_[i];
            }
            auto& hp = *insts_[i];
            hp.absorb(reward);
            if (hp.committed() || !hp.update_in_progress()) inst_update_done();
            return;
        }
        case Route::kInstSlot: {
            const auto i = static_cast<std::size_t>(pending_inst_);
            ysum_[i] += reward;
            ++ycount_[i];
            inst_update_done();
            return;
        }
        case Route::kCommitted:
            committed_policy_->observe(reward);
            return;
    }
}

void MultiHintBanditPolicy::start_tournament(double r) {
    r_ = r;
    pert_scale_ = std::sqrt(static_cast<double>(m_)) /
                  std::pow(static_cast<double>(cfg_.horizon), 0.25);
    const double inner_delta = cfg_.delta_prob / (4.0 * static_cast<double>(m_));
    const std::size_t n_inst = static_cast<std::size_t>(2 * m_);
    inst_h_.reserve(n_inst);
    insts_.reserve(n_inst);
    for (int i = 0; i < m_; ++i) {
        for (int sgn = 0; sgn < 2; ++sgn) {
            Vec h = sgn == 0 ? cfg_.hints[static_cast<std::size_t>(i)]
                             : Vec(-cfg_.hints[static_cast<std::size_t>(i)]);
            inst_h_.push_back(h);
            auto hp = std::make_unique<HpNormEstimator>(
                h, pert_scale_, inner_delta,
                rng_.child(10 + static_cast<std::uint64_t>(inst_h_.size())),
                cfg_.hp_k_override);
            hp->set_returned_slots_play_hint(true);
            insts_.push_back(std::move(hp));
        }
    }
    active_.assign(n_inst, true);
    ysum_.assign(n_inst, 0.0);
    ycount_.assign(n_inst, 0);
    phase_ = 2;
    PhaseEvent e;
    e.phase = 2;
    e.r = r_;
    e.label = "tournament_start";
    emit(std::move(e));
    sweep_list_.clear();
    for (std::size_t i = 0; i < n_inst; ++i) sweep_list_.push_back(static_cast<int>(i));
    sweep_pos_ = 0;
}

void MultiHintBanditPolicy::inst_update_done() {
    ++sweep_pos_;
    if (sweep_pos_ >= sweep_list_.size()) sweep_boundary();
}

void MultiHintBanditPolicy::sweep_boundary() {
    ++iter_;
    const double ci_delta = cfg_.delta_prob / static_cast<double>(m_);
    bool changed = true;
    while (changed && active_instances() > 1) {
        changed = false;
        for (std::size_t i = 0; i < active_.size() && !changed; ++i) {
            if (!active_[i] || ycount_[i] == 0) continue;
            const ConfidenceInterval yi{ysum_[i] / static_cast<double>(ycount_[i]),
                                        anytime_hoeffding_width(ycount_[i], 1.0, ci_delta)};
            for (std::size_t j = 0; j < active_.size(); ++j) {
                if (j == i || !active_[j] || ycount_[j] == 0) continue;
                const ConfidenceInterval yj{ysum_[j] / static_cast<double>(ycount_[j]),
                                            anytime_hoeffding_width(ycount_[j], 1.0, ci_delta)};
                if (intervals_disjoint(yi, yj) && yi.center < yj.center) {
                    active_[i] = false;
                    changed = true;
                    PhaseEvent e;
                    e.phase = 2;
                    e.r = r_;
                    e.label = "hint_eliminated";
                    emit(std::move(e));
                    break;
                }
            }
        }
    }
    const double removal_thresh = cfg_.c0 * cfg_.worst_case_scale * static_cast<double>(d_) *
                                  log_t_ / std::sqrt(static_cast<double>(cfg_.horizon));
    for (std::size_t i = 0; i < active_.size() && active_instances() > 1; ++i) {
        if (!active_[i] || !insts_[i]->committed()) continue;
        const double rp = insts_[i]->value();
        if (rp * rp / r_ >= removal_thresh) {
            active_[i] = false;
            PhaseEvent e;
            e.phase = 2;
            e.r = r_;
            e.r_perp = rp;
            e.label = "hint_removed_by_norm";
            emit(std::move(e));
        }
    }
    if (iter_ >= iter_cap_ || active_instances() == 1) {
        commit();
        return;
    }
    sweep_list_.clear();
    for (std::size_t i = 0; i < active_.size(); ++i)
        if (active_[i]) sweep_list_.push_back(static_cast<int>(i));
    sweep_pos_ = 0;
}

void MultiHintBanditPolicy::commit() {
    std::vector<int> act;
    for (std::size_t i = 0; i < active_.size(); ++i)
        if (active_[i]) act.push_back(static_cast<int>(i));
    const int chosen = act[rng_.uniform_index(act.size())];
    committed_hint_ = inst_h_[static_cast<std::size_t>(chosen)];
    ParetoBanditConfig pc;
    pc.h = unit_action(committed_hint_);
    pc.horizon = cfg_.horizon;
    pc.delta_prob = cfg_.delta_prob;
    pc.worst_case_scale = cfg_.worst_case_scale;
    pc.hp_k_override = cfg_.hp_k_override;
    committed_policy_ =
        std::make_unique<ParetoBanditPolicy>(std::move(pc), fallback_factory_, rng_.child(999));
    PhaseEvent e;
    e.phase = 3;
    e.r = r_;
    e.label = "tournament_committed";
    emit(std::move(e));
}

}  // namespace ballbandit
