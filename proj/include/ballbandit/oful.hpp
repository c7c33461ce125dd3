#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ballbandit/policies.hpp"

namespace ballbandit {

// argmax over ||a|| <= 1 of <theta_hat, a> + beta ||a||_{V^-1}, via the dual
// form max{||theta_hat + u|| : u' V u <= beta^2}: eigendecompose V and
// root-find the multiplier of u(mu) = (mu V - I)^-1 theta_hat on
// (1/lam_min, inf). Ridge least squares keeps theta_hat inside the span of
// played actions, so the minimum-eigenvalue block carries exactly zero
// coefficients and the secular equation can have no root; that hard case is
// resolved by adding a v_min component sized to saturate the constraint.
Vec ball_optimistic_action(const Vec& theta_hat, const Eigen::MatrixXd& V, double beta);

struct OfulConfig {
    int dimension = 2;
    double delta_prob = 0.1;
    double ridge_lambda = 1.0;
    double s_bound = 1.0;
};

class OfulPolicy final : public Policy {
  public:
    explicit OfulPolicy(const OfulConfig& cfg);

    double beta(std::int64_t t) const;
    const Eigen::MatrixXd& gram() const { return V_; }

  protected:
    ActionVec do_next_action() override;
    void do_observe(double reward) override;

  private:
    OfulConfig cfg_;
    Eigen::MatrixXd V_;
    Vec b_;
    Vec last_action_;
    std::int64_t t_ = 0;
};

}  // namespace ballbandit
