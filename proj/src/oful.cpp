#include "ballbandit/oful.hpp"

#include <cmath>
#include <vector>

namespace ballbandit {

Vec ball_optimistic_action(const Vec& theta_hat, const Eigen::MatrixXd& V, double beta) {
    const Eigen::Index d = theta_hat.size();
    if (beta < 0.0) throw std::domain_error("ball_optimistic_action: beta must be >= 0");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("ball_optimistic_action: eigendecomposition failed");
    const Vec lam = es.eigenvalues();  // ascending
    const Eigen::MatrixXd& Q = es.eigenvectors();
    Vec w = Q.transpose() * theta_hat;
    const double lmin = lam[0];
    if (!(lmin > 0.0))
        throw std::domain_error("ball_optimistic_action: V must be positive definite");
    const double b2 = beta * beta;
    const double mu0 = 1.0 / lmin;
    const double w2 = w.squaredNorm();

    // Coefficients on the minimum-eigenvalue block that are pure rounding
    // noise (theta_hat lies in the span of played actions) are zeroed; the
    // hard case then saturates the constraint along v_min explicitly.
    std::vector<Eigen::Index> blk;
    double wblk2 = 0.0;
    for (Eigen::Index i = 0; i < d && lam[i] <= lmin * (1.0 + 1e-10); ++i) {
        blk.push_back(i);
        wblk2 += w[i] * w[i];
    }
    const bool blk_degenerate = wblk2 <= 1e-22 * std::max(1.0, w2);
    if (blk_degenerate)
        for (const auto i : blk) w[i] = 0.0;

    auto phi = [&](double mu) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (w[i] == 0.0) continue;
            const double den = mu * lam[i] - 1.0;
            s += lam[i] * w[i] * w[i] / (den * den);
        }
        return s;
    };

    Vec u = Vec::Zero(d);
    if (b2 == 0.0) {
        // no exploration bonus: pure exploitation
    } else if (blk_degenerate && phi(mu0) < b2) {
        const double phi0 = phi(mu0);
        for (Eigen::Index i = 0; i < d; ++i)
            if (w[i] != 0.0) u[i] = w[i] / (mu0 * lam[i] - 1.0);
        u[blk.front()] += std::sqrt(std::max(0.0, (b2 - phi0) / lmin));
    } else {
        double shi = mu0;
        while (phi(mu0 + shi) > b2) shi *= 4.0;
        double slo = 0.0;
        if (!blk_degenerate) {
            // phi explodes like wblk2/(lmin s^2) near s = 0
            slo = 0.01 * std::sqrt(wblk2 / (lmin * b2));
            while (slo > 0.0 && phi(mu0 + slo) < b2) slo *= 0.125;
        }
        for (int it = 0; it < 220; ++it) {
            const double mid = slo > 0.0 ? std::sqrt(slo * shi) : 0.5 * (slo + shi);
            if (phi(mu0 + mid) > b2)
                slo = mid;
            else
                shi = mid;
            if (shi - slo <= 1e-13 * shi) break;
        }
        const double mu = mu0 + shi;  // feasible side: ||u||_V <= beta
        for (Eigen::Index i = 0; i < d; ++i)
            if (w[i] != 0.0) u[i] = w[i] / (mu * lam[i] - 1.0);
    }

    Vec v = Q * (w + u);
    const double nv = v.norm();
    if (!(nv > 1e-300)) return Q.col(0);
    return v / nv;
}

OfulPolicy::OfulPolicy(const OfulConfig& cfg) : cfg_(cfg) {
    if (cfg_.dimension < 1) throw std::domain_error("OfulPolicy: dimension must be >= 1");
    if (!(cfg_.delta_prob > 0.0 && cfg_.delta_prob < 1.0))
        throw std::domain_error("OfulPolicy: delta must lie in (0,1)");
    if (!(cfg_.ridge_lambda > 0.0)) throw std::domain_error("OfulPolicy: lambda must be positive");
    V_ = cfg_.ridge_lambda * Eigen::MatrixXd::Identity(cfg_.dimension, cfg_.dimension);
    b_ = Vec::Zero(cfg_.dimension);
}

double OfulPolicy::beta(std::int64_t t) const {
    const double d = static_cast<double>(cfg_.dimension);
    return std::sqrt(cfg_.ridge_lambda) * cfg_.s_bound +
           std::sqrt(2.0 * std::log(1.0 / cfg_.delta_prob) +
                     d * std::log(1.0 + static_cast<double>(t) / (cfg_.ridge_lambda * d)));
}

ActionVec OfulPolicy::do_next_action() {
    const Vec theta_hat = V_.ldlt().solve(b_);
    last_action_ = ball_optimistic_action(theta_hat, V_, beta(t_));
    return ActionVec(last_action_);
}

void OfulPolicy::do_observe(double reward) {
    V_.selfadjointView<Eigen::Lower>().rankUpdate(last_action_, 1.0);
    V_ = V_.selfadjointView<Eigen::Lower>();
    b_ += reward * last_action_;
    ++t_;
}

}  // namespace ballbandit
