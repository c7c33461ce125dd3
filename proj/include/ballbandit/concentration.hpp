#pragma once

#include <cmath>

#include "ballbandit/errors.hpp"

namespace ballbandit {

// Confidence width of the estimator's mean difference after n updates:
//   b_n = sqrt(3 (1 + ||h||^2 + ||p||^2) ln(40 ln(2n)) / n).
// The sub-Gaussian factor uses 1 + ||h||^2 + ||p||^2 (the parameter of the
// centered difference sqrt(||h||^2+||p||^2) z_i - y_i), not the perturbation
// magnitude; see anytime_hoeffding_width for the delta-dependent variant.
inline double estimator_width(long long n, double h_norm_sq, double p_norm_sq) {
    if (n < 1) throw std::domain_error("estimator_width: n must be >= 1");
    const double nd = static_cast<double>(n);
    return std::sqrt(3.0 * (1.0 + h_norm_sq + p_norm_sq) * std::log(40.0 * std::log(2.0 * nd)) /
                     nd);
}

// Time-uniform Hoeffding width for the mean of n sigma-sub-Gaussian samples:
//   sigma * sqrt(3 ln(40 ln(2n) / delta) / n),
// valid for all n simultaneously with probability at least 1 - delta.
inline double anytime_hoeffding_width(long long n, double sigma, double delta) {
    if (n < 1) throw std::domain_error("anytime_hoeffding_width: n must be >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("anytime_hoeffding_width: delta must lie in (0,1)");
    const double nd = static_cast<double>(n);
    return sigma * std::sqrt(3.0 * std::log(40.0 * std::log(2.0 * nd) / delta) / nd);
}

struct ConfidenceInterval {
    double center = 0.0;
    double half_width = 0.0;

    bool contains(double x) const { return std::abs(x - center) < half_width; }
};

// Open intervals: exactly-touching intervals are disjoint.
inline bool intervals_disjoint(const ConfidenceInterval& a, const ConfidenceInterval& b) {
    return std::abs(a.center - b.center) >= a.half_width + b.half_width;
}

}  // namespace ballbandit
