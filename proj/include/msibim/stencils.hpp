#pragma once

#include <algorithm>
#include <cmath>

namespace msibim {

// Third-order WENO one-sided first derivatives (two-stencil form).
// u points to 5 consecutive samples centered on the evaluation point:
// u[-2], u[-1], u[0], u[1], u[2] with unit stride in the chosen axis.

inline constexpr double kWenoEps = 1e-6;

inline double weno3_minus(const double* u, double h) {
    double num = kWenoEps + (u[0] - 2.0 * u[-1] + u[-2]) * (u[0] - 2.0 * u[-1] + u[-2]);
    double den = kWenoEps + (u[1] - 2.0 * u[0] + u[-1]) * (u[1] - 2.0 * u[0] + u[-1]);
    double r = num / den;
    double w = 1.0 / (1.0 + 2.0 * r * r);
    return ((1.0 - w) * (u[1] - u[-1]) + w * (3.0 * u[0] - 4.0 * u[-1] + u[-2])) / (2.0 * h);
}

inline double weno3_plus(const double* u, double h) {
    double num = kWenoEps + (u[2] - 2.0 * u[1] + u[0]) * (u[2] - 2.0 * u[1] + u[0]);
    double den = kWenoEps + (u[1] - 2.0 * u[0] + u[-1]) * (u[1] - 2.0 * u[0] + u[-1]);
    double r = num / den;
    double w = 1.0 / (1.0 + 2.0 * r * r);
    return ((1.0 - w) * (u[1] - u[-1]) + w * (-u[2] + 4.0 * u[1] - 3.0 * u[0])) / (2.0 * h);
}

// Godunov numerical |grad u| for H = s * |grad u|, given one-sided
// derivatives dm/dp per axis and the propagation sign s.
inline double godunov_norm(const double* dm, const double* dp, int dim, double s) {
    double acc = 0.0;
    for (int a = 0; a < dim; ++a) {
        double lo, hi;
        if (s >= 0.0) {
            lo = std::max(dm[a], 0.0);
            hi = std::min(dp[a], 0.0);
        } else {
            lo = std::min(dm[a], 0.0);
            hi = std::max(dp[a], 0.0);
        }
        acc += std::max(lo * lo, hi * hi);
    }
    return std::sqrt(acc);
}

}  // namespace msibim
