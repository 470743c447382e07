#pragma once

#include <cmath>
#include <functional>

namespace plap {

struct LineSearchOptions {
    double initial_step = 1.0;
    double shrink = 0.5;
    double slope_fraction = 1e-4;
    int max_backtracks = 60;
    // Differences below noise_rel * (1 + |phi(0)|) are treated as roundoff.
    double noise_rel = 1e-13;
};

struct LineSearchResult {
    double step = 0.0;
    double value = 0.0;
    int evaluations = 0;
    bool accepted = false;
    bool approximate = false; // accepted through the derivative-based test
};

/// Backtracking Armijo search on phi(t) = f(x + t d) with phi'(0) = slope < 0.
///
/// When phi(t) - phi(0) is lost in roundoff the sufficient-decrease test is
/// replaced by the approximate Armijo condition of Hager and Zhang,
/// phi'(t) <= (2 c - 1) phi'(0), which follows from the trapezoid estimate of
/// phi(t) - phi(0) and only needs derivatives. Pass an empty `dphi` to disable it.
inline LineSearchResult armijo_backtracking(const std::function<double(double)>& phi,
                                            const std::function<double(double)>& dphi,
                                            double phi0, double slope, const LineSearchOptions& opt = {})
{
    LineSearchResult res;
    if (!(slope < 0.0)) return res;
    const double noise = opt.noise_rel * (1.0 + std::abs(phi0));
    double t = opt.initial_step;
    for (int it = 0; it <= opt.max_backtracks; ++it) {
        const double v = phi(t);
        ++res.evaluations;
        if (std::isfinite(v)) {
            if (v <= phi0 + opt.slope_fraction * t * slope) {
                res = {t, v, res.evaluations, true, false};
                return res;
            }
            if (dphi && std::abs(v - phi0) <= noise) {
                const double d = dphi(t);
                if (d <= (2.0 * opt.slope_fraction - 1.0) * slope) {
                    res = {t, v, res.evaluations, true, true};
                    return res;
                }
            }
        }
        t *= opt.shrink;
    }
    return res;
}

} // namespace plap
