#pragma once

/*
 * Numerical certification of the mountain-pass geometry of J_q around
 * u0 = 0, and the far endpoint u1 = k0 w_p.
 *
 * For |w|_{1,p} = 1 and r > 0,
 *     J_q(r w) - J_q(0) >= r F(r),
 * with, for q > p,
 *     F(r) = r^{p-1}/p - lambda c2 r^{q-1}/q - c1^{1/p} ||f||_{p'}
 * and for q < p the sign-flipped expression
 *     F(r) = -r^{p-1}/p + lambda c2 r^{q-1}/q + c1^{1/p} ||f||_{p'}.
 * Both branches share the stationary point
 *     r0 = (q(p-1) / (p(q-1)) / (lambda c2))^{1/(q-p)}.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "plap/eigen.hpp"
#include "plap/errors.hpp"
#include "plap/function_space.hpp"
#include "plap/functional.hpp"

namespace plap {

struct EmbeddingConstants {
    double c1 = 0.0;   // sup ||w||_p^p on the unit sphere of W_0^{1,p}
    double c2 = 0.0;   // sup ||w||_q^q on the same sphere
    bool converged = false;
    int iterations = 0;
};

/// Discrete best constants (lower bounds on the continuous ones) obtained by
/// minimizing R_p and R_q from the sine bump.
inline EmbeddingConstants estimate_embedding_constants(std::shared_ptr<const Mesh> mesh, double p, double q,
                                                       const QuotientOptions& opt = {})
{
    if (!(p > 1.0) || !(q >= 1.0)) throw InvalidArgument("embedding constants need p > 1 and q >= 1");
    const DiscreteFunction start = sine_bump(mesh);
    const QuotientResult rp = minimize_sobolev_quotient(start, p, p, opt);
    EmbeddingConstants c;
    c.c1 = 1.0 / rp.value;
    c.iterations = rp.iterations;
    c.converged = rp.converged;
    if (q == p) {
        c.c2 = c.c1;
        return c;
    }
    const QuotientResult rq = minimize_sobolev_quotient(start, p, q, opt);
    c.c2 = std::pow(rq.value, -q / p);
    c.iterations += rq.iterations;
    c.converged = c.converged && rq.converged;
    return c;
}

/// The rim function F of the certificate as a standalone scalar function.
struct RimFunction {
    Branch branch = Branch::Superlinear;
    double p = 2.0, q = 4.0, lambda = 1.0, c2 = 1.0;
    double forcing = 0.0;   // c1^{1/p} ||f||_{p'}

    double operator()(double r) const
    {
        const double a = std::pow(r, p - 1.0) / p;
        const double b = lambda * c2 * std::pow(r, q - 1.0) / q;
        return branch == Branch::Superlinear ? a - b - forcing : -a + b + forcing;
    }

    double stationary_point() const
    {
        return std::pow(q * (p - 1.0) / (p * (q - 1.0)) / (lambda * c2), 1.0 / (q - p));
    }

    RimFunction with_lambda(double l) const
    {
        RimFunction f = *this;
        f.lambda = l;
        return f;
    }
};

namespace detail {

/// Golden-section maximization of a function unimodal in log r.
inline std::pair<double, double> maximize_log_unimodal(const RimFunction& F, double log_lo, double log_hi)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = log_lo, b = log_hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = F(std::exp(x1)), f2 = F(std::exp(x2));
    for (int it = 0; it < 400 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = F(std::exp(x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = F(std::exp(x1));
        }
    }
    const double x = 0.5 * (a + b);
    return {std::exp(x), F(std::exp(x))};
}

/// Root of F in (lo, hi) given a sign change, by bisection.
template <class Fn>
double bisect_root(const Fn& F, double lo, double hi)
{
    double flo = F(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = F(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-16 * hi) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// Largest lambda for which max_r F(r) > 0, found by bisection on log lambda
/// with F maximized numerically (no closed form involved). +inf when every
/// lambda > 0 qualifies.
inline double numeric_lambda_threshold(const RimFunction& base)
{
    auto max_f = [&](double l) { return detail::maximize_log_unimodal(base.with_lambda(l), std::log(1e-30), std::log(1e30)).second; };
    const double big = 1e30;
    if (max_f(big) > 0.0) return std::numeric_limits<double>::infinity();
    double lo = 1.0;
    while (max_f(lo) <= 0.0) {
        lo *= 0.5;
        if (lo < 1e-300) return 0.0;
    }
    double hi = lo * 2.0;
    while (max_f(hi) > 0.0) hi *= 2.0;
    double a = std::log(lo), b = std::log(hi);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        if (max_f(std::exp(m)) > 0.0) a = m;
        else b = m;
    }
    return std::exp(0.5 * (a + b));
}

struct GeometryCert {
    Branch branch = Branch::Superlinear;
    double c1 = 0.0;
    double c2 = 0.0;
    double forcing_norm = 0.0;        // ||f||_{p'}
    double forcing_term = 0.0;        // c1^{1/p} ||f||_{p'}
    double r0 = 0.0;
    double f_at_r0 = 0.0;
    double f_at_zero = 0.0;
    double first_root = 0.0;          // lower end of {F > 0} (0 when F(0) >= 0)
    double second_root = 0.0;         // upper end of {F > 0}
    double r_zero = std::numeric_limits<double>::quiet_NaN(); // closed-form root, superlinear with f = 0
    // Admissible-lambda thresholds: the classical closed form, the closed form
    // obtained by solving F(r0) = 0, and the bisection value.
    double lambda1 = std::numeric_limits<double>::infinity();
    double lambda1_derived = std::numeric_limits<double>::infinity();
    double lambda1_numeric = std::numeric_limits<double>::infinity();
    double lambda2 = std::numeric_limits<double>::infinity();
    double lambda_prime = std::numeric_limits<double>::infinity();
    double c_prime = std::numeric_limits<double>::quiet_NaN();        // r0 F(r0), q > p
    double c_double_prime = std::numeric_limits<double>::quiet_NaN(); // r0 F(r0), q < p
    double c0 = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> f_samples;
    double k0 = std::numeric_limits<double>::quiet_NaN();
    std::string endpoint_regime;
    bool local_max_ok = false;
    bool sign_pattern_ok = false;
    bool geometry_ok = false;
    std::string failure;

    /// Threshold the certificate's actual pass/fail boundary corresponds to.
    double numeric_threshold() const { return branch == Branch::Superlinear ? lambda1_numeric : lambda2; }
};

inline constexpr int geometry_sample_count = 10000;

inline GeometryCert check_geometry(const ProblemParams& params, double c1, double c2)
{
    params.validate();
    if (!(c1 > 0.0) || !(c2 > 0.0) || !std::isfinite(c1) || !std::isfinite(c2))
        throw InvalidArgument("embedding constants c1, c2 must be positive and finite");

    const double p = params.p, q = params.q, lambda = params.lambda;
    GeometryCert cert;
    cert.branch = params.branch();
    cert.c1 = c1;
    cert.c2 = c2;
    cert.forcing_norm = params.has_forcing() ? norm_lq(params.f, conjugate_exponent(p)) : 0.0;
    cert.forcing_term = std::pow(c1, 1.0 / p) * cert.forcing_norm;

    const RimFunction F{cert.branch, p, q, lambda, c2, cert.forcing_term};
    cert.r0 = F.stationary_point();
    cert.f_at_r0 = F(cert.r0);
    cert.f_at_zero = F(0.0);
    const double level = cert.r0 * cert.f_at_r0;

    const double K = cert.forcing_term;
    if (cert.branch == Branch::Superlinear) {
        cert.c_prime = level;
        cert.c0 = level;
        if (K > 0.0) {
            cert.lambda1 = q * (p - 1.0) / (p * (q - 1.0)) * std::pow(p * (q - 1.0) / (q - p) * K, 1.0 / (1.0 - p));
            cert.lambda1_derived = q * (p - 1.0) / (p * (q - 1.0) * c2)
                                   * std::pow(p * (q - 1.0) * K / (q - p), (p - q) / (p - 1.0));
        }
        cert.lambda1_numeric = numeric_lambda_threshold(F);
        if (K == 0.0) cert.r_zero = std::pow(q / (p * lambda * c2), 1.0 / (q - p));
    } else {
        cert.c_double_prime = level;
        cert.c0 = level;
        cert.lambda2 = numeric_lambda_threshold(F);
    }
    cert.lambda_prime = std::min(cert.lambda1, cert.lambda2);

    // Bracket the positivity interval of F around r0.
    double hi = std::max(cert.r0, 1e-300);
    int guard = 0;
    while (F(hi) >= 0.0 && guard++ < 4000) hi *= 2.0;
    if (cert.f_at_r0 > 0.0) {
        cert.second_root = detail::bisect_root(F, cert.r0, hi);
        cert.first_root = cert.f_at_zero >= 0.0 ? 0.0 : detail::bisect_root(F, 0.0, cert.r0);
    }

    // Log-spaced samples over [1e-5, 2] * upper scale, plus r = 0.
    const double upper = 2.0 * std::max(cert.second_root, cert.r0);
    const double lo = 1e-5 * upper;
    cert.f_samples.reserve(geometry_sample_count + 1);
    cert.f_samples.emplace_back(0.0, cert.f_at_zero);
    const double step = std::log(upper / lo) / static_cast<double>(geometry_sample_count - 1);
    for (int k = 0; k < geometry_sample_count; ++k) {
        const double r = lo * std::exp(step * static_cast<double>(k));
        cert.f_samples.emplace_back(r, F(r));
    }

    const double delta = 1e-4 * cert.r0;
    cert.local_max_ok = F(cert.r0 - delta) <= cert.f_at_r0 && F(cert.r0 + delta) <= cert.f_at_r0;

    bool decreasing_tail = true;
    for (std::size_t k = 1; k < cert.f_samples.size(); ++k) {
        const auto& [r, v] = cert.f_samples[k];
        if (r > cert.second_root && cert.f_samples[k - 1].first > cert.second_root) {
            if (!(v < cert.f_samples[k - 1].second) || v >= 0.0) decreasing_tail = false;
        }
    }
    const bool origin_ok = cert.branch == Branch::Sublinear || K == 0.0 || cert.f_at_zero < 0.0;
    cert.sign_pattern_ok = origin_ok && cert.f_at_r0 > 0.0 && decreasing_tail;

    cert.geometry_ok = cert.r0 > 0.0 && cert.sign_pattern_ok && cert.local_max_ok;
    if (!cert.geometry_ok) {
        if (!(cert.f_at_r0 > 0.0)) cert.failure = "F(r0) <= 0: lambda exceeds the admissible threshold";
        else if (!origin_ok) cert.failure = "F(0) >= 0 with nonzero forcing";
        else if (!decreasing_tail) cert.failure = "F not decreasing beyond its second root";
        else cert.failure = "r0 is not a local maximizer of F";
    }
    return cert;
}

struct Endpoints {
    DiscreteFunction u0;
    DiscreteFunction u1;
    double k0 = 0.0;
    std::string regime;
    bool found = false;
};

/// u0 = 0 and u1 = k0 w_p with J_q(u1) < 0 and k0 > r0; k0 is found by
/// doubling from max(2 r0, 1), first along +w_p and then along -w_p.
inline Endpoints choose_endpoints(const ProblemParams& params, const EigenPair& eig, GeometryCert& cert,
                                  int max_doublings = 60)
{
    params.validate();
    Endpoints ends;
    ends.u0 = DiscreteFunction::zero(params.mesh_ptr());
    const double start = std::max(2.0 * cert.r0, 1.0);
    for (double sgn : {1.0, -1.0}) {
        double k = start;
        for (int i = 0; i <= max_doublings; ++i) {
            const DiscreteFunction cand = (sgn * k) * eig.w_p;
            if (energy_jq(cand, params) < 0.0 && k > cert.r0) {
                ends.u1 = cand;
                ends.k0 = k;
                ends.regime = sgn > 0 ? "doubling along +w_p" : "doubling along -w_p";
                ends.found = true;
                break;
            }
            k *= 2.0;
        }
        if (ends.found) break;
    }
    if (ends.found) {
        cert.k0 = ends.k0;
        cert.endpoint_regime = ends.regime;
    } else {
        cert.endpoint_regime = "doubling cap exceeded";
        cert.geometry_ok = false;
        cert.failure = "no k with J_q(k w_p) < 0 within the doubling cap";
    }
    if (ends.found && !(ends.k0 > cert.r0)) cert.geometry_ok = false;
    return ends;
}

} // namespace plap
