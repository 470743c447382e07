#pragma once

/*
 * First eigenpair of the Dirichlet p-Laplacian,
 *     -div(|grad w|^{p-2} grad w) = lambda_p |w|^{p-2} w,
 * as the minimizer of the Rayleigh quotient |w|_{1,p}^p / ||w||_p^p.
 *
 * The same machinery minimizes the generalized quotient
 *     R_r(w) = |w|_{1,p}^p / ||w||_r^p,
 * whose minimum gives the best embedding constant
 *     sup { ||w||_r^r : |w|_{1,p} = 1 } = (min R_r)^{-r/p}.
 */

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "plap/errors.hpp"
#include "plap/function_space.hpp"
#include "plap/functional.hpp"
#include "plap/line_search.hpp"
#include "plap/metric.hpp"

namespace plap {

struct QuotientOptions {
    double tol = 1e-10;              // stop when the quotient changes by less than this
    double residual_factor = 10.0;   // ...and the stationarity residual is below factor * tol
    int max_iter = 10000;
    LineSearchOptions line_search{};
};

struct QuotientResult {
    double value = 0.0;              // min R_r found
    DiscreteFunction w;              // minimizer, |w|_{1,p} = 1
    std::vector<double> history;     // quotient after every accepted step (entry 0 = start)
    double stationarity = 0.0;       // max_i |<|grad w|^{p-2} grad w, grad phi_i> - (N/D) <|w|^{r-2} w, phi_i>|
    int iterations = 0;
    bool converged = false;
};

struct EigenPair {
    double lambda_p = 0.0;
    DiscreteFunction w_p;
    std::vector<double> history;
    double residual = 0.0;           // max_i |B_eig[w_p, phi_i]| with lambda = lambda_p, q = p
    int iterations = 0;
    bool converged = false;
};

/// Positive field shaped like the first Dirichlet Laplacian eigenfunction.
inline DiscreteFunction sine_bump(std::shared_ptr<const Mesh> mesh)
{
    const DomainSpec dom = mesh->domain();
    const int dim = mesh->dimension();
    auto f = [dom, dim](const Point& x) {
        double v = 1.0;
        for (int d = 0; d < dim; ++d) {
            const double a = dom.bounds[d][0], b = dom.bounds[d][1];
            v *= std::sin(std::numbers::pi * (x[d] - a) / (b - a));
        }
        return std::max(v, 0.0);
    };
    return DiscreteFunction::interpolate(std::move(mesh), f).with_boundary_zeroed();
}

inline double rayleigh(const DiscreteFunction& w, double p)
{
    if (!(p > 1.0)) throw InvalidArgument("Rayleigh quotient needs p > 1");
    const double d = integral_abs_pow(w, p);
    if (w.is_zero() || d == 0.0) throw InvalidArgument("Rayleigh quotient of the zero field");
    return assembly::dirichlet_integral(w, p) / d;
}

namespace detail {

struct QuotientParts {
    double n = 0.0;
    double d = 0.0;
    double value = 0.0;
};

inline QuotientParts quotient_parts(const DiscreteFunction& w, double p, double r)
{
    QuotientParts q;
    q.n = assembly::dirichlet_integral(w, p);
    q.d = integral_abs_pow(w, r);
    q.value = q.d > 0.0 ? q.n / std::pow(q.d, p / r) : std::numeric_limits<double>::infinity();
    return q;
}

/// dirichlet rows minus (N/D) power rows: proportional to grad R_r.
inline Vector quotient_stationarity(const DiscreteFunction& w, double p, double r, const QuotientParts& parts, double eps)
{
    return assembly::dirichlet_residual(w, p, eps) - (parts.n / parts.d) * assembly::power_residual(w, r);
}

} // namespace detail

/// Projected (renormalized) Sobolev-gradient descent on R_r from `init`.
inline QuotientResult minimize_sobolev_quotient(const DiscreteFunction& init, double p, double r,
                                                const QuotientOptions& opt = {})
{
    if (!(p > 1.0)) throw InvalidArgument("quotient minimization needs p > 1");
    if (!(r >= 1.0)) throw InvalidArgument("quotient minimization needs r >= 1");
    if (!(opt.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    DiscreteFunction w = init.with_boundary_zeroed();
    if (w.is_zero()) throw InvalidArgument("quotient minimization needs a nonzero initial field");

    const double eps = p < 2.0 ? 1e-10 : 0.0;
    SobolevMetric metric(w.mesh_ptr());
    auto normalize = [p](DiscreteFunction& v) { v *= 1.0 / seminorm_w1p(v, p); };
    normalize(w);

    QuotientResult res;
    auto parts = detail::quotient_parts(w, p, r);
    res.history.push_back(parts.value);

    for (int it = 0; it < opt.max_iter; ++it) {
        const Vector s = detail::quotient_stationarity(w, p, r, parts, eps);
        res.stationarity = residual_max(s);
        const double scale = p / std::pow(parts.d, p / r);  // grad R = scale * s
        const Vector weights = metric.weights_for(w, p);
        const Vector dir = -metric.solve(s, weights);
        const double slope = scale * s.dot(dir);
        if (!(slope < 0.0)) {
            res.converged = res.stationarity < opt.residual_factor * opt.tol;
            break;
        }

        const DiscreteFunction dfun(w.mesh_ptr(), dir);
        auto phi = [&](double t) { return detail::quotient_parts(w.axpy(t, dfun), p, r).value; };
        auto dphi = [&](double t) {
            const DiscreteFunction wt = w.axpy(t, dfun);
            const auto pt = detail::quotient_parts(wt, p, r);
            const Vector st = detail::quotient_stationarity(wt, p, r, pt, eps);
            return p / std::pow(pt.d, p / r) * st.dot(dir);
        };
        const LineSearchResult ls = armijo_backtracking(phi, dphi, parts.value, slope, opt.line_search);
        if (!ls.accepted) {
            res.converged = res.stationarity < opt.residual_factor * opt.tol;
            break;
        }
        w = w.axpy(ls.step, dfun);
        normalize(w);
        const double previous = parts.value;
        parts = detail::quotient_parts(w, p, r);
        res.history.push_back(parts.value);
        res.iterations = it + 1;

        if (std::abs(previous - parts.value) < opt.tol) {
            const Vector s_new = detail::quotient_stationarity(w, p, r, parts, eps);
            res.stationarity = residual_max(s_new);
            if (res.stationarity < opt.residual_factor * opt.tol) {
                res.converged = true;
                break;
            }
        }
    }
    res.value = parts.value;
    res.w = std::move(w);
    return res;
}

/// First eigenpair on `mesh`, started from the sine bump.
inline EigenPair first_eigenpair(std::shared_ptr<const Mesh> mesh, double p, double tol = 1e-10, int max_iter = 10000)
{
    if (!(p > 1.0)) throw InvalidArgument("eigenproblem needs p > 1");
    QuotientOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    QuotientResult q = minimize_sobolev_quotient(sine_bump(mesh), p, p, opt);

    EigenPair e;
    e.lambda_p = q.value;
    e.w_p = std::move(q.w);
    e.history = std::move(q.history);
    e.iterations = q.iterations;
    e.converged = q.converged;
    const assembly::FormCoefficients c{p, p, e.lambda_p, p < 2.0 ? 1e-10 : 0.0};
    e.residual = residual_max(assembly::b_form_rows(e.w_p, c));
    return e;
}

} // namespace plap
