#pragma once

/*
 * Numerical mountain pass for J_q.
 *
 * The discrete path Gamma_0 = u0, ..., Gamma_m = u1 is deformed by repeatedly
 * moving its highest interior point downhill. Steps are taken in the Sobolev
 * metric P and projected P-orthogonally to the local path tangent, so the
 * point slides across the ridge instead of along the path. Consecutive
 * points further apart than `reinsert_factor` times the initial spacing get a
 * midpoint inserted.
 *
 * Once the remaining gradient is dominated by its tangential part (or the
 * sweeps stall) the highest point is handed to refine_saddle, which
 * alternates an exact 1D maximization along the fixed tangent with a
 * projected descent step until the full gradient is below tolerance.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "plap/errors.hpp"
#include "plap/function_space.hpp"
#include "plap/functional.hpp"
#include "plap/line_search.hpp"
#include "plap/metric.hpp"
#include "plap/solver.hpp"

namespace plap {

struct MountainPassOptions {
    double reinsert_factor = 2.0;
    std::size_t max_path_points = 1025;
    double polish_switch = 0.1;      // hand over when |g_perp| <= polish_switch * |g|
    int stall_sweeps = 25;           // ...or when the max has not dropped for this many sweeps
    double stall_rel = 1e-14;
    int max_polish = 5000;
    int midpoint_descent_steps = 50;
    double sweep_step_factor = 0.5;  // a sweep moves the top point at most this many initial spacings
    double polish_step_rel = 0.1;    // refinement steps move at most this fraction of |u|_{1,p}
    LineSearchOptions line_search{};
};

namespace detail {

inline DiscreteFunction gradient_jq(const DiscreteFunction& u, const ProblemParams& params)
{
    DiscreteFunction g = assemble_gradient(u, params);
    if (params.jq_sign() < 0.0) g *= -1.0;
    return g;
}

/// Local maximizer of s -> J_q(u + s tau) reached by moving uphill from s = 0.
/// Returns false if no sign change of the derivative is found.
inline bool maximize_along(const ProblemParams& params, DiscreteFunction& u, const DiscreteFunction& tau,
                           double tau_p_tau)
{
    auto dphi = [&](double s) { return gradient_jq(u.axpy(s, tau), params).coeffs().dot(tau.coeffs()); };
    const double d0 = dphi(0.0);
    if (d0 == 0.0 || !(tau_p_tau > 0.0)) return true;
    double a = 0.0, da = d0;
    double b = d0 / tau_p_tau, db = dphi(b);
    int expand = 0;
    while ((db > 0.0) == (d0 > 0.0)) {
        if (++expand > 60 || !std::isfinite(db)) return false;
        a = b;
        da = db;
        b *= 2.0;
        db = dphi(b);
    }
    // Illinois regula falsi on dphi over [a, b].
    int side = 0;
    double s = b;
    for (int it = 0; it < 100; ++it) {
        if (db == da) break;
        s = (a * db - b * da) / (db - da);
        const double ds = dphi(s);
        if (!std::isfinite(ds)) return false;
        if (ds == 0.0 || std::abs(b - a) <= 1e-15 * std::max(std::abs(a), std::abs(b))) break;
        if ((ds > 0.0) == (da > 0.0)) {
            a = s;
            da = ds;
            if (side == -1) db *= 0.5;
            side = -1;
        } else {
            b = s;
            db = ds;
            if (side == 1) da *= 0.5;
            side = 1;
        }
    }
    u = u.axpy(s, tau);
    return true;
}

/// Armijo step on J_q along the P-gradient projected off `tau`. Returns false
/// when the line search fails.
inline bool projected_descent_step(const ProblemParams& params, SobolevMetric& metric, DiscreteFunction& u,
                                   double& value, const DiscreteFunction& g, const DiscreteFunction* tau,
                                   const LineSearchOptions& ls_opt,
                                   double max_len = std::numeric_limits<double>::infinity())
{
    const Vector w = metric.weights_for(u, params.p);
    Vector d = -metric.solve(g.coeffs(), w);
    if (tau != nullptr) {
        const Vector pt = metric.apply(tau->coeffs(), w);
        const double tpt = tau->coeffs().dot(pt);
        if (tpt > 0.0) d -= (d.dot(pt) / tpt) * tau->coeffs();
    }
    const DiscreteFunction dir(u.mesh_ptr(), std::move(d));
    const double slope = g.coeffs().dot(dir.coeffs());
    auto phi = [&](double t) { return energy_jq(u.axpy(t, dir), params); };
    auto dphi = [&](double t) { return gradient_jq(u.axpy(t, dir), params).coeffs().dot(dir.coeffs()); };
    LineSearchOptions ls = ls_opt;
    if (std::isfinite(max_len)) {
        const double len = seminorm_w1p(dir, params.p);
        if (len * ls.initial_step > max_len) ls.initial_step = max_len / len;
    }
    const LineSearchResult res = armijo_backtracking(phi, dphi, value, slope, ls);
    if (!res.accepted) return false;
    u = u.axpy(res.step, dir);
    value = res.value;
    return true;
}

} // namespace detail

/// Saddle refinement from `u` with a fixed unstable direction `tangent`.
inline SolveResult refine_saddle(const ProblemParams& params, const DiscreteFunction& u_start,
                                 const DiscreteFunction& tangent, double tol, const MountainPassOptions& opt = {})
{
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    params.validate();
    u_start.check(params.f);
    u_start.check(tangent);

    SolveResult res;
    res.method = Method::MountainPass;
    res.tangent = tangent.with_boundary_zeroed();
    SobolevMetric metric(u_start.mesh_ptr());
    DiscreteFunction u = u_start.with_boundary_zeroed();

    int it = 0;
    for (;; ++it) {
        res.grad_residual = residual_max(detail::gradient_jq(u, params).coeffs());
        if (res.grad_residual < tol) {
            res.converged = true;
            break;
        }
        if (it >= opt.max_polish) {
            res.message = "refinement cap reached";
            break;
        }
        const Vector w = metric.weights_for(u, params.p);
        const double tpt = metric.inner(res.tangent.coeffs(), res.tangent.coeffs(), w);
        if (!detail::maximize_along(params, u, res.tangent, tpt)) {
            res.message = "no maximum along the path tangent";
            break;
        }
        const DiscreteFunction g = detail::gradient_jq(u, params);
        res.grad_residual = residual_max(g.coeffs());
        if (res.grad_residual < tol) {
            res.converged = true;
            break;
        }
        double value = energy_jq(u, params);
        const double cap = opt.polish_step_rel * seminorm_w1p(u, params.p);
        if (!detail::projected_descent_step(params, metric, u, value, g, &res.tangent, opt.line_search,
                                            cap > 0.0 ? cap : std::numeric_limits<double>::infinity())) {
            res.message = "line search failed during refinement";
            break;
        }
    }
    res.polish_iterations = it;
    res.critical_value = energy_jq(u, params);
    res.u_star = std::move(u);
    return res;
}

inline SolveResult mountain_pass_solve(const ProblemParams& params, const MountainPassPath& path, double tol,
                                       int max_sweeps, const MountainPassOptions& opt = {})
{
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (path.segments() < 8) throw InvalidArgument("mountain-pass path needs m >= 8 segments");
    params.validate();
    for (const auto& pt : path.points) {
        pt.check(params.f);
        if (!pt.satisfies_boundary_mask()) throw InvalidArgument("path point violates the boundary mask");
    }
    if ((path.front().coeffs() - path.back().coeffs()).isZero(0.0))
        throw InvalidArgument("degenerate path: endpoints are equal");

    const double p = params.p;
    std::vector<DiscreteFunction> pts = path.points;
    std::vector<double> vals;
    vals.reserve(pts.size());
    for (const auto& pt : pts) vals.push_back(energy_jq(pt, params));
    double spacing0 = 0.0;
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) spacing0 = std::max(spacing0, seminorm_w1p(pts[j + 1] - pts[j], p));

    SolveResult res;
    res.method = Method::MountainPass;
    SobolevMetric metric(params.mesh_ptr());
    auto argmax = [&] {
        std::size_t best = 1;
        for (std::size_t j = 2; j + 1 < pts.size(); ++j)
            if (vals[j] > vals[best]) best = j;
        return best;
    };

    std::size_t js = argmax();
    std::size_t endpoint = std::numeric_limits<std::size_t>::max();
    int stalled = 0;
    bool polish = false;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        js = argmax();
        if (!(vals[js] > std::max(vals.front(), vals.back()))) {
            endpoint = vals.front() >= vals.back() ? 0 : pts.size() - 1;
            break;
        }
        const DiscreteFunction& u = pts[js];
        const DiscreteFunction g = detail::gradient_jq(u, params);
        res.grad_residual = residual_max(g.coeffs());
        if (res.grad_residual < tol) {
            res.converged = true;
            break;
        }
        const DiscreteFunction tau = pts[js + 1] - pts[js - 1];
        const Vector w = metric.weights_for(u, p);
        const Vector pt = metric.apply(tau.coeffs(), w);
        const double tpt = tau.coeffs().dot(pt);
        const Vector g_perp = g.coeffs() - (tau.coeffs().dot(g.coeffs()) / tpt) * pt;
        const double res_perp = residual_max(g_perp);
        if (res_perp <= opt.polish_switch * res.grad_residual || res_perp < tol || stalled >= opt.stall_sweeps) {
            polish = true;
            break;
        }

        DiscreteFunction moved = u;
        double value = vals[js];
        if (!detail::projected_descent_step(params, metric, moved, value, g, &tau, opt.line_search,
                                            opt.sweep_step_factor * spacing0)) {
            polish = true;
            break;
        }
        pts[js] = std::move(moved);
        vals[js] = value;

        const double top = *std::max_element(vals.begin() + 1, vals.end() - 1);
        // Midpoint re-insertion around the moved point (right side first keeps indices valid).
        for (std::size_t a : {js, js - 1}) {
            if (pts.size() >= opt.max_path_points) break;
            if (seminorm_w1p(pts[a + 1] - pts[a], p) <= opt.reinsert_factor * spacing0) continue;
            DiscreteFunction mid = 0.5 * (pts[a] + pts[a + 1]);
            double mv = energy_jq(mid, params);
            for (int k = 0; k < opt.midpoint_descent_steps && mv > top; ++k) {
                const DiscreteFunction gm = detail::gradient_jq(mid, params);
                if (!detail::projected_descent_step(params, metric, mid, mv, gm, nullptr, opt.line_search)) break;
            }
            if (mv > top) continue;
            pts.insert(pts.begin() + static_cast<std::ptrdiff_t>(a + 1), std::move(mid));
            vals.insert(vals.begin() + static_cast<std::ptrdiff_t>(a + 1), mv);
        }

        const double now = *std::max_element(vals.begin() + 1, vals.end() - 1);
        if (!res.path_history.empty() && res.path_history.back() - now <= opt.stall_rel * (1.0 + std::abs(now))) ++stalled;
        else stalled = 0;
        res.path_history.push_back(now);
    }
    res.iterations = sweep;
    if (endpoint != std::numeric_limits<std::size_t>::max()) {
        // The deformation pushed every interior point below an endpoint: the
        // only critical point the path still certifies is that endpoint.
        res.u_star = pts[endpoint];
        res.critical_value = vals[endpoint];
        res.grad_residual = residual_max(detail::gradient_jq(res.u_star, params).coeffs());
        res.converged = res.grad_residual < tol;
        res.at_endpoint = true;
        res.message = endpoint == 0 ? "path maximum collapsed onto u0" : "path maximum collapsed onto u1";
        res.tangent = pts[1] - pts[0];
        res.final_path.points = std::move(pts);
        return res;
    }
    js = argmax();
    res.tangent = pts[js + 1] - pts[js - 1];
    res.u_star = pts[js];
    res.critical_value = vals[js];
    if (!res.converged && !polish && res.message.empty()) polish = sweep >= max_sweeps;

    if (polish) {
        SolveResult fine = refine_saddle(params, pts[js], res.tangent, tol, opt);
        res.u_star = std::move(fine.u_star);
        res.critical_value = fine.critical_value;
        res.grad_residual = fine.grad_residual;
        res.polish_iterations = fine.polish_iterations;
        res.converged = fine.converged;
        res.message = fine.message;
    } else if (!res.converged && res.message.empty()) {
        res.message = "sweep cap reached";
    }
    res.final_path.points = std::move(pts);
    return res;
}

} // namespace plap
