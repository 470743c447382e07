#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "plap/errors.hpp"
#include "plap/function_space.hpp"
#include "plap/functional.hpp"
#include "plap/line_search.hpp"
#include "plap/metric.hpp"

namespace plap {

enum class Method { Descent, MountainPass };

inline const char* to_string(Method m) { return m == Method::Descent ? "descent" : "mountain-pass"; }

struct MountainPassPath {
    std::vector<DiscreteFunction> points;

    /// Gamma(t_j) = (1 - t_j) u0 + t_j u1, t_j = j/m.
    static MountainPassPath straight(const DiscreteFunction& u0, const DiscreteFunction& u1, int m)
    {
        if (m < 1) throw InvalidArgument("path needs at least one segment");
        u0.check(u1);
        MountainPassPath path;
        path.points.reserve(static_cast<std::size_t>(m) + 1);
        path.points.push_back(u0);
        for (int j = 1; j < m; ++j) {
            const double t = static_cast<double>(j) / m;
            path.points.push_back((1.0 - t) * u0 + t * u1);
        }
        path.points.push_back(u1);
        return path;
    }

    int segments() const { return static_cast<int>(points.size()) - 1; }
    const DiscreteFunction& front() const { return points.front(); }
    const DiscreteFunction& back() const { return points.back(); }
};

struct SolveResult {
    DiscreteFunction u_star;
    double critical_value = 0.0;        // J_q(u_star)
    double grad_residual = 0.0;         // max_i |<J'(u_star), phi_i>|
    int iterations = 0;                 // descent steps, or mountain-pass sweeps
    Method method = Method::Descent;
    bool converged = false;
    bool at_endpoint = false;           // mountain pass: the path maximum ended on u0 or u1
    std::string message;

    std::vector<double> energy_history;  // descent: J after every accepted step (entry 0 = start)
    std::vector<double> path_history;    // mountain pass: max_j J_q(Gamma_j) after every sweep
    int polish_iterations = 0;           // mountain pass: saddle refinement steps after the sweeps
    MountainPassPath final_path;
    DiscreteFunction tangent;            // path direction at u_star, reused for warm starts
};

struct DescentOptions {
    int max_iter = 20000;
    LineSearchOptions line_search{};
};

/// Preconditioned gradient descent with Armijo backtracking on J. The
/// critical points of J and J_q coincide, so the sign flip is irrelevant here.
inline SolveResult minimize_energy(const ProblemParams& params, const DiscreteFunction& u_init, double tol,
                                   const DescentOptions& opt = {})
{
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    params.validate();
    u_init.check(params.f);

    SolveResult res;
    res.method = Method::Descent;
    DiscreteFunction u = u_init.with_boundary_zeroed();
    SobolevMetric metric(u.mesh_ptr());
    double j = energy_value(u, params);
    res.energy_history.push_back(j);

    DiscreteFunction g = assemble_gradient(u, params);
    res.grad_residual = residual_max(g.coeffs());
    int it = 0;
    for (; it < opt.max_iter && !(res.grad_residual < tol); ++it) {
        const Vector w = metric.weights_for(u, params.p);
        const DiscreteFunction d(u.mesh_ptr(), -metric.solve(g.coeffs(), w));
        const double slope = g.coeffs().dot(d.coeffs());
        auto phi = [&](double t) { return energy_value(u.axpy(t, d), params); };
        auto dphi = [&](double t) { return assemble_gradient(u.axpy(t, d), params).coeffs().dot(d.coeffs()); };
        const LineSearchResult ls = armijo_backtracking(phi, dphi, j, slope, opt.line_search);
        if (!ls.accepted) {
            res.message = "line search failed";
            break;
        }
        u = u.axpy(ls.step, d);
        j = ls.value;
        res.energy_history.push_back(j);
        g = assemble_gradient(u, params);
        res.grad_residual = residual_max(g.coeffs());
    }
    res.iterations = it;
    res.converged = res.grad_residual < tol;
    if (!res.converged && res.message.empty()) res.message = "iteration cap reached";
    res.critical_value = energy_jq(u, params);
    res.u_star = std::move(u);
    return res;
}

struct WeakSolutionReport {
    double max_residual = 0.0;   // max_i |B[u, phi_i] - int f phi_i|
    double normalized = 0.0;     // max_residual / (1 + |u|_{1,p}^{p-1})
    bool passed = false;
};

inline WeakSolutionReport verify_weak_solution(const DiscreteFunction& u, const ProblemParams& params, double tol)
{
    WeakSolutionReport r;
    r.max_residual = residual_max(assemble_gradient(u, params).coeffs());
    r.normalized = r.max_residual / (1.0 + std::pow(seminorm_w1p(u, params.p), params.p - 1.0));
    r.passed = r.normalized < tol;
    return r;
}

} // namespace plap
