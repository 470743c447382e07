#pragma once

/*
 * Vanishing-forcing experiment: solve the perturbed problems with
 * f_n = rho^n f0, n = 0..steps-1, and check that the last iterate satisfies
 * the homogeneous weak form.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "plap/eigen.hpp"
#include "plap/errors.hpp"
#include "plap/functional.hpp"
#include "plap/mountain_pass.hpp"
#include "plap/pipeline.hpp"
#include "plap/solver.hpp"

namespace plap {

struct EquivalenceStep {
    int n = 0;
    double f_norm = 0.0;          // ||f_n||_{p'}
    double u_norm = 0.0;          // |u_n|_{1,p}
    double hom_residual = 0.0;    // normalized weak residual of u_n against f = 0
    double hom_residual_raw = 0.0;
    double step_distance = 0.0;   // |u_n - u_{n-1}|_{1,p}, 0 for n = 0
    double grad_residual = 0.0;   // residual of the perturbed solve
    int iterations = 0;
    bool converged = false;
};

struct EquivalenceTrace {
    double rho = 0.5;
    std::vector<EquivalenceStep> steps;
    std::vector<DiscreteFunction> iterates;
    DiscreteFunction u_limit;
    double b_form_residual = std::numeric_limits<double>::quiet_NaN();   // max_i |B[u_limit, phi_i]|
    double b_form_normalized = std::numeric_limits<double>::quiet_NaN(); // ... / (1 + |u_limit|^{p-1})
    double limit_norm = 0.0;
    bool trivial_limit = false;
    double norm_bound = std::numeric_limits<double>::quiet_NaN();        // cap the u_norm sequence was checked against
    bool bounded = true;
    bool completed = false;
    bool passed = false;          // completed, bounded and b_form_residual < tol
    std::string message;
};

struct EquivalenceOptions {
    bool warm_start = true;
    double u_norm_cap = std::numeric_limits<double>::quiet_NaN();  // default 10 (|u_0| + 1)
    double trivial_threshold = 1e-8;
    PipelineOptions solve{};
};

inline EquivalenceTrace run_equivalence_experiment(const ProblemParams& params, const DiscreteFunction& f0, double rho,
                                                   int steps, double tol, const EquivalenceOptions& opt = {})
{
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in (0, 1)");
    if (steps < 3) throw InvalidArgument("equivalence experiment needs steps >= 3");
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    params.validate();
    f0.check(params.f);

    const double p = params.p;
    const double pc = conjugate_exponent(p);
    const ProblemParams hom = params.homogeneous();
    EquivalenceTrace tr;
    tr.rho = rho;
    DiscreteFunction tangent;

    for (int n = 0; n < steps; ++n) {
        const ProblemParams pn = params.with_forcing(std::pow(rho, n) * f0);
        SolveResult sol;
        if (n == 0 || !opt.warm_start) {
            const PipelineResult pr = run_solve_pipeline(pn, opt.solve);
            if (pr.primary() == nullptr) {
                tr.message = "step " + std::to_string(n) + ": geometry certificate failed: " + pr.cert.failure;
                break;
            }
            sol = *pr.primary();
            if (pr.mountain_pass) tangent = pr.mountain_pass->tangent;
        } else if (params.branch() == Branch::Superlinear) {
            sol = refine_saddle(pn, tr.iterates.back(), tangent, opt.solve.tol, opt.solve.mountain_pass);
        } else {
            sol = minimize_energy(pn, tr.iterates.back(), opt.solve.tol, opt.solve.descent);
        }

        EquivalenceStep st;
        st.n = n;
        st.f_norm = norm_lq(pn.f, pc);
        st.u_norm = seminorm_w1p(sol.u_star, p);
        const WeakSolutionReport hr = verify_weak_solution(sol.u_star, hom, tol);
        st.hom_residual = hr.normalized;
        st.hom_residual_raw = hr.max_residual;
        st.step_distance = n == 0 ? 0.0 : seminorm_w1p(sol.u_star - tr.iterates.back(), p);
        st.grad_residual = sol.grad_residual;
        st.iterations = sol.method == Method::MountainPass ? sol.iterations + sol.polish_iterations : sol.iterations;
        st.converged = sol.converged;
        tr.steps.push_back(st);
        tr.iterates.push_back(sol.u_star);

        if (n == 0) tr.norm_bound = std::isfinite(opt.u_norm_cap) ? opt.u_norm_cap : 10.0 * (st.u_norm + 1.0);
        if (st.u_norm > tr.norm_bound) {
            tr.bounded = false;
            tr.message = "u_norm exceeded the boundedness cap at step " + std::to_string(n);
        }
        if (!sol.converged) {
            tr.message = "step " + std::to_string(n) + ": inner solve did not converge (" + sol.message + ")";
            break;
        }
    }

    if (!tr.iterates.empty()) {
        tr.u_limit = tr.iterates.back();
        const WeakSolutionReport lr = verify_weak_solution(tr.u_limit, hom, tol);
        tr.b_form_residual = residual_max(assembly::b_form_rows(tr.u_limit, assembly::coefficients(hom)));
        tr.b_form_normalized = lr.normalized;
        tr.limit_norm = seminorm_w1p(tr.u_limit, p);
        tr.trivial_limit = tr.limit_norm < opt.trivial_threshold;
    }
    tr.completed = static_cast<int>(tr.steps.size()) == steps && tr.steps.back().converged;
    tr.passed = tr.completed && tr.bounded && tr.b_form_residual < tol;
    return tr;
}

struct WeakLimitReport {
    std::vector<double> delta;       // per step: max over probes of |<A(u_n) - A(u_limit), grad v_j>|
    std::vector<std::vector<double>> delta_per_probe;
    std::vector<double> norm_gap;    // per step: | |u_n|^p - |u_limit|^p |
    double final_delta = 0.0;        // at the last step (identically 0: u_limit is the last iterate)
    double penultimate_delta = 0.0;
    double final_norm_gap = 0.0;
    double penultimate_norm_gap = 0.0;
    bool delta_decreasing = false;   // non-increasing over the last 3 steps
    bool norm_gap_decreasing = false;
};

/// Probes: 10 random fields with i.i.d. uniform(-1, 1) interior values and the
/// first eigenfunction, all scaled to |v|_{1,p} = 1.
inline WeakLimitReport weak_limit_diagnostics(const EquivalenceTrace& trace, const ProblemParams& params,
                                              std::uint64_t seed = 0)
{
    if (trace.iterates.size() < 3) throw InvalidArgument("weak-limit diagnostics need at least 3 steps");
    const double p = params.p;
    const auto& mesh = params.mesh_ptr();

    std::vector<DiscreteFunction> probes;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int j = 0; j < 10; ++j) {
        Vector c(mesh->node_count());
        for (Index i = 0; i < c.size(); ++i) c[i] = mesh->is_boundary(i) ? 0.0 : uni(rng);
        probes.emplace_back(mesh, std::move(c));
    }
    probes.push_back(first_eigenpair(mesh, p).w_p);
    for (auto& v : probes) v *= 1.0 / seminorm_w1p(v, p);

    const double eps = params.effective_eps();
    const Vector a_lim = assembly::dirichlet_residual(trace.u_limit, p, eps);
    const double n_lim = assembly::dirichlet_integral(trace.u_limit, p);

    WeakLimitReport rep;
    for (const auto& u : trace.iterates) {
        const Vector diff = assembly::dirichlet_residual(u, p, eps) - a_lim;
        std::vector<double> per;
        double mx = 0.0;
        for (const auto& v : probes) {
            per.push_back(std::abs(diff.dot(v.coeffs())));
            mx = std::max(mx, per.back());
        }
        rep.delta_per_probe.push_back(std::move(per));
        rep.delta.push_back(mx);
        rep.norm_gap.push_back(std::abs(assembly::dirichlet_integral(u, p) - n_lim));
    }
    const std::size_t k = rep.delta.size();
    rep.final_delta = rep.delta[k - 1];
    rep.penultimate_delta = rep.delta[k - 2];
    rep.final_norm_gap = rep.norm_gap[k - 1];
    rep.penultimate_norm_gap = rep.norm_gap[k - 2];
    rep.delta_decreasing = rep.delta[k - 3] >= rep.delta[k - 2] && rep.delta[k - 2] >= rep.delta[k - 1];
    rep.norm_gap_decreasing = rep.norm_gap[k - 3] >= rep.norm_gap[k - 2] && rep.norm_gap[k - 2] >= rep.norm_gap[k - 1];
    return rep;
}

} // namespace plap
