#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "plap/eigen.hpp"
#include "plap/geometry.hpp"
#include "plap/mountain_pass.hpp"
#include "plap/solver.hpp"

namespace plap {

enum class SolveStatus { Pass = 0, CertificationFailed = 2, NotConverged = 3 };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Pass: return "pass";
    case SolveStatus::CertificationFailed: return "certification-failed";
    case SolveStatus::NotConverged: return "not-converged";
    }
    return "unknown";
}

struct PipelineOptions {
    double eigen_tol = 1e-10;
    double tol = 1e-9;              // gradient residual target of the critical-point solves
    double verify_tol = 1e-6;       // normalized weak residual accepted as a solution
    int path_segments = 32;
    int max_sweeps = 2000;
    bool measure_mesh_slack = false;
    MountainPassOptions mountain_pass{};
    DescentOptions descent{};
};

struct PipelineResult {
    EigenPair eig;
    EmbeddingConstants embedding;
    GeometryCert cert;
    std::optional<SolveResult> mountain_pass;
    std::optional<SolveResult> descent;
    WeakSolutionReport weak;
    double delta_mesh = std::numeric_limits<double>::quiet_NaN();          // |c(n) - c(2n)|
    double critical_value_refined = std::numeric_limits<double>::quiet_NaN();
    bool critical_value_bound_ok = false;  // c >= c0 - delta_mesh (c >= c0 when delta_mesh is not measured)
    SolveStatus status = SolveStatus::CertificationFailed;

    /// The solve whose output is the reported solution: the mountain pass for
    /// q > p, the coercive descent for q < p.
    const SolveResult* primary() const
    {
        if (cert.branch == Branch::Sublinear) return descent ? &*descent : nullptr;
        return mountain_pass ? &*mountain_pass : nullptr;
    }
};

namespace detail {

inline PipelineResult run_pipeline_once(const ProblemParams& params, const PipelineOptions& opt)
{
    params.validate();
    PipelineResult out;
    const auto& mesh = params.mesh_ptr();
    out.eig = first_eigenpair(mesh, params.p, opt.eigen_tol);
    out.embedding = estimate_embedding_constants(mesh, params.p, params.q);
    out.cert = check_geometry(params, out.embedding.c1, out.embedding.c2);
    if (!out.cert.geometry_ok) return out;
    const Endpoints ends = choose_endpoints(params, out.eig, out.cert);
    if (!ends.found || !out.cert.geometry_ok) return out;

    const MountainPassPath path = MountainPassPath::straight(ends.u0, ends.u1, opt.path_segments);
    out.mountain_pass = mountain_pass_solve(params, path, opt.tol, opt.max_sweeps, opt.mountain_pass);
    if (params.branch() == Branch::Sublinear) out.descent = minimize_energy(params, out.eig.w_p, opt.tol, opt.descent);

    const SolveResult& sol = *out.primary();
    out.weak = verify_weak_solution(sol.u_star, params, opt.verify_tol);
    out.status = sol.converged && out.weak.passed ? SolveStatus::Pass : SolveStatus::NotConverged;
    return out;
}

} // namespace detail

/// eigenpair -> embedding constants -> geometry certificate -> endpoints ->
/// mountain pass (plus descent when q < p).
inline PipelineResult run_solve_pipeline(const ProblemParams& params, const PipelineOptions& opt = {})
{
    PipelineResult out = detail::run_pipeline_once(params, opt);
    const SolveResult* sol = out.primary();
    if (sol == nullptr) return out;
    const double c = out.mountain_pass->critical_value;
    if (opt.measure_mesh_slack) {
        const Mesh& m = params.mesh();
        auto fine_mesh = build_mesh(m.domain(), 2 * m.subdivisions());
        ProblemParams fine = ProblemParams::make(fine_mesh, params.p, params.q, params.lambda);
        fine.eps_reg = params.eps_reg;
        if (params.has_forcing()) {
            // Forcing is carried over by evaluating the coarse P1 field at the fine nodes.
            const DiscreteFunction& f = params.f;
            fine = fine.with_forcing(DiscreteFunction::interpolate(fine_mesh, [&](const Point& x) {
                return evaluate(f, x);
            }));
        }
        PipelineOptions fopt = opt;
        fopt.measure_mesh_slack = false;
        const PipelineResult r = detail::run_pipeline_once(fine, fopt);
        if (r.mountain_pass) {
            out.critical_value_refined = r.mountain_pass->critical_value;
            out.delta_mesh = std::abs(c - out.critical_value_refined);
        }
    }
    const double slack = std::isfinite(out.delta_mesh) ? out.delta_mesh : 0.0;
    out.critical_value_bound_ok = c >= out.cert.c0 - slack;
    return out;
}

} // namespace plap
