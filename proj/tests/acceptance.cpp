// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>

#include "cli/commands.hpp"
#include "oracles.hpp"
#include "plap/plap.hpp"

using namespace plap;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances, fixed here so a run cannot loosen them.
constexpr double grad_rel_tol = 1e-6;
constexpr double grad_ratio_lo = 50.0, grad_ratio_hi = 200.0;
constexpr double eig_tol_1d = 0.01, eig_tol_2d = 0.02, eig_tol_p3 = 0.01;
constexpr double r0_rel_tol = 1e-3, r0_hand_tol = 1e-12;
constexpr double weak_tol = 1e-6, oracle_tol = 1e-3;
constexpr double descent_tol = 1e-8, mp_sub_tol = 1e-6;
constexpr double bform_tol = 1e-6, limit_tol = 1e-3;
constexpr double ps_tol = 1e-10, exact_tol = 1e-12;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::shared_ptr<const Mesh> unit_interval(Index n) { return build_mesh(DomainSpec::interval(0.0, 1.0), n); }

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double max_nodal(const DiscreteFunction& u, const std::vector<double>& ref)
{
    double e = 0.0;
    for (Index i = 0; i < u.size(); ++i) e = std::max(e, std::abs(std::abs(u[i]) - ref[static_cast<std::size_t>(i)]));
    return e;
}

double max_nodal(const DiscreteFunction& a, const DiscreteFunction& b)
{
    return (a.coeffs() - b.coeffs()).lpNorm<Eigen::Infinity>();
}

Outcome gradient_consistency()
{
    const auto m = unit_interval(64);
    std::mt19937_64 rng(2024);
    const double ps[] = {2.0, 2.5, 3.0}, qs[] = {1.5, 4.0};
    const double eps[] = {1e-3, 1e-4, 1e-5};
    double worst_rel = 0.0, ratio_min = 1e300, ratio_max = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double p = ps[t % 3], q = qs[(t / 3) % 2];
        const DiscreteFunction u(m, oracle::random_tent(*m, rng));
        DiscreteFunction v(m, oracle::random_smooth(*m, rng));
        v *= 1.0 / seminorm_w1p(v, p);
        const auto f = DiscreteFunction(m, oracle::random_field(*m, rng));
        const auto params = ProblemParams::make(m, p, q, 1.0).with_forcing(f);
        const double gv = assemble_gradient(u, params).coeffs().dot(v.coeffs());
        double err[3];
        for (int k = 0; k < 3; ++k) {
            const long double e = eps[k];
            const long double jp = oracle::energy_1d_long(*m, u.coeffs(), f.coeffs(), p, q, 1.0, &v.coeffs(), e);
            const long double jm = oracle::energy_1d_long(*m, u.coeffs(), f.coeffs(), p, q, 1.0, &v.coeffs(), -e);
            const double fd = static_cast<double>((jp - jm) / (2.0L * eps[k]));
            err[k] = std::abs(fd - gv);
        }
        worst_rel = std::max(worst_rel, err[2] / std::abs(gv));
        for (int k = 0; k < 2; ++k) {
            const double r = err[k] / err[k + 1];
            ratio_min = std::min(ratio_min, r);
            ratio_max = std::max(ratio_max, r);
        }
    }
    const bool ok = worst_rel < grad_rel_tol && ratio_min >= grad_ratio_lo && ratio_max <= grad_ratio_hi;
    return {ok, fmt("max rel err %.2e", worst_rel) + fmt(", decade ratios in [%.1f", ratio_min) + fmt(", %.1f]", ratio_max)};
}

Outcome eigen_oracle()
{
    const auto m1 = unit_interval(128);
    const double l1 = first_eigenpair(m1, 2.0).lambda_p, o1 = oracle::dense_laplacian_eigenvalue(*m1);
    const auto m2 = build_mesh(DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 32);
    const double l2 = first_eigenpair(m2, 2.0).lambda_p, o2 = oracle::dense_laplacian_eigenvalue(*m2);
    const double l3 = first_eigenpair(m1, 3.0).lambda_p, o3 = oracle::p_laplacian_eigenvalue_1d(3.0);
    const double e1 = std::abs(l1 - o1) / o1, e2 = std::abs(l2 - o2) / o2, e3 = std::abs(l3 - o3) / o3;
    return {e1 < eig_tol_1d && e2 < eig_tol_2d && e3 < eig_tol_p3,
            fmt("1D rel %.2e", e1) + fmt(", 2D rel %.2e", e2) + fmt(", p=3 rel %.2e", e3)};
}

Outcome geometry_certificate()
{
    const auto m = unit_interval(8);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> up(1.2, 4.0), gap(0.2, 4.0), lam(0.05, 20.0);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const double p = up(rng), q = p + gap(rng), l = lam(rng);
        const auto cert = check_geometry(ProblemParams::make(m, p, q, l), 1.0, 1.0);
        const double r0 = std::pow(q * (p - 1.0) / (p * (q - 1.0)) / l, 1.0 / (q - p));
        const auto best = std::max_element(cert.f_samples.begin(), cert.f_samples.end(),
                                           [](auto& a, auto& b) { return a.second < b.second; });
        worst = std::max(worst, std::abs(best->first - r0) / r0);
    }
    const double hand = std::abs(check_geometry(ProblemParams::make(m, 3.0, 4.0, 1.0), 1.0, 1.0).r0 - 8.0 / 9.0);
    return {worst < r0_rel_tol && hand <= r0_hand_tol, fmt("max rel argmax err %.2e", worst) + fmt(", |r0 - 8/9| = %.1e", hand)};
}

Outcome superlinear_benchmark()
{
    const auto m = unit_interval(128);
    PipelineOptions opt;
    opt.measure_mesh_slack = true;
    const auto res = run_solve_pipeline(ProblemParams::make(m, 2.0, 4.0, 1.0), opt);
    if (!res.mountain_pass) return {false, "no mountain-pass result: " + res.cert.failure};
    const auto& mp = *res.mountain_pass;
    const double err = max_nodal(mp.u_star, oracle::lane_emden_1d(4.0, 1.0, 128));
    const bool ok = mp.converged && !mp.u_star.is_zero() && res.weak.normalized < weak_tol && err < oracle_tol
                    && res.critical_value_bound_ok;
    return {ok, fmt("weak %.2e", res.weak.normalized) + fmt(", oracle err %.2e", err) + fmt(", c %.6g", mp.critical_value)
                    + fmt(" >= c0 %.6g", res.cert.c0) + fmt(" - delta %.2e", res.delta_mesh)};
}

Outcome sublinear_benchmark()
{
    const auto m = unit_interval(128);
    const auto res = run_solve_pipeline(ProblemParams::make(m, 2.0, 1.5, 1.0));
    if (!res.descent || !res.mountain_pass) return {false, "pipeline did not run: " + res.cert.failure};
    const auto& d = *res.descent;
    const auto& mp = *res.mountain_pass;
    const double err = max_nodal(d.u_star, oracle::lane_emden_1d(1.5, 1.0, 128));
    const bool ok = d.converged && !d.u_star.is_zero() && d.grad_residual < descent_tol && err < oracle_tol
                    && mp.converged && mp.grad_residual < mp_sub_tol;
    std::string detail = fmt("descent residual %.2e", d.grad_residual) + fmt(", oracle err %.2e", err)
                         + fmt("; mountain pass residual %.2e", mp.grad_residual);
    if (mp.at_endpoint) detail += mp.u_star.is_zero() ? " (trivial: path maximum settled on u0 = 0)" : " (at endpoint)";
    return {ok, detail};
}

Outcome equivalence_experiment()
{
    const auto m = unit_interval(128);
    const auto params = ProblemParams::make(m, 2.0, 4.0, 1.0);
    const auto tr = run_equivalence_experiment(params, DiscreteFunction::constant(m, 1.0), 0.5, 12, bform_tol);
    const auto hom = run_solve_pipeline(params);
    const double dist = hom.mountain_pass ? max_nodal(tr.u_limit, hom.mountain_pass->u_star) : NAN;
    const auto ctrl = run_equivalence_experiment(params, DiscreteFunction::zero(m), 0.5, 5, bform_tol);
    bool constant = ctrl.completed;
    for (const auto& u : ctrl.iterates) constant = constant && u.coeffs() == ctrl.iterates.front().coeffs();
    const bool ok = tr.completed && tr.b_form_residual < bform_tol && dist < limit_tol && constant;
    return {ok, fmt("b_form_residual %.3e", tr.b_form_residual) + fmt(" (normalized %.2e)", tr.b_form_normalized)
                    + fmt(", |u_limit - u_hom|_inf %.2e", dist) + (constant ? ", control constant" : ", control NOT constant")};
}

Outcome identity_suite()
{
    const auto m = unit_interval(64);
    std::mt19937_64 rng(99);
    double worst_ps = 0.0, worst_b = 0.0, worst_sign = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double q = t % 2 ? 4.0 : 1.5;
        const DiscreteFunction u(m, oracle::random_field(*m, rng)), v(m, oracle::random_field(*m, rng));
        auto params = ProblemParams::make(m, 2.5, q, 0.8);
        if (t % 4 >= 2) params = params.with_forcing(DiscreteFunction(m, oracle::random_field(*m, rng)));
        const double scale = 1.0 + std::pow(seminorm_w1p(u, 2.5), 2.5);
        worst_ps = std::max(worst_ps, palais_smale_identity_residual(u, params) / scale);
        const double b = eval_B(u, v, params);
        const double gv = assemble_gradient(u, params).coeffs().dot(v.coeffs());
        worst_b = std::max(worst_b, std::abs(b - gv - dual_pairing(params.f, v)) / (1.0 + std::abs(b)));
        const double j = energy_value(u, params);
        worst_sign = std::max(worst_sign, std::abs(energy_jq(u, params) - (q < 2.5 ? -j : j)) / (1.0 + std::abs(j)));
    }
    return {worst_ps <= ps_tol && worst_b <= exact_tol && worst_sign <= exact_tol,
            fmt("PS rel %.2e", worst_ps) + fmt(", B decomposition %.2e", worst_b) + fmt(", J_q sign %.2e", worst_sign)};
}

Outcome determinism()
{
    const fs::path dir = fs::temp_directory_path() / "plap_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"mesh": {"n": 128}, "problem": {"p": 2, "q": 4, "lambda": 1}, "seed": 7})";
    auto run = [&](const std::string& out) {
        const std::string c = cfg.string(), o = (dir / out).string();
        const char* argv[] = {"plap", "solve", "--config", c.c_str(), "--out", o.c_str()};
        return cli::run_cli(6, argv);
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const int a = run("a"), b = run("b");
    bool same = a == 0 && b == 0;
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
        ++files;
        same = same && slurp(e.path()) == slurp(dir / "b" / e.path().filename());
    }
    fs::remove_all(dir);
    return {same && files >= 4, std::to_string(files) + " files compared, exit codes " + std::to_string(a) + "/" + std::to_string(b)};
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"1 gradient consistency", 10.0, gradient_consistency},
        {"2 eigen oracle", 30.0, eigen_oracle},
        {"3 geometry certificate", 5.0, geometry_certificate},
        {"4 superlinear benchmark", 60.0, superlinear_benchmark},
        {"5 sublinear benchmark", 60.0, sublinear_benchmark},
        {"6 equivalence experiment", 120.0, equivalence_experiment},
        {"7 identity suite", 60.0, identity_suite},
        {"8 determinism", 60.0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const bool ok = o.pass && secs < c.budget_s;
        failures += ok ? 0 : 1;
        std::printf("%s  %-26s %s; %.2f s (budget %.0f s)\n", ok ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                    c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
    return failures;
}
