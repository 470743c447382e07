#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/config.hpp"
#include "cli/report.hpp"
#include "plap/eigen.hpp"
#include "plap/equivalence.hpp"
#include "plap/geometry.hpp"
#include "plap/pipeline.hpp"

namespace plap::cli {

namespace fs = std::filesystem;

enum ExitCode : int { ExitPass = 0, ExitConfig = 1, ExitCertificate = 2, ExitNotConverged = 3 };

struct Problem {
    std::shared_ptr<const Mesh> mesh;
    ProblemParams params;
};

inline Problem make_problem(const RunConfig& c)
{
    Problem pr;
    pr.mesh = build_mesh(c.mesh.domain(), c.mesh.n);
    pr.params = ProblemParams::make(pr.mesh, c.problem.p, c.problem.q, c.problem.lambda);
    pr.params.eps_reg = c.problem.eps_reg;
    pr.params = pr.params.with_forcing(c.problem.forcing.build(pr.mesh));
    return pr;
}

inline PipelineOptions pipeline_options(const RunConfig& c)
{
    PipelineOptions o;
    o.eigen_tol = c.solver.eigen_tol;
    o.tol = c.solver.tol;
    o.verify_tol = c.solver.verify_tol;
    o.path_segments = c.solver.path_segments;
    o.max_sweeps = c.solver.max_sweeps;
    o.measure_mesh_slack = c.solver.measure_mesh_slack;
    o.descent.max_iter = c.solver.max_iter;
    return o;
}

class Bundle {
public:
    Bundle(fs::path dir, const std::string& command, const RunConfig& cfg) : dir_(std::move(dir)), cfg_(cfg)
    {
        summary_["command"] = command;
        summary_["config"] = config_to_json(cfg);
        start_ = std::chrono::steady_clock::now();
    }

    json& summary() { return summary_; }
    void file(const std::string& name, std::string contents) { files_.emplace_back(name, std::move(contents)); }

    int finish(int code, const std::string& status)
    {
        summary_["status"] = status;
        summary_["exit_code"] = code;
        if (cfg_.record_wall_time)
            summary_["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        fs::create_directories(dir_);
        for (const auto& [name, text] : files_) write_atomic(dir_ / name, text);
        write_atomic(dir_ / "summary.json", summary_.dump(2) + "\n");
        return code;
    }

private:
    fs::path dir_;
    RunConfig cfg_;
    json summary_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::chrono::steady_clock::time_point start_;
};

inline void add_pipeline(Bundle& b, const PipelineResult& r, double p)
{
    json& s = b.summary();
    s["eigen"] = eigen_json(r.eig);
    s["embedding"] = embedding_json(r.embedding);
    s["geometry"] = cert_json(r.cert);
    if (r.mountain_pass) s["mountain_pass"] = solve_json(*r.mountain_pass, p);
    if (r.descent) s["descent"] = solve_json(*r.descent, p);
    if (r.primary()) {
        s["solution_method"] = to_string(r.primary()->method);
        s["grad_residual"] = num(r.primary()->grad_residual);
        s["critical_value"] = num(r.primary()->critical_value);
        s["weak_solution"] = weak_json(r.weak);
    }
    s["delta_mesh"] = num(r.delta_mesh);
    s["critical_value_refined"] = num(r.critical_value_refined);
    s["critical_value_bound_ok"] = r.critical_value_bound_ok;
}

inline int cmd_solve(const RunConfig& cfg, const fs::path& out)
{
    Bundle b(out, "solve", cfg);
    const Problem pr = make_problem(cfg);
    const PipelineResult r = run_solve_pipeline(pr.params, pipeline_options(cfg));
    add_pipeline(b, r, pr.params.p);
    b.file("geometry.csv", geometry_csv(r.cert));

    CsvTable trace({"method", "iteration", "value"});
    if (r.mountain_pass)
        for (std::size_t k = 0; k < r.mountain_pass->path_history.size(); ++k)
            trace.add({"mountain-pass", std::to_string(k + 1), format_double(r.mountain_pass->path_history[k])});
    if (r.descent)
        for (std::size_t k = 0; k < r.descent->energy_history.size(); ++k)
            trace.add({"descent", std::to_string(k), format_double(r.descent->energy_history[k])});
    b.file("trace.csv", trace.str());
    if (r.primary()) b.file("solution.csv", solution_csv(r.primary()->u_star));

    if (r.status == SolveStatus::CertificationFailed) return b.finish(ExitCertificate, to_string(r.status));
    if (r.status == SolveStatus::NotConverged) return b.finish(ExitNotConverged, to_string(r.status));
    return b.finish(ExitPass, to_string(r.status));
}

inline int cmd_eigen(const RunConfig& cfg, const fs::path& out)
{
    Bundle b(out, "eigen", cfg);
    const auto mesh = build_mesh(cfg.mesh.domain(), cfg.mesh.n);
    const EigenPair e = first_eigenpair(mesh, cfg.problem.p, cfg.solver.eigen_tol);
    b.summary()["eigen"] = eigen_json(e);
    b.file("solution.csv", solution_csv(e.w_p));
    CsvTable trace({"iteration", "quotient"});
    for (std::size_t k = 0; k < e.history.size(); ++k) trace.add({std::to_string(k), format_double(e.history[k])});
    b.file("trace.csv", trace.str());
    return e.converged ? b.finish(ExitPass, "pass") : b.finish(ExitNotConverged, "not-converged");
}

inline int cmd_geometry(const RunConfig& cfg, const fs::path& out)
{
    Bundle b(out, "geometry", cfg);
    const Problem pr = make_problem(cfg);
    const EigenPair e = first_eigenpair(pr.mesh, pr.params.p, cfg.solver.eigen_tol);
    const EmbeddingConstants emb = estimate_embedding_constants(pr.mesh, pr.params.p, pr.params.q);
    GeometryCert cert = check_geometry(pr.params, emb.c1, emb.c2);
    if (cert.geometry_ok) choose_endpoints(pr.params, e, cert);
    b.summary()["eigen"] = eigen_json(e);
    b.summary()["embedding"] = embedding_json(emb);
    b.summary()["geometry"] = cert_json(cert);
    b.file("geometry.csv", geometry_csv(cert));
    return cert.geometry_ok ? b.finish(ExitPass, "pass") : b.finish(ExitCertificate, "certification-failed");
}

inline int cmd_equivalence(const RunConfig& cfg, const fs::path& out)
{
    Bundle b(out, "equivalence", cfg);
    const Problem pr = make_problem(cfg);
    EquivalenceOptions opt;
    opt.warm_start = cfg.equivalence.warm_start;
    if (cfg.equivalence.u_norm_cap) opt.u_norm_cap = *cfg.equivalence.u_norm_cap;
    opt.solve = pipeline_options(cfg);
    const DiscreteFunction f0 = cfg.equivalence.f0.build(pr.mesh);
    const EquivalenceTrace tr = run_equivalence_experiment(pr.params.homogeneous(), f0, cfg.equivalence.rho,
                                                           cfg.equivalence.steps, cfg.equivalence.tol, opt);
    b.summary()["equivalence"] = trace_json(tr);
    if (tr.iterates.size() >= 3) b.summary()["weak_limit"] = weak_limit_json(weak_limit_diagnostics(tr, pr.params, cfg.seed));
    b.file("trace.csv", equivalence_csv(tr));
    if (!tr.iterates.empty()) b.file("solution.csv", solution_csv(tr.u_limit));
    if (tr.steps.empty()) return b.finish(ExitCertificate, "certification-failed");
    return tr.passed ? b.finish(ExitPass, "pass") : b.finish(ExitNotConverged, "not-converged");
}

struct SweepRow {
    double p = 0.0, q = 0.0, lambda = 0.0;
    std::string status;
    std::string branch;
    bool geometry_ok = false;
    double r0 = NAN, c0 = NAN, lambda1 = NAN, lambda1_numeric = NAN, lambda2 = NAN;
    double critical_value = NAN, grad_residual = NAN, normalized_residual = NAN;
    std::string message;
};

inline SweepRow sweep_point(const RunConfig& cfg, double p, double q, double lambda)
{
    SweepRow row;
    row.p = p;
    row.q = q;
    row.lambda = lambda;
    try {
        RunConfig c = cfg;
        c.problem.p = p;
        c.problem.q = q;
        c.problem.lambda = lambda;
        const Problem pr = make_problem(c);
        pr.params.validate();
        const PipelineResult r = run_solve_pipeline(pr.params, pipeline_options(c));
        row.status = to_string(r.status);
        row.branch = to_string(r.cert.branch);
        row.geometry_ok = r.cert.geometry_ok;
        row.r0 = r.cert.r0;
        row.c0 = r.cert.c0;
        row.lambda1 = r.cert.lambda1;
        row.lambda1_numeric = r.cert.lambda1_numeric;
        row.lambda2 = r.cert.lambda2;
        if (const SolveResult* s = r.primary()) {
            row.critical_value = s->critical_value;
            row.grad_residual = s->grad_residual;
            row.normalized_residual = r.weak.normalized;
            row.message = s->message;
        } else {
            row.message = r.cert.failure;
        }
    } catch (const std::exception& e) {
        row.status = "invalid";
        row.message = e.what();
    }
    return row;
}

inline int cmd_sweep(const RunConfig& cfg, const fs::path& out)
{
    Bundle b(out, "sweep", cfg);
    std::vector<std::array<double, 3>> grid;
    for (double p : cfg.sweep.p)
        for (double q : cfg.sweep.q)
            for (double l : cfg.sweep.lambda) grid.push_back({p, q, l});

    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < grid.size(); k = next++) rows[k] = sweep_point(cfg, grid[k][0], grid[k][1], grid[k][2]);
    };
    const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(grid.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    CsvTable tab({"p", "q", "lambda", "branch", "status", "geometry_ok", "r0", "c0", "lambda1", "lambda1_numeric",
                  "lambda2", "critical_value", "grad_residual", "normalized_residual"});
    json js = json::array();
    for (const auto& r : rows) {
        tab.add({format_double(r.p), format_double(r.q), format_double(r.lambda), r.branch, r.status,
                 r.geometry_ok ? "1" : "0", format_double(r.r0), format_double(r.c0), format_double(r.lambda1),
                 format_double(r.lambda1_numeric), format_double(r.lambda2), format_double(r.critical_value),
                 format_double(r.grad_residual), format_double(r.normalized_residual)});
        js.push_back(json{{"p", num(r.p)},
                          {"q", num(r.q)},
                          {"lambda", num(r.lambda)},
                          {"branch", r.branch},
                          {"status", r.status},
                          {"geometry_ok", r.geometry_ok},
                          {"r0", num(r.r0)},
                          {"c0", num(r.c0)},
                          {"lambda1", num(r.lambda1)},
                          {"lambda1_numeric", num(r.lambda1_numeric)},
                          {"lambda2", num(r.lambda2)},
                          {"critical_value", num(r.critical_value)},
                          {"grad_residual", num(r.grad_residual)},
                          {"normalized_residual", num(r.normalized_residual)},
                          {"message", r.message}});
    }
    b.summary()["rows"] = js;
    b.file("trace.csv", tab.str());
    return b.finish(ExitPass, "pass");
}

inline std::string format_config_error(const ConfigError& e, const std::string& file)
{
    std::string s = file;
    if (e.line() > 0) s += ":" + std::to_string(e.line());
    s += ": ";
    if (!e.path().empty()) s += e.dotted() + ": ";
    return s + e.what();
}

/// Entry point shared by the executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& err = std::cerr)
{
    CLI::App app{"p-Laplacian Lane-Emden variational solver"};
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "random seed (overrides the config)");
    };
    std::vector<std::pair<CLI::App*, int (*)(const RunConfig&, const fs::path&)>> subs;
    subs.emplace_back(app.add_subcommand("solve", "eigen, certificate, endpoints and critical-point solve"), &cmd_solve);
    subs.emplace_back(app.add_subcommand("eigen", "first eigenpair of the p-Laplacian"), &cmd_eigen);
    subs.emplace_back(app.add_subcommand("geometry", "mountain-pass geometry certificate"), &cmd_geometry);
    subs.emplace_back(app.add_subcommand("equivalence", "vanishing-forcing experiment"), &cmd_equivalence);
    subs.emplace_back(app.add_subcommand("sweep", "grid over (p, q, lambda)"), &cmd_sweep);
    for (auto& [sub, fn] : subs) add_common(sub);
    subs.back().first->add_option("--workers", workers, "concurrent grid points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return ExitPass;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return ExitConfig;
    }

    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << format_config_error(e, config_path) << "\n";
        return ExitConfig;
    }
    if (seed) cfg.seed = *seed;
    if (workers) {
        if (*workers < 1) {
            err << "--workers must be at least 1\n";
            return ExitConfig;
        }
        cfg.workers = *workers;
    }

    for (auto& [sub, fn] : subs) {
        if (!sub->parsed()) continue;
        try {
            return fn(cfg, out_dir);
        } catch (const InvalidArgument& e) {
            err << config_path << ": " << e.what() << "\n";
            return ExitConfig;
        }
    }
    return ExitConfig;
}

} // namespace plap::cli
