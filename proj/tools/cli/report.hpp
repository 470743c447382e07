#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "plap/equivalence.hpp"
#include "plap/geometry.hpp"
#include "plap/pipeline.hpp"

namespace plap::cli {

using nlohmann::json;

/// Shortest representation that round-trips; inf/nan spelled out.
inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// JSON number, or a string for values JSON cannot represent.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

inline void write_atomic(const std::filesystem::path& target, const std::string& contents)
{
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : columns_(header.size())
    {
        append_row(header);
    }

    void add(const std::vector<std::string>& cells)
    {
        if (cells.size() != columns_) throw std::logic_error("CSV row width mismatch");
        append_row(cells);
    }

    const std::string& str() const { return text_; }

private:
    void append_row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    std::size_t columns_;
    std::string text_;
};

inline std::string solution_csv(const DiscreteFunction& u)
{
    const Mesh& m = u.mesh();
    std::vector<std::string> header{"node_index", "x"};
    if (m.dimension() == 2) header.push_back("y");
    header.push_back("value");
    CsvTable t(header);
    for (Index i = 0; i < m.node_count(); ++i) {
        const Point& x = m.nodes()[static_cast<std::size_t>(i)];
        std::vector<std::string> row{std::to_string(i), format_double(x[0])};
        if (m.dimension() == 2) row.push_back(format_double(x[1]));
        row.push_back(format_double(u[i]));
        t.add(row);
    }
    return t.str();
}

inline std::string geometry_csv(const GeometryCert& cert)
{
    CsvTable t({"r", "F"});
    for (const auto& [r, f] : cert.f_samples) t.add({format_double(r), format_double(f)});
    return t.str();
}

inline json cert_json(const GeometryCert& c)
{
    return json{
        {"branch", to_string(c.branch)},
        {"c1", num(c.c1)},
        {"c2", num(c.c2)},
        {"forcing_norm", num(c.forcing_norm)},
        {"r0", num(c.r0)},
        {"F_r0", num(c.f_at_r0)},
        {"F_0", num(c.f_at_zero)},
        {"first_root", num(c.first_root)},
        {"second_root", num(c.second_root)},
        {"r_zero", num(c.r_zero)},
        {"lambda1", num(c.lambda1)},
        {"lambda1_derived", num(c.lambda1_derived)},
        {"lambda1_numeric", num(c.lambda1_numeric)},
        {"lambda2", num(c.lambda2)},
        {"lambda_prime", num(c.lambda_prime)},
        {"c_prime", num(c.c_prime)},
        {"c_double_prime", num(c.c_double_prime)},
        {"c0", num(c.c0)},
        {"k0", num(c.k0)},
        {"endpoint_regime", c.endpoint_regime},
        {"local_max_ok", c.local_max_ok},
        {"sign_pattern_ok", c.sign_pattern_ok},
        {"geometry_ok", c.geometry_ok},
        {"failure", c.failure},
        {"sample_count", c.f_samples.size()},
    };
}

inline json solve_json(const SolveResult& s, double p)
{
    json j{
        {"method", to_string(s.method)},
        {"converged", s.converged},
        {"critical_value", num(s.critical_value)},
        {"grad_residual", num(s.grad_residual)},
        {"iterations", s.iterations},
        {"u_norm", num(seminorm_w1p(s.u_star, p))},
        {"max_abs_value", num(s.u_star.coeffs().cwiseAbs().maxCoeff())},
        {"message", s.message},
    };
    if (s.method == Method::MountainPass) {
        j["polish_iterations"] = s.polish_iterations;
        j["path_points"] = s.final_path.points.size();
        j["at_endpoint"] = s.at_endpoint;
        j["path_max_first"] = s.path_history.empty() ? json(nullptr) : num(s.path_history.front());
        j["path_max_last"] = s.path_history.empty() ? json(nullptr) : num(s.path_history.back());
    }
    return j;
}

inline json weak_json(const WeakSolutionReport& w)
{
    return json{{"max_residual", num(w.max_residual)}, {"normalized", num(w.normalized)}, {"passed", w.passed}};
}

inline json eigen_json(const EigenPair& e)
{
    return json{{"lambda_p", num(e.lambda_p)},
                {"residual", num(e.residual)},
                {"iterations", e.iterations},
                {"converged", e.converged}};
}

inline json embedding_json(const EmbeddingConstants& e)
{
    return json{{"c1", num(e.c1)}, {"c2", num(e.c2)}, {"iterations", e.iterations}, {"converged", e.converged}};
}

inline json trace_json(const EquivalenceTrace& t)
{
    double max_norm = 0.0;
    for (const auto& s : t.steps) max_norm = std::max(max_norm, s.u_norm);
    return json{
        {"rho", num(t.rho)},
        {"steps_completed", t.steps.size()},
        {"b_form_residual", num(t.b_form_residual)},
        {"b_form_normalized", num(t.b_form_normalized)},
        {"limit_norm", num(t.limit_norm)},
        {"trivial_limit", t.trivial_limit},
        {"max_u_norm", num(max_norm)},
        {"norm_bound", num(t.norm_bound)},
        {"bounded", t.bounded},
        {"completed", t.completed},
        {"passed", t.passed},
        {"message", t.message},
    };
}

inline json weak_limit_json(const WeakLimitReport& r)
{
    json d = json::array(), g = json::array();
    for (double v : r.delta) d.push_back(num(v));
    for (double v : r.norm_gap) g.push_back(num(v));
    return json{
        {"delta", d},
        {"norm_gap", g},
        {"final_delta", num(r.final_delta)},
        {"penultimate_delta", num(r.penultimate_delta)},
        {"final_norm_gap", num(r.final_norm_gap)},
        {"penultimate_norm_gap", num(r.penultimate_norm_gap)},
        {"delta_decreasing", r.delta_decreasing},
        {"norm_gap_decreasing", r.norm_gap_decreasing},
    };
}

inline std::string equivalence_csv(const EquivalenceTrace& t)
{
    CsvTable tab({"n", "f_norm", "u_norm", "hom_residual", "hom_residual_raw", "step_distance", "grad_residual",
                  "iterations", "converged"});
    for (const auto& s : t.steps)
        tab.add({std::to_string(s.n), format_double(s.f_norm), format_double(s.u_norm), format_double(s.hom_residual),
                 format_double(s.hom_residual_raw), format_double(s.step_distance), format_double(s.grad_residual),
                 std::to_string(s.iterations), s.converged ? "1" : "0"});
    return tab.str();
}

} // namespace plap::cli
