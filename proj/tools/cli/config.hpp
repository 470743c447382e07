#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/functional.hpp"
#include "plap/mesh.hpp"

namespace plap::cli {

using nlohmann::json;

/// Config problem with the JSON path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::vector<std::string> path, const std::string& what, int line = 0)
        : std::runtime_error(what), path_(std::move(path)), line_(line)
    {}
    const std::vector<std::string>& path() const { return path_; }
    int line() const { return line_; }
    void set_line(int l) { line_ = l; }

    std::string dotted() const
    {
        std::string s;
        for (const auto& p : path_) s += (s.empty() ? "" : ".") + p;
        return s;
    }

private:
    std::vector<std::string> path_;
    int line_ = 0;
};

struct ForcingConfig {
    std::string type = "zero";      // zero | constant | sine | nodal
    double value = 1.0;             // constant value or sine amplitude
    std::vector<double> values;     // nodal coefficients

    DiscreteFunction build(const std::shared_ptr<const Mesh>& mesh) const;
};

struct MeshConfig {
    int dimension = 1;
    std::vector<std::array<double, 2>> bounds{{0.0, 1.0}};
    Index n = 128;

    DomainSpec domain() const
    {
        return dimension == 1 ? DomainSpec::interval(bounds[0][0], bounds[0][1])
                              : DomainSpec::rectangle(bounds[0][0], bounds[0][1], bounds[1][0], bounds[1][1]);
    }
};

struct ProblemConfig {
    double p = 2.0;
    double q = 4.0;
    double lambda = 1.0;
    double eps_reg = 1e-10;
    ForcingConfig forcing{};
};

struct SolverConfig {
    double tol = 1e-9;
    double verify_tol = 1e-6;
    double eigen_tol = 1e-10;
    int path_segments = 32;
    int max_sweeps = 2000;
    int max_iter = 20000;
    bool measure_mesh_slack = false;
};

struct EquivalenceConfig {
    double rho = 0.5;
    int steps = 12;
    double tol = 1e-6;
    bool warm_start = true;
    std::optional<double> u_norm_cap;
    ForcingConfig f0{"constant", 1.0, {}};
};

struct SweepConfig {
    std::vector<double> p{2.0};
    std::vector<double> q{1.5, 4.0};
    std::vector<double> lambda{0.1, 1.0};
};

struct RunConfig {
    MeshConfig mesh{};
    ProblemConfig problem{};
    SolverConfig solver{};
    EquivalenceConfig equivalence{};
    SweepConfig sweep{};
    std::uint64_t seed = 0;
    int workers = 1;
    bool record_wall_time = false;
};

inline DiscreteFunction ForcingConfig::build(const std::shared_ptr<const Mesh>& mesh) const
{
    if (type == "zero") return DiscreteFunction::zero(mesh);
    if (type == "constant") return DiscreteFunction::constant(mesh, value);
    if (type == "sine") {
        const DomainSpec d = mesh->domain();
        const int dim = mesh->dimension();
        const double a = value;
        return DiscreteFunction::interpolate(mesh, [d, dim, a](const Point& x) {
            double v = a;
            for (int k = 0; k < dim; ++k)
                v *= std::sin(3.14159265358979323846 * (x[k] - d.bounds[k][0]) / (d.bounds[k][1] - d.bounds[k][0]));
            return v;
        });
    }
    Vector c(static_cast<Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) c[static_cast<Index>(i)] = values[i];
    return {mesh, std::move(c)};
}

namespace detail {

using Path = std::vector<std::string>;

inline Path child(Path p, const std::string& k)
{
    p.push_back(k);
    return p;
}

inline void check_keys(const json& obj, const Path& path, std::initializer_list<const char*> allowed)
{
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError(child(path, it.key()), "unknown key '" + it.key() + "'");
    }
}

inline void read(const json& obj, const Path& path, const char* key, double& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(child(path, key), "expected a number");
    out = v.get<double>();
}

inline void read(const json& obj, const Path& path, const char* key, int& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(child(path, key), "expected an integer");
    out = v.get<int>();
}

inline void read(const json& obj, const Path& path, const char* key, Index& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(child(path, key), "expected an integer");
    out = v.get<Index>();
}

inline void read(const json& obj, const Path& path, const char* key, bool& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(child(path, key), "expected true or false");
    out = v.get<bool>();
}

inline void read(const json& obj, const Path& path, const char* key, std::uint64_t& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(child(path, key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
}

inline void read(const json& obj, const Path& path, const char* key, std::vector<double>& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const Path here = child(path, key);
    if (!v.is_array() || v.empty()) throw ConfigError(here, "expected a non-empty array of numbers");
    out.clear();
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(here, "expected a non-empty array of numbers");
        out.push_back(e.get<double>());
    }
}

inline void read_forcing(const json& obj, const Path& path, const char* key, ForcingConfig& out)
{
    if (!obj.contains(key)) return;
    const json& f = obj.at(key);
    const Path here = child(path, key);
    check_keys(f, here, {"type", "value", "values"});
    if (f.contains("type")) {
        if (!f.at("type").is_string()) throw ConfigError(child(here, "type"), "expected a string");
        out.type = f.at("type").get<std::string>();
    }
    if (out.type != "zero" && out.type != "constant" && out.type != "sine" && out.type != "nodal")
        throw ConfigError(child(here, "type"), "forcing type must be zero, constant, sine or nodal");
    read(f, here, "value", out.value);
    read(f, here, "values", out.values);
    if (out.type == "nodal" && out.values.empty()) throw ConfigError(child(here, "values"), "nodal forcing needs values");
}

inline void require(bool cond, const Path& path, const std::string& msg)
{
    if (!cond) throw ConfigError(path, msg);
}

/// Line (1-based) of the entry at `path`, found by scanning for the quoted
/// keys in order. 0 when not found.
inline int locate_line(const std::string& text, const Path& path)
{
    std::size_t pos = 0;
    bool found = false;
    for (const auto& key : path) {
        const std::size_t at = text.find("\"" + key + "\"", pos);
        if (at == std::string::npos) break;
        pos = at + 1;
        found = true;
    }
    if (!found) return 0;
    int line = 1;
    for (std::size_t i = 0; i < pos && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

inline int line_of_offset(const std::string& text, std::size_t offset)
{
    int line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

} // namespace detail

inline RunConfig parse_config_json(const json& doc)
{
    using namespace detail;
    RunConfig c;
    const Path root;
    check_keys(doc, root, {"mesh", "problem", "solver", "equivalence", "sweep", "seed", "workers", "record_wall_time"});

    if (doc.contains("mesh")) {
        const json& m = doc.at("mesh");
        const Path mp{"mesh"};
        check_keys(m, mp, {"dimension", "domain", "n"});
        read(m, mp, "dimension", c.mesh.dimension);
        require(c.mesh.dimension == 1 || c.mesh.dimension == 2, child(mp, "dimension"), "dimension must be 1 or 2");
        if (m.contains("domain")) {
            const json& d = m.at("domain");
            const Path dp = child(mp, "domain");
            require(d.is_array(), dp, "domain must be an array of [lo, hi] pairs");
            c.mesh.bounds.clear();
            for (const auto& pair : d) {
                require(pair.is_array() && pair.size() == 2 && pair[0].is_number() && pair[1].is_number(), dp,
                        "domain must be an array of [lo, hi] pairs");
                c.mesh.bounds.push_back({pair[0].get<double>(), pair[1].get<double>()});
            }
        } else {
            c.mesh.bounds.assign(static_cast<std::size_t>(c.mesh.dimension), {0.0, 1.0});
        }
        require(static_cast<int>(c.mesh.bounds.size()) == c.mesh.dimension, child(mp, "domain"),
                "domain needs one [lo, hi] pair per dimension");
        for (const auto& b : c.mesh.bounds) require(b[0] < b[1], child(mp, "domain"), "each domain pair needs lo < hi");
        read(m, mp, "n", c.mesh.n);
        require(c.mesh.n >= 2, child(mp, "n"), "n must be at least 2");
    }

    if (doc.contains("problem")) {
        const json& p = doc.at("problem");
        const Path pp{"problem"};
        check_keys(p, pp, {"p", "q", "lambda", "eps_reg", "forcing"});
        read(p, pp, "p", c.problem.p);
        read(p, pp, "q", c.problem.q);
        read(p, pp, "lambda", c.problem.lambda);
        read(p, pp, "eps_reg", c.problem.eps_reg);
        read_forcing(p, pp, "forcing", c.problem.forcing);
    }
    {
        const Path pp{"problem"};
        const double p = c.problem.p, q = c.problem.q;
        require(p > 1.0, child(pp, "p"), "p must exceed 1");
        require(q > 1.0, child(pp, "q"), "q must exceed 1");
        require(std::abs(q - p) >= ProblemParams::resonance_gap, child(pp, "q"),
                "q must differ from p (q = p is the resonant eigenvalue case)");
        if (q > p) {
            const double ps = critical_sobolev_exponent(c.mesh.dimension, p);
            require(q < ps, child(pp, "q"), "q must lie below the critical Sobolev exponent p* = " + std::to_string(ps));
        }
        require(c.problem.lambda > 0.0, child(pp, "lambda"), "lambda must be positive");
        require(c.problem.eps_reg >= 0.0, child(pp, "eps_reg"), "eps_reg must be non-negative");
    }

    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        const Path sp{"solver"};
        check_keys(s, sp, {"tol", "verify_tol", "eigen_tol", "path_segments", "max_sweeps", "max_iter", "measure_mesh_slack"});
        read(s, sp, "tol", c.solver.tol);
        read(s, sp, "verify_tol", c.solver.verify_tol);
        read(s, sp, "eigen_tol", c.solver.eigen_tol);
        read(s, sp, "path_segments", c.solver.path_segments);
        read(s, sp, "max_sweeps", c.solver.max_sweeps);
        read(s, sp, "max_iter", c.solver.max_iter);
        read(s, sp, "measure_mesh_slack", c.solver.measure_mesh_slack);
        require(c.solver.tol > 0.0, child(sp, "tol"), "tol must be positive");
        require(c.solver.verify_tol > 0.0, child(sp, "verify_tol"), "verify_tol must be positive");
        require(c.solver.eigen_tol > 0.0, child(sp, "eigen_tol"), "eigen_tol must be positive");
        require(c.solver.path_segments >= 8, child(sp, "path_segments"), "path_segments must be at least 8");
        require(c.solver.max_sweeps >= 1, child(sp, "max_sweeps"), "max_sweeps must be at least 1");
        require(c.solver.max_iter >= 1, child(sp, "max_iter"), "max_iter must be at least 1");
    }

    if (doc.contains("equivalence")) {
        const json& e = doc.at("equivalence");
        const Path ep{"equivalence"};
        check_keys(e, ep, {"rho", "steps", "tol", "warm_start", "u_norm_cap", "f0"});
        read(e, ep, "rho", c.equivalence.rho);
        read(e, ep, "steps", c.equivalence.steps);
        read(e, ep, "tol", c.equivalence.tol);
        read(e, ep, "warm_start", c.equivalence.warm_start);
        if (e.contains("u_norm_cap") && !e.at("u_norm_cap").is_null()) {
            double cap = 0.0;
            read(e, ep, "u_norm_cap", cap);
            require(cap > 0.0, child(ep, "u_norm_cap"), "u_norm_cap must be positive");
            c.equivalence.u_norm_cap = cap;
        }
        read_forcing(e, ep, "f0", c.equivalence.f0);
        require(c.equivalence.rho > 0.0 && c.equivalence.rho < 1.0, child(ep, "rho"), "rho must lie in (0, 1)");
        require(c.equivalence.steps >= 3, child(ep, "steps"), "steps must be at least 3");
        require(c.equivalence.tol > 0.0, child(ep, "tol"), "tol must be positive");
    }

    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        const Path sp{"sweep"};
        check_keys(s, sp, {"p", "q", "lambda"});
        read(s, sp, "p", c.sweep.p);
        read(s, sp, "q", c.sweep.q);
        read(s, sp, "lambda", c.sweep.lambda);
        for (double v : c.sweep.p) require(v > 1.0, child(sp, "p"), "every p must exceed 1");
        for (double v : c.sweep.q) require(v > 1.0, child(sp, "q"), "every q must exceed 1");
        for (double v : c.sweep.lambda) require(v > 0.0, child(sp, "lambda"), "every lambda must be positive");
    }

    read(doc, root, "seed", c.seed);
    read(doc, root, "workers", c.workers);
    require(c.workers >= 1, {"workers"}, "workers must be at least 1");
    read(doc, root, "record_wall_time", c.record_wall_time);

    const auto nodes = [&] {
        Index n1 = c.mesh.n + 1;
        return c.mesh.dimension == 1 ? n1 : n1 * n1;
    }();
    if (c.problem.forcing.type == "nodal")
        require(static_cast<Index>(c.problem.forcing.values.size()) == nodes, {"problem", "forcing", "values"},
                "nodal forcing needs one value per mesh node (" + std::to_string(nodes) + ")");
    if (c.equivalence.f0.type == "nodal")
        require(static_cast<Index>(c.equivalence.f0.values.size()) == nodes, {"equivalence", "f0", "values"},
                "nodal forcing needs one value per mesh node (" + std::to_string(nodes) + ")");
    return c;
}

/// Parses config text; errors carry the line of the offending entry.
inline RunConfig parse_config_text(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({}, std::string("malformed JSON: ") + e.what(), detail::line_of_offset(text, e.byte));
    }
    try {
        return parse_config_json(doc);
    } catch (ConfigError& e) {
        e.set_line(detail::locate_line(text, e.path()));
        throw;
    }
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError({}, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline json forcing_to_json(const ForcingConfig& f)
{
    json j{{"type", f.type}, {"value", f.value}};
    if (f.type == "nodal") j["values"] = f.values;
    return j;
}

/// Fully resolved config, defaults included.
inline json config_to_json(const RunConfig& c)
{
    json bounds = json::array();
    for (const auto& b : c.mesh.bounds) bounds.push_back({b[0], b[1]});
    return json{
        {"mesh", {{"dimension", c.mesh.dimension}, {"domain", bounds}, {"n", c.mesh.n}}},
        {"problem",
         {{"p", c.problem.p},
          {"q", c.problem.q},
          {"lambda", c.problem.lambda},
          {"eps_reg", c.problem.eps_reg},
          {"forcing", forcing_to_json(c.problem.forcing)}}},
        {"solver",
         {{"tol", c.solver.tol},
          {"verify_tol", c.solver.verify_tol},
          {"eigen_tol", c.solver.eigen_tol},
          {"path_segments", c.solver.path_segments},
          {"max_sweeps", c.solver.max_sweeps},
          {"max_iter", c.solver.max_iter},
          {"measure_mesh_slack", c.solver.measure_mesh_slack}}},
        {"equivalence",
         {{"rho", c.equivalence.rho},
          {"steps", c.equivalence.steps},
          {"tol", c.equivalence.tol},
          {"warm_start", c.equivalence.warm_start},
          {"u_norm_cap", c.equivalence.u_norm_cap ? json(*c.equivalence.u_norm_cap) : json(nullptr)},
          {"f0", forcing_to_json(c.equivalence.f0)}}},
        {"sweep", {{"p", c.sweep.p}, {"q", c.sweep.q}, {"lambda", c.sweep.lambda}}},
        {"seed", c.seed},
        {"workers", c.workers},
        {"record_wall_time", c.record_wall_time},
    };
}

} // namespace plap::cli
