#pragma once

/*
 * Structured meshes of an interval or an axis-aligned rectangle with
 * piecewise-linear conforming elements, plus the quadrature rules used to
 * integrate fields over them.
 *
 * Barycentric conventions: a segment element stores 2 node indices and a
 * quadrature point carries weights (l0, l1); a triangle stores 3 node indices
 * and a point carries (l0, l1, l2). The linear interpolant of nodal values at
 * a point is simply sum_k l_k * value[node_k].
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "plap/errors.hpp"

namespace plap {

using Index = std::ptrdiff_t;
using Point = std::array<double, 2>;

struct DomainSpec {
    int dimension = 1;
    // bounds[d] = {a_d, b_d}; only bounds[0] is read in 1D.
    std::array<std::array<double, 2>, 2> bounds = {{{0.0, 1.0}, {0.0, 1.0}}};

    static DomainSpec interval(double a, double b)
    {
        DomainSpec s;
        s.dimension = 1;
        s.bounds[0] = {a, b};
        return s;
    }
    static DomainSpec rectangle(double a1, double b1, double a2, double b2)
    {
        DomainSpec s;
        s.dimension = 2;
        s.bounds[0] = {a1, b1};
        s.bounds[1] = {a2, b2};
        return s;
    }

    double measure() const
    {
        double m = bounds[0][1] - bounds[0][0];
        if (dimension == 2) m *= bounds[1][1] - bounds[1][0];
        return m;
    }

    void validate() const
    {
        if (dimension != 1 && dimension != 2)
            throw InvalidArgument("domain dimension must be 1 or 2, got " + std::to_string(dimension));
        for (int d = 0; d < dimension; ++d) {
            const double a = bounds[d][0], b = bounds[d][1];
            if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
                throw InvalidArgument("domain bounds must satisfy a < b in every coordinate");
        }
    }
};

struct Element {
    std::array<Index, 3> nodes{};      // only the first `vertex_count` entries are used
    int vertex_count = 0;
    double measure = 0.0;              // length in 1D, area in 2D
    std::array<Point, 3> basis_grad{}; // constant gradient of each local hat function
};

class Mesh {
public:
    int dimension() const { return dimension_; }
    const DomainSpec& domain() const { return domain_; }
    Index subdivisions() const { return subdivisions_; }

    Index node_count() const { return static_cast<Index>(nodes_.size()); }
    Index element_count() const { return static_cast<Index>(elements_.size()); }

    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<bool>& boundary_mask() const { return boundary_; }
    bool is_boundary(Index i) const { return boundary_[static_cast<std::size_t>(i)]; }

    Index interior_count() const
    {
        Index c = 0;
        for (bool b : boundary_) c += b ? 0 : 1;
        return c;
    }

    double total_measure() const
    {
        double s = 0.0;
        for (const auto& e : elements_) s += e.measure;
        return s;
    }

    /// Maps a barycentric point of element `e` to physical coordinates.
    Point map_point(const Element& e, const std::array<double, 3>& bary) const
    {
        Point x{0.0, 0.0};
        for (int k = 0; k < e.vertex_count; ++k) {
            const Point& v = nodes_[static_cast<std::size_t>(e.nodes[k])];
            x[0] += bary[k] * v[0];
            x[1] += bary[k] * v[1];
        }
        return x;
    }

    friend std::shared_ptr<const Mesh> build_mesh(const DomainSpec& spec, Index n);

private:
    Mesh() = default;

    int dimension_ = 1;
    Index subdivisions_ = 0;
    DomainSpec domain_;
    std::vector<Point> nodes_;
    std::vector<Element> elements_;
    std::vector<bool> boundary_;
};

/// Uniform mesh with n subdivisions per axis. In 2D every grid cell is split
/// along its (lower-left, upper-right) diagonal.
inline std::shared_ptr<const Mesh> build_mesh(const DomainSpec& spec, Index n)
{
    spec.validate();
    if (n < 2) throw InvalidArgument("mesh needs at least 2 subdivisions per axis, got " + std::to_string(n));

    auto mesh = std::shared_ptr<Mesh>(new Mesh());
    mesh->dimension_ = spec.dimension;
    mesh->subdivisions_ = n;
    mesh->domain_ = spec;

    const double ax = spec.bounds[0][0], bx = spec.bounds[0][1];
    const double hx = (bx - ax) / static_cast<double>(n);
    constexpr double boundary_tol = 1e-12;
    auto on_bound = [&](double v, double a, double b) {
        return std::abs(v - a) <= boundary_tol || std::abs(v - b) <= boundary_tol;
    };

    if (spec.dimension == 1) {
        mesh->nodes_.reserve(static_cast<std::size_t>(n + 1));
        for (Index i = 0; i <= n; ++i) {
            // Pin the last node to the bound so the boundary test is exact.
            const double x = i == n ? bx : ax + hx * static_cast<double>(i);
            mesh->nodes_.push_back({x, 0.0});
            mesh->boundary_.push_back(on_bound(x, ax, bx));
        }
        for (Index i = 0; i < n; ++i) {
            Element e;
            e.vertex_count = 2;
            e.nodes = {i, i + 1, 0};
            const double len = mesh->nodes_[static_cast<std::size_t>(i + 1)][0] - mesh->nodes_[static_cast<std::size_t>(i)][0];
            e.measure = len;
            e.basis_grad[0] = {-1.0 / len, 0.0};
            e.basis_grad[1] = {1.0 / len, 0.0};
            mesh->elements_.push_back(e);
        }
        return mesh;
    }

    const double ay = spec.bounds[1][0], by = spec.bounds[1][1];
    const double hy = (by - ay) / static_cast<double>(n);
    const Index stride = n + 1;
    mesh->nodes_.reserve(static_cast<std::size_t>(stride * stride));
    for (Index j = 0; j <= n; ++j) {
        const double y = j == n ? by : ay + hy * static_cast<double>(j);
        for (Index i = 0; i <= n; ++i) {
            const double x = i == n ? bx : ax + hx * static_cast<double>(i);
            mesh->nodes_.push_back({x, y});
            mesh->boundary_.push_back(on_bound(x, ax, bx) || on_bound(y, ay, by));
        }
    }

    auto make_triangle = [&](Index a, Index b, Index c) {
        Element e;
        e.vertex_count = 3;
        e.nodes = {a, b, c};
        const Point& pa = mesh->nodes_[static_cast<std::size_t>(a)];
        const Point& pb = mesh->nodes_[static_cast<std::size_t>(b)];
        const Point& pc = mesh->nodes_[static_cast<std::size_t>(c)];
        const double det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
        e.measure = 0.5 * std::abs(det);
        // grad l_a = perp(c - b) / det, cyclic.
        e.basis_grad[0] = {(pb[1] - pc[1]) / det, (pc[0] - pb[0]) / det};
        e.basis_grad[1] = {(pc[1] - pa[1]) / det, (pa[0] - pc[0]) / det};
        e.basis_grad[2] = {(pa[1] - pb[1]) / det, (pb[0] - pa[0]) / det};
        mesh->elements_.push_back(e);
    };

    mesh->elements_.reserve(static_cast<std::size_t>(2 * n * n));
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            const Index sw = j * stride + i;
            const Index se = sw + 1;
            const Index nw = sw + stride;
            const Index ne = nw + 1;
            make_triangle(sw, se, ne);
            make_triangle(sw, ne, nw);
        }
    }
    return mesh;
}

/// Quadrature on the reference element; weights sum to the reference measure
/// (1 for the unit segment, 1/2 for the unit triangle).
struct QuadratureRule {
    int dimension = 1;
    int degree = 0;
    std::vector<std::array<double, 3>> points; // barycentric
    std::vector<double> weights;

    double reference_measure() const { return dimension == 1 ? 1.0 : 0.5; }

    /// Composite Simpson on a segment, exact through cubics.
    static QuadratureRule simpson()
    {
        return {1, 3, {{1.0, 0.0, 0.0}, {0.5, 0.5, 0.0}, {0.0, 1.0, 0.0}}, {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0}};
    }

    static QuadratureRule two_point_gauss()
    {
        const double s = 0.5 / std::sqrt(3.0);
        return {1, 3, {{0.5 + s, 0.5 - s, 0.0}, {0.5 - s, 0.5 + s, 0.0}}, {0.5, 0.5}};
    }

    static QuadratureRule midpoint(int dim)
    {
        if (dim == 1) return {1, 1, {{0.5, 0.5, 0.0}}, {1.0}};
        return {2, 1, {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}, {0.5}};
    }

    /// Edge-midpoint rule on a triangle, exact through quadratics.
    static QuadratureRule triangle_edge_midpoints()
    {
        const double w = 0.5 / 3.0;
        return {2, 2, {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}, {w, w, w}};
    }

    /// Radon's 7-point rule, exact through quintics, all weights positive.
    static QuadratureRule triangle_radon7()
    {
        const double r15 = std::sqrt(15.0);
        const double a1 = (6.0 - r15) / 21.0, b1 = 1.0 - 2.0 * a1;
        const double a2 = (6.0 + r15) / 21.0, b2 = 1.0 - 2.0 * a2;
        const double w0 = 9.0 / 40.0;
        const double w1 = (155.0 - r15) / 1200.0;
        const double w2 = (155.0 + r15) / 1200.0;
        QuadratureRule r{2, 5, {}, {}};
        r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                    {a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1},
                    {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}};
        r.weights = {w0, w1, w1, w1, w2, w2, w2};
        for (double& w : r.weights) w *= 0.5;
        return r;
    }
};

/// Rule used for every |u|^r and f*u integral in the library.
inline const QuadratureRule& default_rule(int dim)
{
    static const QuadratureRule rule1 = QuadratureRule::simpson();
    static const QuadratureRule rule2 = QuadratureRule::triangle_radon7();
    return dim == 1 ? rule1 : rule2;
}

/// sum over elements and points of weight * g(x).
inline double integrate(const Mesh& mesh, const QuadratureRule& rule, const std::function<double(const Point&)>& g)
{
    if (rule.dimension != mesh.dimension())
        throw InvalidArgument("quadrature rule dimension does not match the mesh");
    const double scale_ref = 1.0 / rule.reference_measure();
    double total = 0.0;
    for (const auto& e : mesh.elements()) {
        double local = 0.0;
        for (std::size_t k = 0; k < rule.points.size(); ++k)
            local += rule.weights[k] * g(mesh.map_point(e, rule.points[k]));
        total += local * e.measure * scale_ref;
    }
    return total;
}

} // namespace plap
