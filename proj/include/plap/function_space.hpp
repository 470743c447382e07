#pragma once

/*
 * Discrete members of W_0^{1,p} (continuous piecewise-linear nodal fields)
 * and the norms and pairings evaluated on them.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "plap/errors.hpp"
#include "plap/mesh.hpp"

namespace plap {

using Vector = Eigen::VectorXd;

class DiscreteFunction {
public:
    DiscreteFunction() = default;

    explicit DiscreteFunction(std::shared_ptr<const Mesh> mesh)
        : mesh_(std::move(mesh)), coeffs_(Vector::Zero(mesh_->node_count()))
    {}

    DiscreteFunction(std::shared_ptr<const Mesh> mesh, Vector coeffs)
        : mesh_(std::move(mesh)), coeffs_(std::move(coeffs))
    {
        if (coeffs_.size() != mesh_->node_count())
            throw InvalidArgument("coefficient count does not match the mesh node count");
    }

    static DiscreteFunction zero(std::shared_ptr<const Mesh> mesh) { return DiscreteFunction(std::move(mesh)); }

    static DiscreteFunction constant(std::shared_ptr<const Mesh> mesh, double value)
    {
        Vector c = Vector::Constant(mesh->node_count(), value);
        return {std::move(mesh), std::move(c)};
    }

    /// Nodal interpolant of g. Boundary values are kept as evaluated; call
    /// with_boundary_zeroed() to obtain a W_0^{1,p} member.
    static DiscreteFunction interpolate(std::shared_ptr<const Mesh> mesh, const std::function<double(const Point&)>& g)
    {
        Vector c(mesh->node_count());
        for (Index i = 0; i < mesh->node_count(); ++i) c[i] = g(mesh->nodes()[static_cast<std::size_t>(i)]);
        return {std::move(mesh), std::move(c)};
    }

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    const Vector& coeffs() const { return coeffs_; }
    Vector& coeffs() { return coeffs_; }
    Index size() const { return coeffs_.size(); }
    double operator[](Index i) const { return coeffs_[i]; }

    bool same_mesh(const DiscreteFunction& other) const { return mesh_ == other.mesh_; }

    bool satisfies_boundary_mask() const
    {
        for (Index i = 0; i < size(); ++i)
            if (mesh_->is_boundary(i) && coeffs_[i] != 0.0) return false;
        return true;
    }

    DiscreteFunction with_boundary_zeroed() const
    {
        DiscreteFunction out = *this;
        for (Index i = 0; i < size(); ++i)
            if (mesh_->is_boundary(i)) out.coeffs_[i] = 0.0;
        return out;
    }

    bool is_zero() const { return coeffs_.isZero(0.0); }

    DiscreteFunction& operator+=(const DiscreteFunction& o)
    {
        check(o);
        coeffs_ += o.coeffs_;
        return *this;
    }
    DiscreteFunction& operator-=(const DiscreteFunction& o)
    {
        check(o);
        coeffs_ -= o.coeffs_;
        return *this;
    }
    DiscreteFunction& operator*=(double a)
    {
        coeffs_ *= a;
        return *this;
    }

    friend DiscreteFunction operator+(DiscreteFunction a, const DiscreteFunction& b) { return a += b; }
    friend DiscreteFunction operator-(DiscreteFunction a, const DiscreteFunction& b) { return a -= b; }
    friend DiscreteFunction operator*(double s, DiscreteFunction a) { return a *= s; }
    friend DiscreteFunction operator*(DiscreteFunction a, double s) { return a *= s; }

    /// a + s * b without the temporary.
    DiscreteFunction axpy(double s, const DiscreteFunction& b) const
    {
        check(b);
        return {mesh_, coeffs_ + s * b.coeffs_};
    }

    void check(const DiscreteFunction& o) const
    {
        if (mesh_ != o.mesh_) throw MeshMismatch();
    }

private:
    std::shared_ptr<const Mesh> mesh_;
    Vector coeffs_;
};

namespace detail {

inline Point element_gradient(const Element& e, const Vector& c)
{
    Point g{0.0, 0.0};
    for (int k = 0; k < e.vertex_count; ++k) {
        const double v = c[e.nodes[k]];
        g[0] += v * e.basis_grad[k][0];
        g[1] += v * e.basis_grad[k][1];
    }
    return g;
}

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

inline double value_at(const Element& e, const std::array<double, 3>& bary, const Vector& c)
{
    double v = 0.0;
    for (int k = 0; k < e.vertex_count; ++k) v += bary[k] * c[e.nodes[k]];
    return v;
}

/// Applies `visit(element, physical_weight, point_index)` at every quadrature
/// point of the module-wide rule.
template <class Visit>
void for_each_quadrature_point(const Mesh& mesh, Visit&& visit)
{
    const QuadratureRule& rule = default_rule(mesh.dimension());
    const double scale_ref = 1.0 / rule.reference_measure();
    for (const auto& e : mesh.elements()) {
        const double s = e.measure * scale_ref;
        for (std::size_t k = 0; k < rule.points.size(); ++k) visit(e, rule.weights[k] * s, rule.points[k]);
    }
}

} // namespace detail

/// Value of the P1 field u at a point of the (closed) domain.
inline double evaluate(const DiscreteFunction& u, const Point& x)
{
    const Mesh& m = u.mesh();
    const DomainSpec& d = m.domain();
    const Index n = m.subdivisions();
    auto locate = [n](double v, double a, double b, Index& cell) {
        const double s = (v - a) / (b - a) * static_cast<double>(n);
        if (!(s >= -1e-12) || !(s <= static_cast<double>(n) + 1e-12)) throw InvalidArgument("point outside the mesh domain");
        cell = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0, n - 1);
        return std::clamp(s - static_cast<double>(cell), 0.0, 1.0);
    };
    const Vector& c = u.coeffs();
    Index i = 0;
    const double s = locate(x[0], d.bounds[0][0], d.bounds[0][1], i);
    if (m.dimension() == 1) return (1.0 - s) * c[i] + s * c[i + 1];
    Index j = 0;
    const double t = locate(x[1], d.bounds[1][0], d.bounds[1][1], j);
    const Index stride = n + 1;
    const double sw = c[j * stride + i], se = c[j * stride + i + 1];
    const double nw = c[(j + 1) * stride + i], ne = c[(j + 1) * stride + i + 1];
    if (s >= t) return sw + s * (se - sw) + t * (ne - se);
    return sw + t * (nw - sw) + s * (ne - nw);
}

/// (sum_e |e| |grad u|^p)^{1/p}
inline double seminorm_w1p(const DiscreteFunction& u, double p)
{
    if (!(p > 1.0)) throw InvalidArgument("seminorm exponent p must exceed 1");
    double s = 0.0;
    for (const auto& e : u.mesh().elements()) {
        const Point g = detail::element_gradient(e, u.coeffs());
        s += e.measure * std::pow(std::sqrt(detail::dot(g, g)), p);
    }
    return std::pow(s, 1.0 / p);
}

/// integral of |u_h|^r, with |u_h| evaluated pointwise at quadrature points.
inline double integral_abs_pow(const DiscreteFunction& u, double r)
{
    double s = 0.0;
    detail::for_each_quadrature_point(u.mesh(), [&](const Element& e, double w, const std::array<double, 3>& b) {
        s += w * std::pow(std::abs(detail::value_at(e, b, u.coeffs())), r);
    });
    return s;
}

inline double norm_lq(const DiscreteFunction& u, double r)
{
    if (!(r >= 1.0)) throw InvalidArgument("L^r norm needs r >= 1");
    return std::pow(integral_abs_pow(u, r), 1.0 / r);
}

/// integral of f_h * v_h.
inline double dual_pairing(const DiscreteFunction& f, const DiscreteFunction& v)
{
    f.check(v);
    double s = 0.0;
    detail::for_each_quadrature_point(f.mesh(), [&](const Element& e, double w, const std::array<double, 3>& b) {
        s += w * detail::value_at(e, b, f.coeffs()) * detail::value_at(e, b, v.coeffs());
    });
    return s;
}

inline double conjugate_exponent(double p) { return p / (p - 1.0); }

/// Max-norm of a residual vector; +inf if any entry is not finite.
inline double residual_max(const Vector& r)
{
    return r.allFinite() ? r.lpNorm<Eigen::Infinity>() : std::numeric_limits<double>::infinity();
}

struct NormReport {
    double seminorm_1p = 0.0;
    std::map<double, double> lq_norms;
};

inline NormReport norms(const DiscreteFunction& u, double p, const std::vector<double>& exponents)
{
    NormReport r;
    r.seminorm_1p = seminorm_w1p(u, p);
    for (double e : exponents) r.lq_norms[e] = norm_lq(u, e);
    return r;
}

} // namespace plap
