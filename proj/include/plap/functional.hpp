#pragma once

/*
 * Energy functionals of the p-Laplacian Lane-Emden problem
 *
 *     -div(|grad u|^{p-2} grad u) = lambda |u|^{q-2} u + f,   u = 0 on the boundary,
 *
 *     J(u)   = (1/p) int |grad u|^p - (lambda/q) int |u|^q - int f u
 *     J_q(u) = -J(u) for q < p,   J(u) for q > p
 *
 * together with the weak-form residual <J'(u), phi_i>, the nonlinear form
 *
 *     B[u, v] = int |grad u|^{p-2} grad u . grad v - lambda int |u|^{q-2} u v,
 *
 * and the energy identity
 *
 *     (p - q)/p |u|_{1,p}^p = <J'(u), u> - q J(u) - (q - 1) int f u.
 *
 * All integrals use element-constant gradients and the module-wide
 * quadrature rule, so the assembled gradient is the exact derivative of the
 * discrete energy.
 */

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "plap/errors.hpp"
#include "plap/function_space.hpp"
#include "plap/mesh.hpp"

namespace plap {

inline double critical_sobolev_exponent(int dimension, double p)
{
    const double n = static_cast<double>(dimension);
    if (p < n) return n * p / (n - p);
    return std::numeric_limits<double>::infinity();
}

enum class Branch { Sublinear, Superlinear };

inline const char* to_string(Branch b) { return b == Branch::Sublinear ? "sublinear" : "superlinear"; }

struct ProblemParams {
    double p = 2.0;
    double q = 4.0;
    double lambda = 1.0;
    DiscreteFunction f;      // nodal forcing; identically zero for the homogeneous problem
    double eps_reg = 1e-10;  // only applied when p < 2

    static constexpr double resonance_gap = 1e-8;

    static ProblemParams make(std::shared_ptr<const Mesh> mesh, double p, double q, double lambda)
    {
        ProblemParams pp;
        pp.p = p;
        pp.q = q;
        pp.lambda = lambda;
        pp.f = DiscreteFunction::zero(std::move(mesh));
        return pp;
    }

    ProblemParams with_forcing(DiscreteFunction forcing) const
    {
        ProblemParams out = *this;
        out.f = std::move(forcing);
        return out;
    }

    ProblemParams homogeneous() const { return with_forcing(DiscreteFunction::zero(f.mesh_ptr())); }

    const std::shared_ptr<const Mesh>& mesh_ptr() const { return f.mesh_ptr(); }
    const Mesh& mesh() const { return f.mesh(); }

    double critical_exponent() const { return critical_sobolev_exponent(mesh().dimension(), p); }
    Branch branch() const { return q < p ? Branch::Sublinear : Branch::Superlinear; }
    /// Sign relating J_q to J.
    double jq_sign() const { return q < p ? -1.0 : 1.0; }
    double effective_eps() const { return p < 2.0 ? eps_reg : 0.0; }
    bool has_forcing() const { return !f.is_zero(); }

    void validate() const
    {
        if (!f.mesh_ptr()) throw InvalidArgument("problem parameters carry no mesh");
        if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("p must satisfy p > 1");
        if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must satisfy q > 1");
        if (std::abs(q - p) < resonance_gap)
            throw InvalidArgument("q must differ from p (q in (1,p) or (p,p*)); q = p is the resonant eigenvalue case");
        const double pstar = critical_exponent();
        if (q > p && !(q < pstar)) {
            std::ostringstream os;
            os << "q must lie below the critical exponent p* = " << pstar << " for p = " << p;
            throw InvalidArgument(os.str());
        }
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
        if (!(eps_reg >= 0.0)) throw InvalidArgument("eps_reg must be non-negative");
    }
};

namespace assembly {

/// Exponents and coefficient of the form
///   int |grad u|^{p-2} grad u . grad v - lambda int |u|^{q-2} u v.
/// No validation: the eigen path instantiates q == p.
struct FormCoefficients {
    double p = 2.0;
    double q = 2.0;
    double lambda = 0.0;
    double eps = 0.0;
};

/// sign(t) |t|^e, continuous at 0 for e > 0.
inline double signed_pow(double t, double e)
{
    if (t == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(t), e), t);
}

/// |g|^{p-2} g, with |g|^2 replaced by |g|^2 + eps^2 inside the weight.
inline Point flux(const Point& g, double p, double eps)
{
    const double n2 = detail::dot(g, g);
    double w;
    if (eps > 0.0) {
        w = std::pow(n2 + eps * eps, 0.5 * (p - 2.0));
    } else {
        if (n2 == 0.0) return {0.0, 0.0};
        w = std::pow(n2, 0.5 * (p - 2.0));
    }
    return {w * g[0], w * g[1]};
}

inline double dirichlet_integral(const DiscreteFunction& u, double p)
{
    double s = 0.0;
    for (const auto& e : u.mesh().elements()) {
        const Point g = detail::element_gradient(e, u.coeffs());
        s += e.measure * std::pow(detail::dot(g, g), 0.5 * p);
    }
    return s;
}

inline void zero_boundary(const Mesh& mesh, Vector& r)
{
    for (Index i = 0; i < r.size(); ++i)
        if (mesh.is_boundary(i)) r[i] = 0.0;
}

/// r_i = int |grad u|^{p-2} grad u . grad phi_i  (boundary rows zeroed)
inline Vector dirichlet_residual(const DiscreteFunction& u, double p, double eps)
{
    const Mesh& mesh = u.mesh();
    Vector r = Vector::Zero(u.size());
    for (const auto& e : mesh.elements()) {
        const Point fl = flux(detail::element_gradient(e, u.coeffs()), p, eps);
        for (int k = 0; k < e.vertex_count; ++k) r[e.nodes[k]] += e.measure * detail::dot(fl, e.basis_grad[k]);
    }
    zero_boundary(mesh, r);
    return r;
}

/// r_i = int |u|^{q-2} u phi_i  (boundary rows zeroed)
inline Vector power_residual(const DiscreteFunction& u, double q)
{
    const Mesh& mesh = u.mesh();
    Vector r = Vector::Zero(u.size());
    detail::for_each_quadrature_point(mesh, [&](const Element& e, double w, const std::array<double, 3>& b) {
        const double s = w * signed_pow(detail::value_at(e, b, u.coeffs()), q - 1.0);
        for (int k = 0; k < e.vertex_count; ++k) r[e.nodes[k]] += s * b[k];
    });
    zero_boundary(mesh, r);
    return r;
}

/// r_i = int f phi_i  (boundary rows zeroed)
inline Vector load_vector(const DiscreteFunction& f)
{
    const Mesh& mesh = f.mesh();
    Vector r = Vector::Zero(f.size());
    detail::for_each_quadrature_point(mesh, [&](const Element& e, double w, const std::array<double, 3>& b) {
        const double s = w * detail::value_at(e, b, f.coeffs());
        for (int k = 0; k < e.vertex_count; ++k) r[e.nodes[k]] += s * b[k];
    });
    zero_boundary(mesh, r);
    return r;
}

/// Interior rows of B[u, phi_i].
inline Vector b_form_rows(const DiscreteFunction& u, const FormCoefficients& c)
{
    Vector r = dirichlet_residual(u, c.p, c.eps);
    if (c.lambda != 0.0) r -= c.lambda * power_residual(u, c.q);
    return r;
}

/// B[u, v] evaluated directly as integrals (v need not vanish on the boundary).
inline double b_form(const DiscreteFunction& u, const DiscreteFunction& v, const FormCoefficients& c)
{
    u.check(v);
    double grad_part = 0.0;
    for (const auto& e : u.mesh().elements()) {
        const Point fl = flux(detail::element_gradient(e, u.coeffs()), c.p, c.eps);
        grad_part += e.measure * detail::dot(fl, detail::element_gradient(e, v.coeffs()));
    }
    double power_part = 0.0;
    detail::for_each_quadrature_point(u.mesh(), [&](const Element& e, double w, const std::array<double, 3>& b) {
        power_part += w * signed_pow(detail::value_at(e, b, u.coeffs()), c.q - 1.0) * detail::value_at(e, b, v.coeffs());
    });
    return grad_part - c.lambda * power_part;
}

inline FormCoefficients coefficients(const ProblemParams& pp) { return {pp.p, pp.q, pp.lambda, pp.effective_eps()}; }

} // namespace assembly

struct EnergyReport {
    double j_value = 0.0;
    double jq_value = 0.0;
    double grad_norm = 0.0;    // max_i |<J'(u), phi_i>|
    double grad_l2 = 0.0;      // Euclidean norm of the nodal residual
    double seminorm = 0.0;     // |u|_{1,p}
    double lq_q = 0.0;         // int |u|^q
    double f_pairing = 0.0;    // int f u
};

/// J(u) alone (no gradient assembly).
inline double energy_value(const DiscreteFunction& u, const ProblemParams& params)
{
    const double n = assembly::dirichlet_integral(u, params.p);
    const double d = integral_abs_pow(u, params.q);
    const double fu = params.has_forcing() ? dual_pairing(params.f, u) : 0.0;
    return n / params.p - params.lambda * d / params.q - fu;
}

inline double energy_jq(const DiscreteFunction& u, const ProblemParams& params)
{
    return params.jq_sign() * energy_value(u, params);
}

/// Nodal field g_i = <J'(u), phi_i>, zero at boundary nodes.
inline DiscreteFunction assemble_gradient(const DiscreteFunction& u, const ProblemParams& params)
{
    params.validate();
    u.check(params.f);
    Vector g = assembly::b_form_rows(u, assembly::coefficients(params));
    if (params.has_forcing()) g -= assembly::load_vector(params.f);
    return {u.mesh_ptr(), std::move(g)};
}

inline EnergyReport eval_energy(const DiscreteFunction& u, const ProblemParams& params)
{
    params.validate();
    u.check(params.f);
    EnergyReport r;
    const double n = assembly::dirichlet_integral(u, params.p);
    r.seminorm = std::pow(n, 1.0 / params.p);
    r.lq_q = integral_abs_pow(u, params.q);
    r.f_pairing = params.has_forcing() ? dual_pairing(params.f, u) : 0.0;
    r.j_value = n / params.p - params.lambda * r.lq_q / params.q - r.f_pairing;
    r.jq_value = params.jq_sign() * r.j_value;
    const DiscreteFunction g = assemble_gradient(u, params);
    r.grad_norm = residual_max(g.coeffs());
    r.grad_l2 = g.coeffs().norm();
    return r;
}

inline double eval_B(const DiscreteFunction& u, const DiscreteFunction& v, const ProblemParams& params)
{
    params.validate();
    u.check(params.f);
    return assembly::b_form(u, v, assembly::coefficients(params));
}

/// |(p-q)/p |u|^p - (<J'(u),u> - q J(u) - (q-1) int f u)|
inline double palais_smale_identity_residual(const DiscreteFunction& u, const ProblemParams& params)
{
    const double n = assembly::dirichlet_integral(u, params.p);
    const double d = integral_abs_pow(u, params.q);
    const double fu = params.has_forcing() ? dual_pairing(params.f, u) : 0.0;
    const double j = n / params.p - params.lambda * d / params.q - fu;
    const double pairing = assemble_gradient(u, params).coeffs().dot(u.coeffs());
    const double lhs = (params.p - params.q) / params.p * n;
    const double rhs = pairing - params.q * j - (params.q - 1.0) * fu;
    return std::abs(lhs - rhs);
}

/// Hoelder/embedding bound on |<J'(u), v>|:
///   (|u|_{1,p}^{p-1} + lambda ||u||_q^{q-1} c2^{1/q} + ||f||_{p'} c1^{1/p}) |v|_{1,p}
/// where c1 >= ||w||_p^p and c2 >= ||w||_q^q on the unit sphere |w|_{1,p} = 1.
inline double derivative_bound(const DiscreteFunction& u, const DiscreteFunction& v, const ProblemParams& params,
                               double c1, double c2)
{
    const double p = params.p, q = params.q;
    const double grad_term = std::pow(seminorm_w1p(u, p), p - 1.0);
    const double power_term = params.lambda * std::pow(norm_lq(u, q), q - 1.0) * std::pow(c2, 1.0 / q);
    const double force_term = params.has_forcing() ? norm_lq(params.f, conjugate_exponent(p)) * std::pow(c1, 1.0 / p) : 0.0;
    return (grad_term + power_term + force_term) * seminorm_w1p(v, p);
}

} // namespace plap
