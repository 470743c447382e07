#pragma once

/*
 * Weighted H^1_0 inner products used to turn nodal residuals into descent
 * directions (Sobolev gradients).
 *
 * For a field u and exponent p the element weights are
 *     w_e = (p - 1) (|grad u_e|^2 + s^2)^{(p-2)/2},
 * i.e. the 1D second variation of (1/p) int |grad u|^p with a floor s
 * proportional to the RMS gradient. At p = 2 this is the plain stiffness
 * matrix of the Dirichlet Laplacian.
 */

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

#include "plap/function_space.hpp"
#include "plap/mesh.hpp"

namespace plap {

class SobolevMetric {
public:
    explicit SobolevMetric(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh))
    {
        dof_of_node_.assign(static_cast<std::size_t>(mesh_->node_count()), -1);
        Index next = 0;
        for (Index i = 0; i < mesh_->node_count(); ++i)
            if (!mesh_->is_boundary(i)) dof_of_node_[static_cast<std::size_t>(i)] = next++;
        dofs_ = next;
    }

    const Mesh& mesh() const { return *mesh_; }

    Vector weights_for(const DiscreteFunction& u, double p) const
    {
        const auto& els = mesh_->elements();
        Vector grad2(static_cast<Index>(els.size()));
        for (std::size_t k = 0; k < els.size(); ++k) {
            const Point g = detail::element_gradient(els[k], u.coeffs());
            grad2[static_cast<Index>(k)] = detail::dot(g, g);
        }
        if (p == 2.0) return Vector::Ones(grad2.size());
        if (!(grad2.mean() > 0.0)) return Vector::Constant(grad2.size(), p - 1.0);
        const double floor2 = (p > 2.0 ? 1e-4 : 1e-12) * grad2.mean();
        Vector w(grad2.size());
        for (Index k = 0; k < w.size(); ++k) w[k] = (p - 1.0) * std::pow(grad2[k] + floor2, 0.5 * (p - 2.0));
        return w;
    }

    /// y = K_w x over interior rows (boundary entries of x are ignored).
    Vector apply(const Vector& x, const Vector& weights) const
    {
        Vector y = Vector::Zero(x.size());
        const auto& els = mesh_->elements();
        for (std::size_t k = 0; k < els.size(); ++k) {
            const Element& e = els[k];
            Point g{0.0, 0.0};
            for (int a = 0; a < e.vertex_count; ++a) {
                const Index n = e.nodes[a];
                if (mesh_->is_boundary(n)) continue;
                g[0] += x[n] * e.basis_grad[a][0];
                g[1] += x[n] * e.basis_grad[a][1];
            }
            const double s = weights[static_cast<Index>(k)] * e.measure;
            for (int a = 0; a < e.vertex_count; ++a) {
                const Index n = e.nodes[a];
                if (!mesh_->is_boundary(n)) y[n] += s * detail::dot(g, e.basis_grad[a]);
            }
        }
        return y;
    }

    /// Solves K_w y = rhs on interior nodes; boundary entries of y are zero.
    Vector solve(const Vector& rhs, const Vector& weights)
    {
        factorize(weights);
        Vector b(dofs_);
        for (Index i = 0; i < mesh_->node_count(); ++i) {
            const Index d = dof_of_node_[static_cast<std::size_t>(i)];
            if (d >= 0) b[d] = rhs[i];
        }
        const Vector x = solver_.solve(b);
        Vector y = Vector::Zero(rhs.size());
        for (Index i = 0; i < mesh_->node_count(); ++i) {
            const Index d = dof_of_node_[static_cast<std::size_t>(i)];
            if (d >= 0) y[i] = x[d];
        }
        return y;
    }

    double inner(const Vector& x, const Vector& y, const Vector& weights) const { return apply(x, weights).dot(y); }

private:
    void factorize(const Vector& weights)
    {
        if (factored_ && weights.size() == last_weights_.size() && weights == last_weights_) return;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(mesh_->elements().size() * 9);
        const auto& els = mesh_->elements();
        for (std::size_t k = 0; k < els.size(); ++k) {
            const Element& e = els[k];
            const double s = weights[static_cast<Index>(k)] * e.measure;
            for (int a = 0; a < e.vertex_count; ++a) {
                const Index da = dof_of_node_[static_cast<std::size_t>(e.nodes[a])];
                if (da < 0) continue;
                for (int b = 0; b < e.vertex_count; ++b) {
                    const Index db = dof_of_node_[static_cast<std::size_t>(e.nodes[b])];
                    if (db < 0) continue;
                    trip.emplace_back(da, db, s * detail::dot(e.basis_grad[a], e.basis_grad[b]));
                }
            }
        }
        Eigen::SparseMatrix<double> k(dofs_, dofs_);
        k.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_) {
            solver_.analyzePattern(k);
            analyzed_ = true;
        }
        solver_.factorize(k);
        last_weights_ = weights;
        factored_ = true;
    }

    std::shared_ptr<const Mesh> mesh_;
    std::vector<Index> dof_of_node_;
    Index dofs_ = 0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
    Vector last_weights_;
    bool analyzed_ = false;
    bool factored_ = false;
};

} // namespace plap
