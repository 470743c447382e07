#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "plap/errors.hpp"
#include "plap/mesh.hpp"

using namespace plap;

TEST(BuildMesh, IntervalNodesAndBoundary)
{
    const auto m = build_mesh(DomainSpec::interval(0.0, 1.0), 4);
    ASSERT_EQ(m->node_count(), 5);
    const double expect[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (Index i = 0; i < 5; ++i) {
        EXPECT_DOUBLE_EQ(m->nodes()[static_cast<std::size_t>(i)][0], expect[i]);
        EXPECT_EQ(m->is_boundary(i), i == 0 || i == 4);
    }
}

TEST(BuildMesh, UnitSquareCounts)
{
    const auto m = build_mesh(DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 2);
    EXPECT_EQ(m->node_count(), 9);
    EXPECT_EQ(m->element_count(), 8);
    EXPECT_NEAR(m->total_measure(), 1.0, 1e-15);
    EXPECT_EQ(m->interior_count(), 1);
}

TEST(BuildMesh, ElementMeasuresOnStretchedInterval)
{
    const auto m = build_mesh(DomainSpec::interval(0.0, 2.0), 2);
    ASSERT_EQ(m->element_count(), 2);
    for (const auto& e : m->elements()) EXPECT_DOUBLE_EQ(e.measure, 1.0);
}

TEST(BuildMesh, RejectsBadInput)
{
    EXPECT_THROW(build_mesh(DomainSpec::interval(0.0, 1.0), 1), InvalidArgument);
    EXPECT_THROW(build_mesh(DomainSpec::interval(1.0, 1.0), 4), InvalidArgument);
    EXPECT_THROW(build_mesh(DomainSpec::rectangle(0.0, 1.0, 2.0, 1.0), 4), InvalidArgument);
}

TEST(BuildMesh, InvariantsAcrossSizes)
{
    for (Index n : {2, 3, 7, 16, 33}) {
        for (const DomainSpec& d : {DomainSpec::interval(-1.0, 2.5), DomainSpec::rectangle(0.0, 2.0, -1.0, 0.5)}) {
            const auto m = build_mesh(d, n);
            const Index expect_nodes = d.dimension == 1 ? n + 1 : (n + 1) * (n + 1);
            EXPECT_EQ(m->node_count(), expect_nodes);
            if (d.dimension == 2) { EXPECT_EQ(m->element_count(), 2 * n * n); }
            EXPECT_NEAR(m->total_measure(), d.measure(), 1e-10 * d.measure());
            for (const auto& e : m->elements()) {
                EXPECT_GT(e.measure, 0.0);
                for (int k = 0; k < e.vertex_count; ++k) {
                    EXPECT_GE(e.nodes[k], 0);
                    EXPECT_LT(e.nodes[k], m->node_count());
                }
            }
            for (Index i = 0; i < m->node_count(); ++i) {
                const Point& x = m->nodes()[static_cast<std::size_t>(i)];
                bool on = false;
                for (int k = 0; k < d.dimension; ++k)
                    on = on || std::abs(x[k] - d.bounds[k][0]) <= 1e-12 || std::abs(x[k] - d.bounds[k][1]) <= 1e-12;
                EXPECT_EQ(m->is_boundary(i), on);
            }
        }
    }
}

TEST(Quadrature, WeightsPositiveAndSumToReference)
{
    for (const auto& r : {QuadratureRule::simpson(), QuadratureRule::two_point_gauss(), QuadratureRule::midpoint(1),
                          QuadratureRule::midpoint(2), QuadratureRule::triangle_edge_midpoints(),
                          QuadratureRule::triangle_radon7()}) {
        double s = 0.0;
        for (double w : r.weights) {
            EXPECT_GT(w, 0.0);
            s += w;
        }
        EXPECT_NEAR(s, r.reference_measure(), 1e-15);
    }
}

// Exactness on monomials: int_0^1 x^k = 1/(k+1); on the unit triangle
// int x^a y^b = a! b! / (a + b + 2)!.
TEST(Quadrature, MonomialExactnessSegment)
{
    for (const auto& r : {QuadratureRule::simpson(), QuadratureRule::two_point_gauss(), QuadratureRule::midpoint(1)}) {
        for (int k = 0; k <= r.degree; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < r.points.size(); ++j) s += r.weights[j] * std::pow(r.points[j][1], k);
            EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "degree " << k;
        }
    }
}

TEST(Quadrature, MonomialExactnessTriangle)
{
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    for (const auto& r : {QuadratureRule::midpoint(2), QuadratureRule::triangle_edge_midpoints(), QuadratureRule::triangle_radon7()}) {
        for (int a = 0; a <= r.degree; ++a) {
            for (int b = 0; a + b <= r.degree; ++b) {
                double s = 0.0;
                for (std::size_t j = 0; j < r.points.size(); ++j)
                    s += r.weights[j] * std::pow(r.points[j][1], a) * std::pow(r.points[j][2], b);
                EXPECT_NEAR(s, fact(a) * fact(b) / fact(a + b + 2), 1e-14) << a << "," << b;
            }
        }
    }
}

TEST(Integrate, ConstantOnSquare)
{
    const auto m = build_mesh(DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 5);
    EXPECT_NEAR(integrate(*m, default_rule(2), [](const Point&) { return 1.0; }), 1.0, 1e-14);
}

TEST(Integrate, LinearExactWithDegreeTwoRule)
{
    const auto m = build_mesh(DomainSpec::interval(0.0, 1.0), 7);
    EXPECT_NEAR(integrate(*m, QuadratureRule::simpson(), [](const Point& x) { return x[0]; }), 0.5, 1e-15);
    const auto sq = build_mesh(DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 3);
    EXPECT_NEAR(integrate(*sq, QuadratureRule::triangle_edge_midpoints(), [](const Point& x) { return x[0] * x[1]; }), 0.25, 1e-15);
}

TEST(Integrate, SineOracle)
{
    const auto m = build_mesh(DomainSpec::interval(0.0, 1.0), 64);
    const double v = integrate(*m, QuadratureRule::simpson(), [](const Point& x) { return std::sin(std::numbers::pi * x[0]); });
    EXPECT_NEAR(v, 2.0 / std::numbers::pi, 1e-4);
}

TEST(Integrate, RefinementRatio)
{
    auto g = [](const Point& x) { return std::exp(x[0]) * std::cos(3.0 * x[0]); };
    const double exact = (std::exp(1.0) * (std::cos(3.0) + 3.0 * std::sin(3.0)) - 1.0) / 10.0;
    const auto& rules = {QuadratureRule::simpson(), QuadratureRule::two_point_gauss()};
    for (const auto& r : rules) {
        double prev = NAN;
        for (Index n : {4, 8, 16, 32}) {
            const double e = std::abs(integrate(*build_mesh(DomainSpec::interval(0.0, 1.0), n), r, g) - exact);
            if (!std::isnan(prev)) { EXPECT_GE(prev / e, 3.0); }
            prev = e;
        }
    }
    auto g2 = [](const Point& x) { return std::sin(2.0 * x[0] + x[1]); };
    double prev = NAN;
    for (Index n : {4, 8, 16}) {
        const auto m = build_mesh(DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), n);
        const auto m2 = build_mesh(DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 2 * n);
        const double d = std::abs(integrate(*m, QuadratureRule::triangle_edge_midpoints(), g2) -
                                  integrate(*m2, QuadratureRule::triangle_edge_midpoints(), g2));
        if (!std::isnan(prev)) { EXPECT_GE(prev / d, 3.0); }
        prev = d;
    }
}
