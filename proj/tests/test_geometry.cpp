#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "plap/eigen.hpp"
#include "plap/errors.hpp"
#include "plap/geometry.hpp"

using namespace plap;

namespace {

std::shared_ptr<const Mesh> unit_interval(Index n) { return build_mesh(DomainSpec::interval(0.0, 1.0), n); }

double sampled_argmax(const GeometryCert& c)
{
    return std::max_element(c.f_samples.begin(), c.f_samples.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
}

} // namespace

TEST(CheckGeometry, HandValueOfR0)
{
    const auto cert = check_geometry(ProblemParams::make(unit_interval(8), 3.0, 4.0, 1.0), 1.0, 1.0);
    EXPECT_NEAR(cert.r0, 8.0 / 9.0, 1e-12);
    EXPECT_TRUE(cert.geometry_ok);
}

TEST(CheckGeometry, RejectsNonPositiveConstants)
{
    const auto params = ProblemParams::make(unit_interval(8), 2.0, 4.0, 1.0);
    EXPECT_THROW(check_geometry(params, 0.0, 1.0), InvalidArgument);
    EXPECT_THROW(check_geometry(params, 1.0, -1.0), InvalidArgument);
}

TEST(CheckGeometry, HomogeneousAdmissibleInterval)
{
    const auto m = unit_interval(8);
    for (auto [p, q, l] : {std::array{2.0, 4.0, 1.0}, {3.0, 4.5, 0.3}, {1.5, 2.5, 7.0}}) {
        const auto cert = check_geometry(ProblemParams::make(m, p, q, l), 1.0, 0.5);
        EXPECT_EQ(cert.f_at_zero, 0.0);
        const double rz = std::pow(q / (p * l * 0.5), 1.0 / (q - p));
        EXPECT_NEAR(cert.r_zero, rz, 1e-12 * rz);
        EXPECT_NEAR(cert.second_root, rz, 1e-9 * rz);
        EXPECT_EQ(cert.first_root, 0.0);
        for (const auto& [r, v] : cert.f_samples) {
            if (r > 1e-3 * rz && r < (1.0 - 1e-9) * rz) { EXPECT_GT(v, 0.0) << r; }
        }
        EXPECT_TRUE(std::isinf(cert.lambda1));
        EXPECT_TRUE(std::isinf(cert.lambda2));
        EXPECT_TRUE(std::isinf(cert.lambda_prime));
        EXPECT_TRUE(cert.geometry_ok);
    }
}

TEST(CheckGeometry, SampledMaximizerMatchesClosedForm)
{
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> up(1.2, 4.0), gap(0.2, 4.0), lam(0.05, 20.0), force(0.0, 0.05);
    const auto m = unit_interval(8);
    for (int t = 0; t < 50; ++t) {
        const double p = up(rng), q = p + gap(rng), l = lam(rng);
        auto params = ProblemParams::make(m, p, q, l);
        const auto cert = check_geometry(params, 1.0, 1.0);
        const double r0 = std::pow(q * (p - 1.0) / (p * (q - 1.0)) / l, 1.0 / (q - p));
        EXPECT_NEAR(cert.r0, r0, 1e-12 * r0);
        EXPECT_NEAR(sampled_argmax(cert), r0, 1e-3 * r0);
        EXPECT_EQ(cert.f_samples.size(), static_cast<std::size_t>(geometry_sample_count) + 1);
    }
}

TEST(CheckGeometry, LocalMaximumConsistency)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> up(1.2, 4.0), gap(0.2, 3.0), lam(0.1, 5.0);
    const auto m = unit_interval(8);
    for (int t = 0; t < 30; ++t) {
        const double p = up(rng), q = p + gap(rng);
        const auto params = ProblemParams::make(m, p, q, lam(rng)).with_forcing(DiscreteFunction::constant(m, 0.01));
        const auto cert = check_geometry(params, 0.1, 0.05);
        if (!cert.geometry_ok) continue;
        const RimFunction F{cert.branch, p, q, params.lambda, 0.05, cert.forcing_term};
        EXPECT_LE(F(cert.r0 * (1.0 - 1e-4)), cert.f_at_r0);
        EXPECT_LE(F(cert.r0 * (1.0 + 1e-4)), cert.f_at_r0);
        EXPECT_LT(cert.f_at_zero, 0.0);
        EXPECT_GT(cert.first_root, 0.0);
        EXPECT_NEAR(cert.c0, cert.r0 * cert.f_at_r0, 1e-14 * std::abs(cert.c0));
    }
}

TEST(CheckGeometry, ThresholdClosedFormsAgreeWhereTheyShould)
{
    const auto m = unit_interval(8);
    const auto f = DiscreteFunction::constant(m, 0.2);
    // q - p = 1 and c2 = 1: the classical and the F(r0) = 0 closed forms coincide.
    for (auto [p, q] : {std::array{2.0, 3.0}, {3.0, 4.0}, {1.5, 2.5}}) {
        const auto cert = check_geometry(ProblemParams::make(m, p, q, 1.0).with_forcing(f), 0.3, 1.0);
        EXPECT_NEAR(cert.lambda1, cert.lambda1_derived, 1e-12 * cert.lambda1);
        EXPECT_NEAR(cert.lambda1_numeric, cert.lambda1_derived, 1e-9 * cert.lambda1_derived);
    }
    // In general only the rederived form matches the bisection threshold.
    const auto cert = check_geometry(ProblemParams::make(m, 2.0, 4.0, 1.0).with_forcing(f), 0.3, 0.2);
    EXPECT_NEAR(cert.lambda1_numeric, cert.lambda1_derived, 1e-9 * cert.lambda1_derived);
    EXPECT_GT(std::abs(cert.lambda1 - cert.lambda1_derived), 1e-3 * cert.lambda1_derived);
}

TEST(CheckGeometry, FailsAboveThreshold)
{
    const auto m = unit_interval(8);
    const auto f = DiscreteFunction::constant(m, 1.0);
    const auto base = check_geometry(ProblemParams::make(m, 2.0, 4.0, 1.0).with_forcing(f), 0.1, 0.02);
    ASSERT_TRUE(std::isfinite(base.lambda1_numeric));
    const auto below = check_geometry(ProblemParams::make(m, 2.0, 4.0, 0.999 * base.lambda1_numeric).with_forcing(f), 0.1, 0.02);
    const auto above = check_geometry(ProblemParams::make(m, 2.0, 4.0, 1.001 * base.lambda1_numeric).with_forcing(f), 0.1, 0.02);
    const auto far = check_geometry(ProblemParams::make(m, 2.0, 4.0, 1e3 * base.lambda1_numeric).with_forcing(f), 0.1, 0.02);
    EXPECT_TRUE(below.geometry_ok);
    EXPECT_FALSE(above.geometry_ok);
    EXPECT_FALSE(far.geometry_ok);
    EXPECT_LE(far.f_at_r0, 0.0);
    EXPECT_FALSE(far.failure.empty());
}

TEST(CheckGeometry, SublinearBranch)
{
    const auto m = unit_interval(8);
    for (double l : {0.01, 1.0, 100.0}) {
        const auto cert = check_geometry(ProblemParams::make(m, 2.0, 1.5, l).with_forcing(DiscreteFunction::constant(m, 1.0)), 0.1, 0.2);
        EXPECT_EQ(cert.branch, Branch::Sublinear);
        EXPECT_GT(cert.r0, 0.0);
        EXPECT_GT(cert.f_at_r0, 0.0);
        EXPECT_TRUE(std::isinf(cert.lambda2));
        EXPECT_TRUE(std::isnan(cert.c_prime));
        EXPECT_EQ(cert.c0, cert.c_double_prime);
        EXPECT_TRUE(cert.geometry_ok);
    }
}

TEST(EmbeddingConstants, Examples)
{
    const auto m = unit_interval(64);
    const auto c = estimate_embedding_constants(m, 2.0, 2.0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    EXPECT_NEAR(c.c1, 1.0 / pi2, 0.02 / pi2);
    const auto e = first_eigenpair(m, 2.0);
    for (double q : {1.5, 4.0}) {
        const auto cq = estimate_embedding_constants(m, 2.0, q);
        EXPECT_TRUE(cq.converged);
        EXPECT_GE(cq.c2, integral_abs_pow(e.w_p, q) * (1.0 - 1e-12));
    }
    double prev = 0.0;
    for (Index n : {16, 32, 64, 128}) {
        const auto cn = estimate_embedding_constants(unit_interval(n), 3.0, 4.0);
        EXPECT_GE(cn.c1, prev - 1e-12);
        prev = cn.c1;
    }
}

TEST(ChooseEndpoints, Superlinear)
{
    const auto m = unit_interval(64);
    for (auto [p, q] : {std::array{2.0, 4.0}, {3.0, 4.0}}) {
        const auto params = ProblemParams::make(m, p, q, 1.0);
        const auto eig = first_eigenpair(m, p);
        const auto emb = estimate_embedding_constants(m, p, q);
        auto cert = check_geometry(params, emb.c1, emb.c2);
        ASSERT_TRUE(cert.geometry_ok);
        const auto ends = choose_endpoints(params, eig, cert);
        ASSERT_TRUE(ends.found);
        EXPECT_TRUE(ends.u0.is_zero());
        EXPECT_LT(energy_jq(ends.u1, params), 0.0);
        EXPECT_NEAR(seminorm_w1p(ends.u1 - ends.u0, p), ends.k0, 1e-10 * ends.k0);
        EXPECT_GT(ends.k0, cert.r0);
        EXPECT_EQ(cert.k0, ends.k0);
        EXPECT_TRUE(cert.geometry_ok);
    }
}

TEST(ChooseEndpoints, SublinearScanAgreesWithScalarRootFinding)
{
    // J_q(k w) = -k^p/p + lambda k^q a/q + k b with a = ||w||_q^q, b = int f w.
    const auto m = unit_interval(64);
    const auto f = DiscreteFunction::constant(m, 0.01);
    const auto params = ProblemParams::make(m, 2.0, 1.5, 1.0).with_forcing(f);
    const auto eig = first_eigenpair(m, 2.0);
    const auto emb = estimate_embedding_constants(m, 2.0, 1.5);
    auto cert = check_geometry(params, emb.c1, emb.c2);
    const auto ends = choose_endpoints(params, eig, cert);
    ASSERT_TRUE(ends.found);
    const double a = integral_abs_pow(eig.w_p, 1.5), b = dual_pairing(f, eig.w_p);
    auto scalar = [&](double k) { return -k * k / 2.0 + std::pow(k, 1.5) * a / 1.5 + k * b; };
    EXPECT_LT(scalar(ends.k0), 0.0);
    EXPECT_NEAR(scalar(ends.k0), energy_jq(ends.u1, params), 1e-10 * (1.0 + std::abs(scalar(ends.k0))));
    EXPECT_GT(ends.k0, cert.r0);
    EXPECT_FALSE(ends.regime.empty());
}
