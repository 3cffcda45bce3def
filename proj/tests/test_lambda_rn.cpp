#include "rnext/lambda_rn.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rnext/errors.hpp"

using namespace rnext;

namespace {

// Antiderivative of (1 - 2/t)^(-1/2) vanishing at t = 2.
double schwarzschild_s(double r) { return std::sqrt(r * (r - 2.0)) + 2.0 * std::asinh(std::sqrt((r - 2.0) / 2.0)); }

// Antiderivative of t / sqrt((t - a)(t - b)) vanishing at t = a (n = 2, Lambda = 0).
double reissner_nordstrom_s(double m, double q, double r) {
    const double a = m + std::sqrt(m * m - q * q);
    const double b = m - std::sqrt(m * m - q * q);
    const double root = std::sqrt((r - a) * (r - b));
    return root + m * std::log((2.0 * root + 2.0 * r - 2.0 * m) / (a - b));
}

}  // namespace

TEST(EvalP, HandValues) {
    EXPECT_NEAR(eval_p({2, 1.0, 0.0, 0.0}, 4.0), 0.5, 1e-15);
    EXPECT_EQ(eval_p({2, 0.0, 0.0, 0.0}, 3.7), 1.0);
    EXPECT_NEAR(eval_p({2, 1.0, 0.0, 0.0}, 2.0), 0.0, 1e-15);
    EXPECT_THROW(eval_p({2, 1.0, 0.0, 0.0}, 0.0), DomainError);
    EXPECT_THROW(eval_p({2, 1.0, 0.0, 0.0}, -1.0), DomainError);
}

TEST(EvalP, DerivativesMatchFiniteDifferences) {
    const RNParams pr{3, 0.7, 0.4, -0.8};
    for (double r : {0.6, 1.0, 2.5}) {
        const double h = 1e-5;
        const double fd1 = (eval_p(pr, r + h) - eval_p(pr, r - h)) / (2 * h);
        const double fd2 = (eval_dp(pr, r + h) - eval_dp(pr, r - h)) / (2 * h);
        EXPECT_NEAR(eval_dp(pr, r), fd1, 1e-7);
        EXPECT_NEAR(eval_d2p(pr, r), fd2, 1e-6);
    }
}

TEST(EvalH, HandValues) {
    EXPECT_NEAR(eval_h({2, 0.0, 0.0, 0.0}, 3.0), 9.0, 1e-14);
    EXPECT_NEAR(eval_h({2, 0.0, 1.0, 0.0}, 1.0), 0.0, 1e-15);
    EXPECT_NEAR(eval_h({2, 0.0, 0.0, -3.0}, 1.0), 4.0, 1e-14);
    EXPECT_THROW(eval_h({2, 0.0, 0.0, 0.0}, 0.0), DomainError);
}

TEST(Classify, ReissnerNordstromClosedForm) {
    const auto c = classify({2, 1.25, 0.75, 0.0});
    ASSERT_EQ(c.kind, Extremality::SubExtremal);
    EXPECT_NEAR(*c.r_plus, 2.25, 1e-12);
    ASSERT_TRUE(c.r_minus.has_value());
    EXPECT_NEAR(*c.r_minus, 0.25, 1e-12);
}

TEST(Classify, ExtremalAtMassEqualCharge) {
    const auto c = classify({2, 1.0, 1.0, 0.0});
    EXPECT_EQ(c.kind, Extremality::Extremal);
    EXPECT_NEAR(*c.r_plus, 1.0, 1e-12);
    const auto c3 = classify({3, 0.37, -0.37, 0.0});
    EXPECT_EQ(c3.kind, Extremality::Extremal);
}

TEST(Classify, AntiDeSitterWithoutMassIsSuperExtremal) {
    const auto c = classify({3, 0.0, 0.0, -6.0});
    EXPECT_EQ(c.kind, Extremality::SuperExtremal);
    EXPECT_FALSE(c.r_plus.has_value());
}

TEST(Classify, RejectsInvalidParams) {
    EXPECT_THROW(classify({2, 1.0, 0.0, 0.5}), PreconditionError);
    EXPECT_THROW(classify({1, 1.0, 0.0, 0.0}), PreconditionError);
    EXPECT_THROW(classify({2, NAN, 0.0, 0.0}), PreconditionError);
}

TEST(CriticalMass, Values) {
    EXPECT_EQ(critical_mass(2, 0.0, 0.0), 0.0);
    EXPECT_NEAR(critical_mass(2, 0.5, 0.0), 0.5, 1e-14);
}

TEST(CriticalMass, MatchesClassifyBoundaryBisection) {
    // Oracle: bisection over m on the classification.
    for (auto [n, q, lam] : {std::tuple{2, 1.0, -3.0}, std::tuple{3, 0.4, -1.0}, std::tuple{4, 0.8, -0.2}}) {
        double lo = 0.0, hi = 100.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (classify({n, mid, q, lam}).kind == Extremality::SuperExtremal) lo = mid; else hi = mid;
        }
        const double mc = critical_mass(n, q, lam);
        EXPECT_NEAR(mc, 0.5 * (lo + hi), 1e-12 * mc);
        EXPECT_EQ(classify({n, mc * (1 + 1e-9), q, lam}).kind, Extremality::SubExtremal);
        EXPECT_EQ(classify({n, mc * (1 - 1e-9), q, lam}).kind, Extremality::SuperExtremal);
    }
}

TEST(RadialCoordinate, SchwarzschildClosedForm) {
    const RNParams pr{2, 1.0, 0.0, 0.0};
    EXPECT_EQ(radial_coordinate(pr, 2.0), 0.0);
    for (double r : {2.001, 2.5, 3.0, 4.0, 10.0, 50.0})
        EXPECT_NEAR(radial_coordinate(pr, r), schwarzschild_s(r), 1e-12 * (1 + schwarzschild_s(r)));
    EXPECT_LT(radial_coordinate(pr, 3.0), radial_coordinate(pr, 4.0));
}

TEST(RadialCoordinate, ReissnerNordstromClosedForm) {
    const RNParams pr{2, 1.25, 0.75, 0.0};
    for (double r : {2.3, 3.0, 7.0})
        EXPECT_NEAR(radial_coordinate(pr, r), reissner_nordstrom_s(1.25, 0.75, r), 1e-12);
}

TEST(RadialCoordinate, NotApplicableBeyondSubExtremal) {
    EXPECT_THROW(radial_coordinate({2, 1.0, 1.0, 0.0}, 2.0), NotApplicableError);
    EXPECT_THROW(radial_coordinate({2, 0.5, 1.0, 0.0}, 2.0), NotApplicableError);
    EXPECT_THROW(radial_coordinate({2, 1.0, 0.0, 0.0}, 1.5), DomainError);
}

TEST(RnProfile, StartsAtHorizonAndSolvesOde) {
    const RNParams pr{2, 1.0, 0.0, 0.0};
    const auto u = rn_profile(pr, 10.0, 1001);
    EXPECT_DOUBLE_EQ(u.f.front(), 2.0);
    EXPECT_EQ(u.df.front(), 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        worst = std::max(worst, std::abs(u.df[i] * u.df[i] - eval_p(pr, u.f[i])));
        EXPECT_GT(u.d2f[i], 0.0);
    }
    EXPECT_LT(worst, 1e-8);
    u.check_invariants();
}

TEST(RnProfile, InvertsRadialCoordinate) {
    const RNParams pr{2, 1.0, 0.0, 0.0};
    const RNProfileFunction u(pr, std::nullopt, 12.0);
    for (double r : {3.0, 4.0, 5.0}) EXPECT_NEAR(u(radial_coordinate(pr, r)).f, r, 1e-8);
    const RNParams rn{3, 1.1, 0.6, -0.4};
    const RNProfileFunction v(rn, std::nullopt, 6.0);
    const double rp = *classify(rn).r_plus;
    for (double r : {rp + 0.1, rp + 1.0}) EXPECT_NEAR(v(radial_coordinate(rn, r)).f, r, 1e-8);
}

TEST(RnProfile, ContinuousAndSampledAgree) {
    const RNParams pr{2, 1.25, 0.75, -0.1};
    const auto sampled = rn_profile(pr, 5.0, 501);
    const RNProfileFunction u(pr, std::nullopt, 5.0);
    for (std::size_t i = 0; i < sampled.size(); i += 25) {
        const auto v = u(sampled.s[i]);
        EXPECT_NEAR(v.f, sampled.f[i], 1e-10);
        EXPECT_NEAR(v.df, sampled.df[i], 1e-7);
    }
}

TEST(RnProfile, RejectsNonSubExtremal) {
    EXPECT_THROW(rn_profile({2, 1.0, 1.0, 0.0}, 1.0, 10), NotApplicableError);
}

TEST(RnProfileMu, FlatSpaceIsLinear) {
    const auto u = rn_profile_mu({2, 0.0, 0.0, 0.0}, 1.0, 3.0, 31);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u.f[i], 1.0 + u.s[i], 1e-11);
}

TEST(RnProfileMu, InitialSlopeAndMonotone) {
    const RNParams pr{2, 1.0, 1.0, 0.0};
    const auto u = rn_profile_mu(pr, 1.5, 4.0, 81);
    EXPECT_NEAR(u.df[0] * u.df[0], eval_p(pr, 1.5), 1e-12);
    for (double d : u.df) EXPECT_GT(d, 0.0);
    EXPECT_THROW(rn_profile_mu(pr, 1.0, 4.0, 81), DomainError);
    EXPECT_THROW(rn_profile_mu({2, 1.0, 0.0, 0.0}, 1.5, 4.0, 81), DomainError);
}

TEST(ModelIdentities, SaturatedScalarCurvature) {
    for (const RNParams& pr : {RNParams{2, 1.0, 0.0, 0.0}, RNParams{2, 1.0, 0.0, -3.0}, RNParams{2, 1.25, 0.75, 0.0}}) {
        const auto u = rn_profile(pr, 6.0, 601);
        const auto rep = verify_model_identities(pr, u, 1e-6);
        EXPECT_TRUE(rep.ok) << rep.max_violation;
    }
    const auto flat = rn_profile_mu({2, 0.0, 0.0, 0.0}, 1.0, 2.0, 11);
    EXPECT_EQ(verify_model_identities({2, 0.0, 0.0, 0.0}, flat, 0.0).max_violation, 0.0);
}

TEST(HorizonMeanCurvature, Values) {
    EXPECT_EQ(horizon_mean_curvature({2, 1.0, 0.0, 0.0}, 2.0), 0.0);
    EXPECT_NEAR(horizon_mean_curvature({2, 0.0, 0.0, 0.0}, 3.0), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(horizon_mean_curvature({2, 1.0, 0.0, 0.0}, 1.9), DomainError);
    const RNParams pr{2, 1.25, 0.75, -0.5};
    const double rp = *classify(pr).r_plus;
    EXPECT_LT(horizon_mean_curvature(pr, rp + 1e-4), horizon_mean_curvature(pr, rp + 2e-4));
}

TEST(Properties, SchwarzschildRootsAcrossDimensions) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mass(0.01, 10.0);
    std::uniform_int_distribution<int> dim(2, 6);
    for (int i = 0; i < 300; ++i) {
        const RNParams pr{dim(rng), mass(rng), 0.0, 0.0};
        const auto c = classify(pr);
        ASSERT_EQ(c.kind, Extremality::SubExtremal);
        EXPECT_NEAR(*c.r_plus, std::pow(2.0 * pr.m, 1.0 / (pr.n - 1)), 1e-10);
    }
}

TEST(Properties, RootDerivativeIdentity) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const int n = 2 + static_cast<int>(u01(rng) * 3);
        const double q = 2.0 * u01(rng);
        const double lam = -3.0 * u01(rng);
        const double m = critical_mass(n, q, lam) + 3.0 * u01(rng) + 1e-3;
        const RNParams pr{n, m, q, lam};
        const auto c = classify(pr);
        ASSERT_EQ(c.kind, Extremality::SubExtremal);
        for (auto root : {c.r_plus, c.r_minus}) {
            if (!root) continue;
            const double r = *root;
            const double dp = eval_dp(pr, r);
            EXPECT_LT(std::abs(dp - (n - 1) * eval_h(pr, r) / std::pow(r, 2 * n - 1)), 1e-8 * std::max(1.0, std::abs(dp)));
        }
    }
}

TEST(Properties, InheritedSubExtremality) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        const int n = 2 + static_cast<int>(u01(rng) * 3);
        const RNParams pr{n, 3.0 * u01(rng), 2.0 * u01(rng) - 1.0, -2.0 * u01(rng)};
        if (classify(pr).kind != Extremality::SubExtremal) continue;
        ++checked;
        for (int j = 0; j < 5; ++j) {
            const RNParams other{n, pr.m + 2.0 * u01(rng), pr.q * u01(rng), pr.lambda};
            EXPECT_EQ(classify(other).kind, Extremality::SubExtremal);
        }
    }
    EXPECT_GT(checked, 20);
}

TEST(Properties, HStrictlyIncreasing) {
    for (const RNParams& pr : {RNParams{2, 0, 0.7, 0.0}, RNParams{3, 0, 1.2, -2.0}, RNParams{5, 0, 0.1, -0.3}}) {
        double prev = eval_h(pr, 1e-3);
        for (int i = 1; i <= 2000; ++i) {
            const double h = eval_h(pr, 1e-3 + 5e-3 * i);
            EXPECT_GT(h, prev);
            prev = h;
        }
    }
}

TEST(Properties, ProfileConvexForSubExtremal) {
    for (const RNParams& pr : {RNParams{2, 1.0, 0.3, -0.5}, RNParams{3, 0.8, 0.2, 0.0}, RNParams{4, 2.0, 1.0, -0.1}}) {
        const auto u = rn_profile(pr, 5.0, 251);
        for (double d2 : u.d2f) EXPECT_GT(d2, 0.0);
    }
}
