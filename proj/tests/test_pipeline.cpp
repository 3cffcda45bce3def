#include "rnext/pipeline.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "rnext/errors.hpp"
#include "rnext/quasilocal.hpp"

using namespace rnext;

namespace {

// m_o = r^(n-1) / 2 (1 + q^2 / r^(2(n-1)) - 2 Lambda r^2 / (n(n+1))) by direct substitution.
double m_o_oracle(int n, double r, double q, double lambda) {
    return 0.5 * std::pow(r, n - 1) * (1.0 + q * q / std::pow(r, 2 * (n - 1)) - 2.0 * lambda * r * r / (n * (n + 1.0)));
}

BartnikDataSpec round_data(int n, double r_o, double q, double lambda) {
    BartnikDataSpec d;
    d.n = n;
    d.r_o = r_o;
    d.q = q;
    d.lambda = lambda;
    return d;
}

BartnikDataSpec axisym_data() {
    BartnikDataSpec d;
    d.seed = SeedKind::Axisym;
    d.axisym = AxisymConformalMetric::cosine(0.15, 0.0, 257);
    d.q = 0.2;
    d.lambda = -3.0;
    return d;
}

void expect_success(const ExtensionReport& r, double m_o_expected) {
    for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
    EXPECT_TRUE(r.verified);
    EXPECT_NEAR(r.m_o, m_o_expected, 1e-12);
    EXPECT_NEAR(r.m_far, r.m_requested, 1e-8);
    EXPECT_EQ(r.m_achieved, r.m_requested);
    EXPECT_NEAR(r.penrose_slack, r.m_requested - m_o_expected, 1e-8);
    EXPECT_EQ(r.verdict, Extremality::SubExtremal);
    EXPECT_TRUE(verify_outward_minimizing(r).pass);
    // Beyond the match point the profile is the model profile of mass m.
    const RNParams pr{r.data.n, r.m_requested, r.q, r.data.lambda};
    int model = 0;
    for (std::size_t i = 0; i < r.profile.size(); ++i) {
        if (r.profile.provenance[i] != Provenance::Ode) continue;
        EXPECT_GE(r.profile.s[i], r.attachment.s_match);
        EXPECT_NEAR(r.profile.df[i], std::sqrt(eval_p(pr, r.profile.f[i])), 1e-10);
        ++model;
    }
    EXPECT_GT(model, 100);
}

}  // namespace

TEST(ConstructExtension, RoundTwoDimensional) {
    const auto r = construct_extension(round_data(2, 1.0, 0.0, 0.0), 0.55);
    expect_success(r, 0.5);
    EXPECT_NEAR(r.penrose_slack, 0.05, 1e-12);
    // Radial coordinate of the model measured from its horizon.
    const RNParams pr{2, 0.55, 0.0, 0.0};
    for (std::size_t i = 0; i < r.profile.size(); ++i)
        if (r.profile.provenance[i] == Provenance::Ode)
            EXPECT_NEAR(r.profile.s[i] - (r.attachment.s_match - radial_coordinate(pr, r.attachment.r_C)),
                        radial_coordinate(pr, r.profile.f[i]), 1e-8);
}

TEST(ConstructExtension, AxisymChargedHyperbolic) {
    const BartnikDataSpec d = axisym_data();
    const double r_o = d.axisym->volume_radius();
    const double mo = m_o_oracle(2, r_o, 0.2, -3.0);
    const auto r = construct_extension(d, 1.05 * mo);
    expect_success(r, mo);
    EXPECT_EQ(r.collar_case, CollarCase::GaussNegative);
}

TEST(ConstructExtension, RoundThreeDimensional) {
    const double mo = m_o_oracle(3, 1.0, 0.1, 0.0);
    const auto r = construct_extension(round_data(3, 1.0, 0.1, 0.0), 1.02 * mo);
    expect_success(r, mo);
}

TEST(ConstructExtension, MassDial) {
    const BartnikDataSpec d = round_data(2, 1.0, 0.0, 0.0);
    for (double factor : {1.01, 1.05, 1.5, 3.0}) {
        const auto r = construct_extension(d, factor * 0.5);
        expect_success(r, 0.5);
    }
}

TEST(ConstructExtension, ChargedDialStaysSubExtremal) {
    const BartnikDataSpec d = round_data(2, 1.2, 0.5, -0.2);
    const double mo = m_o_oracle(2, 1.2, 0.5, -0.2);
    for (double factor : {1.02, 1.3}) {
        const auto r = construct_extension(d, factor * mo);
        expect_success(r, mo);
        const auto charge = std::find_if(r.checks.begin(), r.checks.end(), [](const auto& c) { return c.name == "charge"; });
        ASSERT_NE(charge, r.checks.end());
        EXPECT_TRUE(charge->pass);
    }
}

TEST(ConstructExtension, HawkingMassNondecreasing) {
    const auto r = construct_extension(round_data(2, 1.0, 0.0, 0.0), 0.6);
    for (std::size_t i = 1; i < r.hawking.size(); ++i) EXPECT_GE(r.hawking[i], r.hawking[i - 1] - 1e-10) << i;
    EXPECT_NEAR(r.hawking.front(), 0.5, 1e-12);
}

TEST(ConstructExtension, Rejections) {
    try {
        construct_extension(round_data(2, 1.0, 0.0, 0.0), 0.4);
        FAIL() << "expected a precondition error";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("m_o"), std::string::npos);
    }
    EXPECT_THROW(construct_extension(round_data(2, 1.0, 0.0, 0.0), 0.5), PreconditionError);
    BartnikDataSpec d = round_data(2, 1.0, 0.0, 0.0);
    d.H_o = 0.1;
    EXPECT_THROW(construct_extension(d, 0.6), PreconditionError);
    d = round_data(2, 1.0, 0.0, 0.5);
    EXPECT_THROW(construct_extension(d, 0.6), PreconditionError);
    // The collar condition fails when the charge dominates the scalar curvature floor.
    EXPECT_THROW(construct_extension(round_data(2, 1.0, 1.2, 0.0), 2.0), PreconditionError);
}

TEST(OutwardMinimizing, ModelProfilePasses) {
    const SampledProfile u = rn_profile(RNParams{2, 1.0, 0.4, -0.3}, 5.0, 201);
    EXPECT_TRUE(verify_outward_minimizing(u).pass);
}

TEST(OutwardMinimizing, NeckFails) {
    SampledProfile p;
    for (int k = 0; k <= 100; ++k) {
        const double s = 0.05 * k;
        // f = 2 + cos(2 s) - 1 has f'(0) = 0 and f' < 0 on (0, pi/2).
        p.push_back(s, 2.0 + std::cos(2.0 * s) - 1.0 + 0.1 * s * s, -2.0 * std::sin(2.0 * s) + 0.2 * s,
                    -4.0 * std::cos(2.0 * s) + 0.2, Provenance::Analytic);
    }
    const auto v = verify_outward_minimizing(p);
    EXPECT_FALSE(v.pass);
    EXPECT_LT(v.min_H, 0.0);
}

TEST(Bartnik, RoundWitnesses) {
    PipelineConfig cfg;
    cfg.bartnik_k_max = 4;
    const BartnikReport r = bartnik_report(round_data(2, 1.0, 0.0, 0.0), cfg);
    EXPECT_NEAR(r.bound, 0.5, 1e-15);
    ASSERT_EQ(r.witnesses.size(), 4u);
    const double expect[] = {0.75, 0.625, 0.5625, 0.53125};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(r.witnesses[k].m, expect[k], 1e-15);
        EXPECT_TRUE(r.witnesses[k].success) << r.witnesses[k].detail;
    }
    EXPECT_TRUE(r.admissible_nonempty);
    EXPECT_NEAR(r.witnessed_gap, 0.03125, 1e-15);
    EXPECT_GT(r.h_r_o, 0.0);
    EXPECT_EQ(r.m_o_class, Extremality::SubExtremal);
    EXPECT_NEAR(r.r_plus, 1.0, 1e-10);
}

TEST(Bartnik, ChargedAPrioriSubExtremality) {
    PipelineConfig cfg;
    cfg.bartnik_k_max = 2;
    for (const auto& d : {round_data(2, 1.0, 0.6, -0.5), round_data(3, 0.8, 0.3, 0.0)}) {
        const BartnikReport r = bartnik_report(d, cfg);
        EXPECT_GT(r.h_r_o, 0.0);
        EXPECT_EQ(r.m_o_class, Extremality::SubExtremal);
        EXPECT_NEAR(r.r_plus, d.r_o, 1e-10);
        EXPECT_TRUE(r.admissible_nonempty) << r.statement;
    }
}
