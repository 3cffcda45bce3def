#include "rnext/sphere_seed.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "rnext/errors.hpp"

using namespace rnext;

namespace {

constexpr double kPi = std::numbers::pi;

// Lowest eigenvalue of -((1-x^2)u')' + q u = lambda rho u by vertex-centered finite volumes
// and inverse iteration with a tridiagonal solve.
double fd_lambda1(const std::function<double(double)>& q, const std::function<double(double)>& rho,
                  std::size_t cells) {
    const std::size_t n = cells + 1;
    const double h = 2.0 / double(cells);
    std::vector<double> diag(n), off(n - 1), mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -1.0 + h * double(i);
        const double vol = (i == 0 || i + 1 == n) ? 0.5 * h : h;
        diag[i] = q(x) * vol;
        mass[i] = rho(x) * vol;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double xm = -1.0 + h * (double(i) + 0.5);
        const double flux = (1.0 - xm * xm) / h;
        off[i] = -flux;
        diag[i] += flux;
        diag[i + 1] += flux;
    }
    std::vector<double> u(n, 1.0), rhs(n), cp(n), dp(n);
    double lambda = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = mass[i] * u[i];
        cp[0] = off[0] / diag[0];
        dp[0] = rhs[0] / diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double denom = diag[i] - off[i - 1] * cp[i - 1];
            if (i + 1 < n) cp[i] = off[i] / denom;
            dp[i] = (rhs[i] - off[i - 1] * dp[i - 1]) / denom;
        }
        u[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) u[i] = dp[i] - cp[i] * u[i + 1];
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double au = diag[i] * u[i];
            if (i > 0) au += off[i - 1] * u[i - 1];
            if (i + 1 < n) au += off[i] * u[i + 1];
            num += u[i] * au;
            den += u[i] * mass[i] * u[i];
        }
        const double next = num / den;
        const double norm = std::sqrt(den);
        for (double& v : u) v /= norm;
        if (iter > 5 && std::abs(next - lambda) < 1e-15 * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

double richardson_lambda1(double a) {
    // w = a cos(theta): Lap w = -2 a x, so q = 1 + 2 a x.
    auto q = [a](double x) { return 1.0 + 2.0 * a * x; };
    auto rho = [a](double x) { return std::exp(2.0 * a * x); };
    const double coarse = fd_lambda1(q, rho, 4000);
    const double fine = fd_lambda1(q, rho, 8000);
    return (4.0 * fine - coarse) / 3.0;
}

PathOptions small_grid() {
    PathOptions opt;
    opt.t_grid = 129;
    opt.theta_grid = 257;
    return opt;
}

}  // namespace

TEST(AxisymMetric, RoundAndConstantCurvature) {
    const auto round = AxisymConformalMetric::from_function([](double) { return 0.0; }, 65);
    for (double k : gaussian_curvature(round)) EXPECT_NEAR(k, 1.0, 1e-14);
    EXPECT_NEAR(round.area(), 4 * kPi, 1e-13);
    const auto scaled = AxisymConformalMetric::from_function([](double) { return 0.3; }, 65);
    for (double k : gaussian_curvature(scaled)) EXPECT_NEAR(k, std::exp(-0.6), 1e-14);
    EXPECT_NEAR(scaled.volume_radius(), std::exp(0.3), 1e-13);
}

TEST(AxisymMetric, CurvatureMatchesDenseFiniteDifferences) {
    const auto m = AxisymConformalMetric::cosine(0.1, 0.0, 257);
    const auto k = gaussian_curvature(m);
    const double h = 1e-3;
    auto w = [](double th) { return 0.1 * std::cos(th); };
    for (std::size_t j = 0; j < k.size(); ++j) {
        const double th = m.theta_grid()[j];
        double lap;
        const double w2 = (w(th + h) - 2 * w(th) + w(th - h)) / (h * h);
        if (j == 0 || j + 1 == k.size()) {
            lap = 2.0 * w2;
        } else {
            const double w1 = (w(th + h) - w(th - h)) / (2 * h);
            lap = w2 + std::cos(th) / std::sin(th) * w1;
        }
        EXPECT_NEAR(k[j], std::exp(-2 * w(th)) * (1 - lap), 1e-6) << "theta = " << th;
    }
}

TEST(AxisymMetric, SampledAndExactExponentAgree) {
    const auto sampled = AxisymConformalMetric::from_function([](double th) { return 0.2 * std::cos(th); }, 129);
    const auto exact = AxisymConformalMetric::cosine(0.2, 0.0, 129);
    const auto ka = gaussian_curvature(sampled);
    const auto kb = gaussian_curvature(exact);
    for (std::size_t j = 0; j < ka.size(); ++j) EXPECT_NEAR(ka[j], kb[j], 1e-12);
}

TEST(AxisymMetric, GaussBonnet) {
    const std::vector<std::function<double(double)>> seeds = {
        [](double th) { return 0.2 * std::cos(th); },
        [](double th) { return 0.3 * std::cos(2 * th) - 0.1; },
        [](double th) { return 0.5 * std::exp(std::cos(th)) - 0.2 * std::cos(3 * th); },
    };
    for (const auto& s : seeds) {
        const auto m = AxisymConformalMetric::from_function(s, 257);
        const auto k = gaussian_curvature(m);
        const auto cc = clenshaw_curtis_weights(256);
        double total = 0.0;
        for (std::size_t j = 0; j < k.size(); ++j) total += cc[j] * 2.0 * k[j] * std::exp(2 * m.w()[j]);
        EXPECT_NEAR(2 * kPi * total, 8 * kPi, 1e-6);
    }
}

TEST(AxisymMetric, RejectsPoleIrregularExponent) {
    EXPECT_THROW(AxisymConformalMetric::from_function([](double th) { return 0.1 * th; }, 257), DomainError);
    EXPECT_THROW(AxisymConformalMetric::from_function([](double th) { return std::sin(th); }, 257), DomainError);
}

TEST(ConformalPath, Examples) {
    const auto seed = AxisymConformalMetric::cosine(0.2, 0.0, 65);
    const auto p0 = conformal_path(seed, 0.0);
    const auto p1 = conformal_path(seed, 1.0);
    const auto half = conformal_path(seed, 0.5);
    for (std::size_t j = 0; j < seed.w().size(); ++j) {
        const double th = seed.theta_grid()[j];
        EXPECT_NEAR(p0.w()[j], seed.w()[j], 1e-15);
        EXPECT_NEAR(p1.w()[j], 0.0, 1e-15);
        EXPECT_NEAR(half.w()[j], 0.1 * std::cos(th), 1e-15);
    }
    EXPECT_THROW(conformal_path(seed, 1.5), PreconditionError);
}

TEST(Lambda1, RoundSpheres) {
    const auto unit = AxisymConformalMetric::from_function([](double) { return 0.0; }, 65);
    const auto e = lambda1(unit);
    EXPECT_NEAR(e.lambda, 1.0, 1e-12);
    for (double u : e.u) EXPECT_NEAR(u, 1.0, 1e-12);
    const double r = 1.7;
    const auto big = AxisymConformalMetric::from_function([r](double) { return std::log(r); }, 65);
    const auto eb = lambda1(big);
    EXPECT_NEAR(eb.lambda, 1.0 / (r * r), 1e-12);
    for (double u : eb.u) EXPECT_NEAR(u, 1.0, 1e-12);
}

TEST(Lambda1, MatchesRichardsonFiniteDifferenceOracle) {
    const auto m = AxisymConformalMetric::cosine(0.1, 0.0, 257);
    const auto e = lambda1(m);
    const double oracle = richardson_lambda1(0.1);
    EXPECT_GT(e.lambda, 0.0);
    EXPECT_NEAR(e.lambda, oracle, 1e-6);
    for (double u : e.u) EXPECT_GT(u, 0.0);
}

TEST(Lambda1, EigenfunctionNormalization) {
    const auto m = AxisymConformalMetric::from_function([](double th) { return 0.3 * std::cos(2 * th) + 0.1; }, 257);
    const auto e = lambda1(m);
    const auto cc = clenshaw_curtis_weights(256);
    double norm = 0.0;
    for (std::size_t j = 0; j < e.u.size(); ++j) norm += cc[j] * e.u[j] * e.u[j] * std::exp(2 * m.w()[j]);
    EXPECT_NEAR(2 * kPi * norm, m.area(), 1e-10 * m.area());
}

TEST(Lambda1, StableUnderGridDoubling) {
    auto w = [](double th) { return 0.25 * std::cos(th) + 0.1 * std::cos(2 * th); };
    const double a = lambda1(AxisymConformalMetric::from_function(w, 513)).lambda;
    const double b = lambda1(AxisymConformalMetric::from_function(w, 1025)).lambda;
    EXPECT_NEAR(a, b, 1e-6);
}

TEST(NormalizePath, RoundSeedGivesConstantPath) {
    const auto seed = AxisymConformalMetric::from_function([](double) { return 0.0; }, 129);
    const auto path = normalize_path(seed, small_grid());
    EXPECT_LT(path.volume_form_deviation(), 1e-12);
    for (double t : {0.0, 0.3, 1.0}) {
        const auto s = path.slice(t);
        for (std::size_t j = 0; j < s.x_of_xi.size(); ++j)
            EXPECT_NEAR(s.x_of_xi[j], std::cos(path.theta_grid()[j]), 1e-13);
    }
}

TEST(NormalizePath, AreaFormAndTotalArea) {
    const auto seed = AxisymConformalMetric::cosine(0.2, 0.0, 257);
    const auto path = normalize_path(seed, small_grid());
    EXPECT_LT(path.volume_form_deviation(), 1e-7);
    EXPECT_LT(path.max_area_error(), 1e-10);
    const double target = 4 * kPi * path.r_o() * path.r_o();
    for (double t : {0.0, 0.1, 0.37, 0.74, 0.9, 1.0}) EXPECT_NEAR(path.slice(t).total_area, target, 1e-10);
}

TEST(NormalizePath, EndpointsAndClamp) {
    const auto seed = AxisymConformalMetric::from_function([](double th) { return 0.3 * std::cos(2 * th); }, 129);
    const auto path = normalize_path(seed, small_grid());
    EXPECT_EQ(path.tau(0.0), 0.0);
    EXPECT_EQ(path.tau(0.75), 1.0);
    EXPECT_EQ(path.tau(0.9), 1.0);
    // g(0) is the seed: the area map is the identity and the scalar curvature is 2K(seed).
    const auto s0 = path.slice(0.0);
    const auto k0 = gaussian_curvature(seed);
    for (std::size_t j = 0; j < k0.size(); ++j) {
        EXPECT_NEAR(s0.x_of_xi[j], std::cos(seed.theta_grid()[j]), 1e-12);
        EXPECT_NEAR(s0.scalar[j], 2 * k0[j], 1e-10);
    }
    // g(1) is round of the same area.
    const auto s1 = path.slice(1.0);
    const double r2 = path.r_o() * path.r_o();
    for (double r : s1.scalar) EXPECT_NEAR(r, 2.0 / r2, 1e-11);
    // Constant after the switch.
    const auto s8 = path.slice(0.8);
    for (std::size_t j = 0; j < s1.beta.size(); ++j) EXPECT_EQ(s8.beta[j], s1.beta[j]);
    // Lambda1 of the round endpoint.
    EXPECT_NEAR(lambda1_exponent(path.exponent_at(1.0), 4 * kPi * r2, 0), 1.0 / r2, 1e-8);
}

TEST(NormalizePath, PathEigenvalueStaysAboveKappa) {
    const auto seed = AxisymConformalMetric::from_function([](double th) { return 0.4 * std::cos(th) + 0.2 * std::cos(2 * th); }, 129);
    PathOptions opt = small_grid();
    opt.t_grid = 33;
    const auto path = normalize_path(seed, opt);
    const double area = 4 * kPi * path.r_o() * path.r_o();
    const double l0 = lambda1_exponent(path.exponent_at(0.0), area, 0);
    const double l1 = lambda1_exponent(path.exponent_at(1.0), area, 0);
    const double kappa = 0.99 * std::min(l0, l1);
    for (double t : path.t_grid()) EXPECT_GT(lambda1_exponent(path.exponent_at(t), area, 0), kappa) << "t = " << t;
}

TEST(CurvatureFloor, RoundPathRules) {
    const auto path = MetricPath::round(2, 1.0, small_grid());
    const auto f = curvature_floor_along_path(path);
    EXPECT_NEAR(f.min_gauss, 1.0, 1e-15);
    EXPECT_NEAR(f.kappa_scalar, 0.95, 1e-15);
    EXPECT_NEAR(f.kappa_eigen, 0.95, 1e-15);
    EXPECT_EQ(f.kappa_gauss, 0.0);
}

TEST(CurvatureFloor, NegativeCurvatureSeed) {
    // Choose a seed with negative Gauss curvature somewhere and compare with the rule.
    const auto seed = AxisymConformalMetric::from_function([](double th) { return 0.8 * std::cos(2 * th); }, 129);
    PathOptions opt = small_grid();
    opt.t_grid = 33;
    const auto path = normalize_path(seed, opt);
    const auto f = curvature_floor_along_path(path);
    EXPECT_LT(f.min_gauss, 0.0);
    EXPECT_NEAR(f.kappa_gauss, -f.min_gauss * 1.05, 1e-14);
    EXPECT_EQ(f.kappa_scalar, 0.0);
    EXPECT_GT(f.min_lambda1, 0.0);
    EXPECT_TRUE(f.floor_preserved);
}

TEST(CurvatureFloor, GaussRuleExample) {
    // The rule applied to min K = -0.2.
    CurvatureFloor f;
    f.min_gauss = -0.2;
    EXPECT_NEAR(std::max(0.0, -f.min_gauss) * 1.05, 0.21, 1e-15);
}

TEST(MetricPath, DeclaredPathValidation) {
    const auto p = MetricPath::declared(3, 1.0, 5.0);
    EXPECT_EQ(p.kind(), SeedKind::Declared);
    EXPECT_NEAR(curvature_floor_along_path(p).min_scalar, 5.0, 0.0);
    EXPECT_THROW(MetricPath::declared(3, 1.0, 7.0), PreconditionError);
    EXPECT_THROW(MetricPath::declared(3, 1.0, -1.0), PreconditionError);
    EXPECT_NO_THROW(MetricPath::round(2, 1.0, small_grid()).metric_at(0.5));
    EXPECT_THROW(MetricPath::round(3, 1.0, small_grid()).metric_at(0.5), NotApplicableError);
}

TEST(NormalizePath, DefaultGridDeviation) {
    const auto seed = AxisymConformalMetric::cosine(0.2);
    const auto path = normalize_path(seed);
    EXPECT_LT(path.volume_form_deviation(), 1e-7);
    EXPECT_LT(path.max_area_error(), 1e-10);
}

TEST(SeedCsv, RoundTripAndErrors) {
    const auto dir = std::filesystem::temp_directory_path() / "rnext_seed_test";
    std::filesystem::create_directories(dir);
    const auto good = dir / "good.csv";
    {
        std::ofstream out(good);
        out << "theta,w\n";
        out.precision(17);
        for (int j = 0; j <= 64; ++j) {
            const double th = kPi * j / 64.0;
            out << th << "," << 0.2 * std::cos(th) << "\n";
        }
    }
    const auto m = load_seed_csv(good.string());
    EXPECT_EQ(m.w().size(), 65u);
    EXPECT_NEAR(m.w()[0], 0.2, 1e-15);
    const auto bad = dir / "bad.csv";
    {
        std::ofstream out(bad);
        out << "angle,w\n0,0\n";
    }
    EXPECT_THROW(load_seed_csv(bad.string()), UsageError);
    EXPECT_THROW(load_seed_csv((dir / "missing.csv").string()), IoError);
    std::filesystem::remove_all(dir);
}
