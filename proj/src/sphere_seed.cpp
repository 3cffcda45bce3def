#include "rnext/sphere_seed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "rnext/errors.hpp"
#include "rnext/quasilocal.hpp"

namespace rnext {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> uniform_theta(std::size_t n) {
    if (n < 3) throw PreconditionError("theta grid needs at least 3 points");
    std::vector<double> theta(n);
    for (std::size_t j = 0; j < n; ++j) theta[j] = std::numbers::pi * double(j) / double(n - 1);
    theta[n - 1] = std::numbers::pi;
    return theta;
}

std::vector<double> uniform_time(std::size_t n) {
    if (n < 5) throw PreconditionError("time grid needs at least 5 points");
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = double(i) / double(n - 1);
    t[n - 1] = 1.0;
    return t;
}

Chebyshev multiply_by_x(const Chebyshev& w) {
    const auto& c = w.coeffs();
    std::vector<double> r(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (k == 0) {
            r[1] += c[0];
        } else {
            r[k + 1] += 0.5 * c[k];
            r[k - 1] += 0.5 * c[k];
        }
    }
    return Chebyshev(std::move(r));
}

Chebyshev exp2w(const Chebyshev& w) {
    return Chebyshev::from_function([&](double x) { return std::exp(2.0 * w(x)); });
}

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

// Orthonormal Legendre series evaluation without allocation.
double legendre_sum(const std::vector<double>& coeffs, double x) {
    double pm = 1.0, pc = x, sum = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        double val;
        if (k == 0) {
            val = 1.0;
        } else if (k == 1) {
            val = x;
        } else {
            val = ((2.0 * k - 1.0) * x * pc - (k - 1.0) * pm) / k;
            pm = pc;
            pc = val;
        }
        sum += coeffs[k] * std::sqrt((2.0 * k + 1.0) / 2.0) * val;
    }
    return sum;
}

// Solves C_t(X) = C_0(xi) measured from the nearer pole.
double invert_cumulative(const Chebyshev& cum_t, const Chebyshev& dens_t, double target_from_pole,
                         bool from_top, double guess) {
    const double total = cum_t(1.0);
    auto g = [&](double x) { return from_top ? total - cum_t(x) : cum_t(x); };
    double lo = -1.0, hi = 1.0;
    double x = std::clamp(guess, -1.0, 1.0);
    for (int iter = 0; iter < 100; ++iter) {
        const double r = g(x) - target_from_pole;
        // g is decreasing in x from the top, increasing from the bottom.
        const bool x_too_big = from_top ? (r < 0.0) : (r > 0.0);
        if (x_too_big) hi = x; else lo = x;
        const double slope = from_top ? -dens_t(x) : dens_t(x);
        double next = x - r / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

}  // namespace

// ---------------------------------------------------------------- AxisymConformalMetric

AxisymConformalMetric::AxisymConformalMetric(std::vector<double> w_samples, Chebyshev exponent)
    : theta_(uniform_theta(w_samples.size())), w_(std::move(w_samples)), exponent_(std::move(exponent)) {}

AxisymConformalMetric::AxisymConformalMetric(std::vector<double> w_samples)
    : theta_(uniform_theta(w_samples.size())), w_(std::move(w_samples)) {
    for (double v : w_)
        if (!std::isfinite(v)) throw DomainError("conformal exponent must be finite");
    const std::size_t n = w_.size();
    const double h = theta_[1] - theta_[0];
    double scale = 1.0;
    for (double v : w_) scale = std::max(scale, 1.0 + std::abs(v));
    const double tol = 10.0 * h * h * scale;
    const double slope_north = (-3.0 * w_[0] + 4.0 * w_[1] - w_[2]) / (2.0 * h);
    const double slope_south = (3.0 * w_[n - 1] - 4.0 * w_[n - 2] + w_[n - 3]) / (2.0 * h);
    if (std::abs(slope_north) > tol || std::abs(slope_south) > tol) {
        std::ostringstream os;
        os << "conformal exponent is not pole-regular: dw/dtheta = " << slope_north << " at theta = 0, "
           << slope_south << " at theta = pi (tolerance " << tol << ")";
        throw DomainError(os.str());
    }
    exponent_ = Chebyshev::from_lobatto_values(w_).chopped(1e-15);
}

AxisymConformalMetric AxisymConformalMetric::from_function(const std::function<double(double)>& w_of_theta,
                                                           std::size_t grid) {
    const auto theta = uniform_theta(grid);
    std::vector<double> w(grid);
    for (std::size_t j = 0; j < grid; ++j) w[j] = w_of_theta(theta[j]);
    return AxisymConformalMetric(std::move(w));
}

AxisymConformalMetric AxisymConformalMetric::cosine(double a, double b, std::size_t grid) {
    return from_exponent(Chebyshev({b, a}), grid);
}

AxisymConformalMetric AxisymConformalMetric::from_exponent(const Chebyshev& exponent, std::size_t grid) {
    const auto theta = uniform_theta(grid);
    std::vector<double> w(grid);
    for (std::size_t j = 0; j < grid; ++j) w[j] = exponent(std::cos(theta[j]));
    return AxisymConformalMetric(std::move(w), exponent);
}

double AxisymConformalMetric::area() const { return kTwoPi * exp2w(exponent_).definite_integral(); }

double AxisymConformalMetric::volume_radius() const { return std::sqrt(area() / (4.0 * std::numbers::pi)); }

// ---------------------------------------------------------------- curvature

Chebyshev round_laplacian(const Chebyshev& w) {
    const Chebyshev d1 = w.derivative();
    const Chebyshev d2 = d1.derivative();
    return d2 + multiply_by_x(multiply_by_x(d2)) * -1.0 + multiply_by_x(d1) * -2.0;
}

double gaussian_curvature_at(const Chebyshev& exponent, double x) {
    const Chebyshev lap = round_laplacian(exponent);
    return std::exp(-2.0 * exponent(x)) * (1.0 - lap(x));
}

std::vector<double> gaussian_curvature(const AxisymConformalMetric& metric) {
    const Chebyshev lap = round_laplacian(metric.exponent());
    std::vector<double> k(metric.theta_grid().size());
    for (std::size_t j = 0; j < k.size(); ++j) {
        const double x = std::cos(metric.theta_grid()[j]);
        k[j] = std::exp(-2.0 * metric.w()[j]) * (1.0 - lap(x));
    }
    return k;
}

AxisymConformalMetric conformal_path(const AxisymConformalMetric& seed, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw PreconditionError("conformal path parameter must lie in [0, 1]");
    std::vector<double> w(seed.w());
    for (double& v : w) v *= (1.0 - t);
    return AxisymConformalMetric::from_exponent(seed.exponent() * (1.0 - t), w.size());
}

// ---------------------------------------------------------------- spectrum

double lambda1_exponent(const Chebyshev& exponent, double area_target, std::size_t modes,
                        std::function<double(double)>* u_of_x, double* residual_out) {
    const Chebyshev rho = exp2w(exponent);
    const Chebyshev pot = Chebyshev::constant(1.0) + round_laplacian(exponent) * -1.0;
    const std::size_t deg = std::max(rho.degree(), pot.degree());
    if (modes == 0) modes = std::clamp<std::size_t>(deg + 24, 32, 256);
    const std::size_t nq = modes + deg / 2 + 8;
    const GaussRule rule = gauss_legendre(nq);

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(modes, modes);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(modes, modes);
    std::vector<double> p, dp;
    for (std::size_t i = 0; i < nq; ++i) {
        legendre_orthonormal(modes, rule.x[i], p, dp);
        const double wr = rule.w[i] * rho(rule.x[i]);
        const double wq = rule.w[i] * pot(rule.x[i]);
        for (std::size_t j = 0; j < modes; ++j)
            for (std::size_t k = 0; k <= j; ++k) {
                a(j, k) += wq * p[j] * p[k];
                b(j, k) += wr * p[j] * p[k];
            }
    }
    for (std::size_t j = 0; j < modes; ++j) {
        a(j, j) += double(j) * double(j + 1);
        for (std::size_t k = 0; k < j; ++k) {
            a(k, j) = a(j, k);
            b(k, j) = b(j, k);
        }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b);
    if (solver.info() != Eigen::Success) throw NumericalError("generalized eigen solver did not converge");
    const double lambda = solver.eigenvalues()(0);
    Eigen::VectorXd c = solver.eigenvectors().col(0);
    const double residual = (a * c - lambda * (b * c)).lpNorm<Eigen::Infinity>() / std::max(1.0, std::abs(lambda));
    if (residual > 1e-8) {
        std::ostringstream os;
        os << "first eigenpair residual " << residual << " exceeds 1e-8";
        throw NumericalError(os.str());
    }
    // Eigen normalizes c^T B c = 1, i.e. integral of rho U^2 dx = 1.
    const double scale = std::sqrt(area_target / kTwoPi);
    std::vector<double> coeffs(modes);
    double sign_probe = 0.0;
    for (std::size_t k = 0; k < modes; ++k) coeffs[k] = c(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < nq; ++i) sign_probe += rule.w[i] * legendre_sum(coeffs, rule.x[i]);
    const double s = (sign_probe < 0.0 ? -scale : scale);
    for (double& v : coeffs) v *= s;
    for (std::size_t i = 0; i < nq; ++i)
        if (!(legendre_sum(coeffs, rule.x[i]) > 0.0))
            throw NumericalError("first eigenfunction changes sign");
    if (!(legendre_sum(coeffs, 1.0) > 0.0 && legendre_sum(coeffs, -1.0) > 0.0))
        throw NumericalError("first eigenfunction changes sign at a pole");
    if (u_of_x) *u_of_x = [coeffs](double x) { return legendre_sum(coeffs, x); };
    if (residual_out) *residual_out = residual;
    return lambda;
}

EigenPair lambda1(const AxisymConformalMetric& metric, std::size_t modes) {
    EigenPair out;
    std::function<double(double)> u;
    out.lambda = lambda1_exponent(metric.exponent(), metric.area(), modes, &u, &out.residual);
    out.u.resize(metric.theta_grid().size());
    for (std::size_t j = 0; j < out.u.size(); ++j) out.u[j] = u(std::cos(metric.theta_grid()[j]));
    return out;
}

// ---------------------------------------------------------------- paths

std::string to_string(SeedKind kind) {
    switch (kind) {
        case SeedKind::Round: return "round";
        case SeedKind::Axisym: return "axisym";
        case SeedKind::Declared: return "declared";
    }
    return "unknown";
}

MetricPath MetricPath::round(int n, double r_o, const PathOptions& options) {
    if (n < 2) throw PreconditionError("sphere dimension must be at least 2");
    if (!(r_o > 0.0)) throw PreconditionError("volume radius must be positive");
    if (!(options.theta_switch > 0.0 && options.theta_switch < 1.0))
        throw PreconditionError("theta_switch must lie in (0, 1)");
    MetricPath path;
    path.n_ = n;
    path.r_o_ = r_o;
    path.theta_switch_ = options.theta_switch;
    path.kind_ = SeedKind::Round;
    path.t_grid_ = uniform_time(options.t_grid);
    path.theta_ = uniform_theta(options.theta_grid);
    return path;
}

MetricPath MetricPath::declared(int n, double r_o, double scalar_floor, const PathOptions& options) {
    MetricPath path = round(n, r_o, options);
    if (!(scalar_floor > 0.0)) throw PreconditionError("declared scalar curvature floor must be positive");
    if (scalar_floor > n * (n - 1.0) / (r_o * r_o))
        throw PreconditionError("declared scalar curvature floor exceeds that of the round endpoint");
    path.kind_ = SeedKind::Declared;
    path.declared_floor_ = scalar_floor;
    return path;
}

double MetricPath::tau(double t) const { return smooth_step(t / theta_switch_); }

Chebyshev MetricPath::exponent_at(double t) const {
    if (is_round()) return Chebyshev::constant(std::log(r_o_));
    const double s = 1.0 - tau(t);
    const Chebyshev w = seed_->exponent() * s;
    const double integral = exp2w(w).definite_integral();
    const double c = 0.5 * std::log(2.0 * r_o_ * r_o_ / integral);
    return w + Chebyshev::constant(c);
}

AxisymConformalMetric MetricPath::metric_at(double t) const {
    if (n_ != 2) throw NotApplicableError("axisymmetric conformal metrics exist only on S^2");
    return AxisymConformalMetric::from_exponent(exponent_at(t), theta_.size());
}

PathSlice MetricPath::slice(double t) const {
    std::vector<double> xi(theta_.size());
    for (std::size_t j = 0; j < xi.size(); ++j) xi[j] = std::cos(theta_[j]);
    xi.front() = 1.0;
    xi.back() = -1.0;
    return slice_at(t, xi);
}

PathSlice MetricPath::slice_at(double t, const std::vector<double>& nodes) const {
    PathSlice out;
    out.t = t;
    out.exponent = exponent_at(t);
    const std::size_t nx = nodes.size();
    out.x_of_xi.resize(nx);
    out.scalar.resize(nx);
    out.beta.resize(nx);
    if (is_round()) {
        const double r = n_ * (n_ - 1.0) / (r_o_ * r_o_);
        for (std::size_t j = 0; j < nx; ++j) {
            out.x_of_xi[j] = nodes[j];
            out.scalar[j] = r;
            out.beta[j] = std::log(r_o_);
        }
        out.total_area = unit_sphere_volume(n_) * std::pow(r_o_, n_);
        return out;
    }
    const Chebyshev w0 = exponent_at(0.0);
    const Chebyshev& wt = out.exponent;
    const Chebyshev dens0 = exp2w(w0);
    const Chebyshev denst = exp2w(wt);
    const Chebyshev cum0 = dens0.integral();
    const Chebyshev cumt = denst.integral();
    const Chebyshev lap = round_laplacian(wt);
    const double total0 = cum0(1.0);

    double guess = nx > 0 ? nodes[0] : 1.0;
    for (std::size_t j = 0; j < nx; ++j) {
        const double xi = nodes[j];
        if (!(xi >= -1.0 && xi <= 1.0)) throw PreconditionError("reference node outside [-1, 1]");
        const bool pole = (xi == 1.0 || xi == -1.0);
        double x;
        if (pole) {
            x = xi;
        } else if (xi >= 0.0) {
            x = invert_cumulative(cumt, denst, total0 - cum0(xi), true, guess);
        } else {
            x = invert_cumulative(cumt, denst, cum0(xi), false, guess);
        }
        guess = x;
        out.x_of_xi[j] = x;
        out.scalar[j] = 2.0 * std::exp(-2.0 * wt(x)) * (1.0 - lap(x));
        if (pole) {
            out.beta[j] = w0(xi);
        } else {
            out.beta[j] = wt(x) + 0.5 * std::log((1.0 - x) * (1.0 + x) / ((1.0 - xi) * (1.0 + xi)));
        }
    }
    for (std::size_t j = 1; j < nx; ++j)
        if (!(out.x_of_xi[j] < out.x_of_xi[j - 1]))
            throw InternalError("cumulative area inversion is not monotone");

    // Independent area check by Gauss-Legendre quadrature of the conformal factor.
    const GaussRule rule = gauss_legendre(64);
    double area = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) area += rule.w[i] * std::exp(2.0 * wt(rule.x[i]));
    out.total_area = kTwoPi * area;
    return out;
}

MetricPath normalize_path(const AxisymConformalMetric& seed, const PathOptions& options) {
    MetricPath path = MetricPath::round(2, seed.volume_radius(), options);
    path.kind_ = SeedKind::Axisym;
    path.seed_ = seed;
    path.theta_ = seed.theta_grid();

    const std::size_t nt = path.t_grid_.size();
    const std::size_t nx = path.theta_.size();
    const double h = path.theta_[1] - path.theta_[0];
    const double dt = path.t_grid_[1] - path.t_grid_[0];
    const double target_area = 4.0 * std::numbers::pi * path.r_o_ * path.r_o_;

    // Area density in theta coordinates, e^{2W_t(cos Theta)} sin(Theta) dTheta/dtheta.
    std::vector<std::vector<double>> density(nt, std::vector<double>(nx));
    double area_err = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = path.t_grid_[i];
        if (i > 0 && t >= path.theta_switch_ && path.t_grid_[i - 1] >= path.theta_switch_) {
            density[i] = density[i - 1];
            continue;
        }
        const PathSlice s = path.slice(t);
        area_err = std::max(area_err, std::abs(s.total_area - target_area));
        std::vector<double> big(nx);
        for (std::size_t j = 0; j < nx; ++j) big[j] = std::acos(std::clamp(s.x_of_xi[j], -1.0, 1.0));
        auto theta_ext = [&](long k) {
            const long last = static_cast<long>(nx) - 1;
            if (k < 0) return -big[static_cast<std::size_t>(-k)];
            if (k > last) return 2.0 * std::numbers::pi - big[static_cast<std::size_t>(2 * last - k)];
            return big[static_cast<std::size_t>(k)];
        };
        for (std::size_t j = 0; j < nx; ++j) {
            const long k = static_cast<long>(j);
            const double d = (-theta_ext(k + 2) + 8.0 * theta_ext(k + 1) - 8.0 * theta_ext(k - 1) + theta_ext(k - 2)) /
                             (12.0 * h);
            density[i][j] = std::exp(2.0 * s.exponent(s.x_of_xi[j])) * std::sin(big[j]) * d;
        }
    }
    double dev = 0.0;
    auto at = [&](long i, std::size_t j) {
        const long last = static_cast<long>(nt) - 1;
        return density[static_cast<std::size_t>(std::clamp(i, 0L, last))][j];
    };
    for (std::size_t i = 0; i < nt; ++i) {
        const long k = static_cast<long>(i);
        for (std::size_t j = 0; j < nx; ++j) {
            const double d = (-at(k + 2, j) + 8.0 * at(k + 1, j) - 8.0 * at(k - 1, j) + at(k - 2, j)) / (12.0 * dt);
            dev = std::max(dev, std::abs(d));
        }
    }
    path.volume_form_deviation_ = dev;
    path.max_area_error_ = area_err;
    return path;
}

CurvatureFloor curvature_floor_along_path(const MetricPath& path, double margin) {
    if (!(margin >= 0.0 && margin < 1.0)) throw PreconditionError("kappa margin must lie in [0, 1)");
    CurvatureFloor out;
    const int n = path.n();
    if (path.is_round()) {
        const double r_round = n * (n - 1.0) / (path.r_o() * path.r_o());
        out.min_scalar = path.declared_scalar_floor().value_or(r_round);
        out.min_gauss = 0.5 * out.min_scalar;
        out.min_lambda1 = 0.5 * out.min_scalar;
    } else {
        out.min_scalar = std::numeric_limits<double>::infinity();
        out.min_lambda1 = std::numeric_limits<double>::infinity();
        double raw_min_k = std::numeric_limits<double>::infinity();
        const double area = 4.0 * std::numbers::pi * path.r_o() * path.r_o();
        bool past_switch = false;
        for (double t : path.t_grid()) {
            if (past_switch) break;
            past_switch = t >= path.theta_switch();
            const PathSlice s = path.slice(t);
            for (double r : s.scalar) out.min_scalar = std::min(out.min_scalar, r);
            out.min_lambda1 = std::min(out.min_lambda1, lambda1_exponent(s.exponent, area, 0));
            for (double k : gaussian_curvature(conformal_path(*path.seed(), t)))
                raw_min_k = std::min(raw_min_k, k);
        }
        out.min_gauss = 0.5 * out.min_scalar;
        out.floor_preserved = !(raw_min_k > 0.0) || out.min_gauss > 0.0;
    }
    out.kappa_eigen = std::max(0.0, out.min_lambda1 * (1.0 - margin));
    out.kappa_gauss = std::max(0.0, -out.min_gauss) * (1.0 + margin);
    out.kappa_scalar = out.min_scalar > 0.0 ? 0.5 * out.min_scalar * (1.0 - margin) : 0.0;
    return out;
}

AxisymConformalMetric load_seed_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open seed file " + file);
    std::string line;
    if (!std::getline(in, line)) throw IoError("seed file is empty: " + file);
    line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\r'; }), line.end());
    if (line != "theta,w") throw UsageError("seed file header must be `theta,w`, got `" + line + "`");
    std::vector<double> theta, w;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw UsageError("seed file line " + std::to_string(lineno) + " lacks a comma");
        try {
            theta.push_back(std::stod(line.substr(0, comma)));
            w.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw UsageError("seed file line " + std::to_string(lineno) + " is not numeric");
        }
    }
    if (theta.size() < 3) throw UsageError("seed file needs at least 3 samples");
    const double h = std::numbers::pi / double(theta.size() - 1);
    for (std::size_t j = 0; j < theta.size(); ++j)
        if (std::abs(theta[j] - h * double(j)) > 1e-9)
            throw DomainError("seed theta samples must be uniform on [0, pi] including both endpoints");
    return AxisymConformalMetric(std::move(w));
}

}  // namespace rnext
