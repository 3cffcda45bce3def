#include "rnext/lambda_rn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "rnext/errors.hpp"

namespace rnext {

namespace {

double ipow(double x, int k) {
    double result = 1.0;
    double base = x;
    int e = k < 0 ? -k : k;
    while (e > 0) {
        if (e & 1) result *= base;
        base *= base;
        e >>= 1;
    }
    return k < 0 ? 1.0 / result : result;
}

double lambda_coeff(const RNParams& pr) { return 2.0 * pr.lambda / (pr.n * (pr.n + 1.0)); }

void require_positive_r(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radius must be positive and finite");
}

// r^(2(n-1)) p(r); P(0) = q^2 and no negative powers of r.
double poly_p(const RNParams& pr, double r) {
    const int k = pr.n - 1;
    const double rk = ipow(r, k);
    return rk * rk - 2.0 * pr.m * rk + pr.q * pr.q - lambda_coeff(pr) * rk * rk * r * r;
}

template <class F>
double bracket_root(F f, double lo, double hi) {
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, tol, it);
    return 0.5 * (r.first + r.second);
}

// Root of h near or below |q|^(1/(n-1)); requires q != 0.
double h_root(const RNParams& pr) {
    double hi = std::pow(std::abs(pr.q), 1.0 / (pr.n - 1));
    double fhi = eval_h(pr, hi);
    if (fhi == 0.0) return hi;
    // Rounding can leave h(|q|^(1/(n-1))) slightly negative when Lambda = 0.
    for (int i = 0; fhi < 0.0 && i < 60; ++i) {
        hi *= 1.0 + 1e-14 * (1 << std::min(i, 30));
        fhi = eval_h(pr, hi);
    }
    if (fhi == 0.0) return hi;
    return bracket_root([&](double r) { return r > 0.0 ? eval_h(pr, r) : -pr.q * pr.q; }, 0.0, hi);
}

double mass_at_double_root(const RNParams& pr, double r) {
    const int k = pr.n - 1;
    const double rk = ipow(r, k);
    return 0.5 * rk * (1.0 + pr.q * pr.q / (rk * rk) - lambda_coeff(pr) * r * r);
}

// sum_{i<k} a^i b^(k-1-i)
double geometric_sum(double a, double b, int k) {
    double s = 0.0;
    double ai = 1.0;
    const double bk1 = ipow(b, k - 1);
    const double ratio = 1.0 / b;
    double bterm = bk1;
    for (int i = 0; i < k; ++i) {
        s += ai * bterm;
        ai *= a;
        bterm *= ratio;
    }
    return s;
}

// p(t)/(t - r+) without cancellation, given p(r+) = 0.
double quotient_d(const RNParams& pr, double rp, double t) {
    const int k = pr.n - 1;
    const double tk = ipow(t, k);
    const double rk = ipow(rp, k);
    const double term_m = 2.0 * pr.m * geometric_sum(t, rp, k) / (tk * rk);
    const double term_q = pr.q * pr.q * geometric_sum(t, rp, 2 * k) / (tk * tk * rk * rk);
    return term_m - term_q - lambda_coeff(pr) * (t + rp);
}

using State = std::array<double, 2>;

struct ProfileSystem {
    const RNParams* pr;
    void operator()(const State& x, State& dxdt, double) const {
        dxdt[0] = x[1];
        dxdt[1] = 0.5 * eval_dp(*pr, x[0]);
    }
};

// Integrates u'' = p'(u)/2 with v = u' as state and records (u, v) at each node.
// From the horizon the first substep uses the Taylor seed r+ + a2 s^2 + a4 s^4.
void integrate_nodes(const RNParams& pr, bool from_horizon, double u0, double v0,
                     const std::vector<double>& nodes, double h_max, std::vector<double>& u,
                     std::vector<double>& v) {
    boost::numeric::odeint::runge_kutta4<State> stepper;
    ProfileSystem sys{&pr};
    u.assign(nodes.size(), 0.0);
    v.assign(nodes.size(), 0.0);
    State x{u0, v0};
    u[0] = u0;
    v[0] = v0;
    double s = nodes[0];
    bool seeded = !from_horizon;
    const double a2 = from_horizon ? 0.25 * eval_dp(pr, u0) : 0.0;
    const double a4 = from_horizon ? eval_d2p(pr, u0) * eval_dp(pr, u0) / 96.0 : 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double span = nodes[i] - nodes[i - 1];
        const auto steps = static_cast<long>(std::ceil(span / h_max - 1e-9));
        const double h = span / static_cast<double>(std::max(1L, steps));
        for (long j = 0; j < std::max(1L, steps); ++j) {
            if (!seeded) {
                const double t = h;
                x[0] = u0 + a2 * t * t + a4 * t * t * t * t;
                x[1] = 2.0 * a2 * t + 4.0 * a4 * t * t * t;
                seeded = true;
            } else {
                stepper.do_step(sys, x, s, h);
            }
            s += h;
        }
        s = nodes[i];
        u[i] = x[0];
        v[i] = x[1];
    }
}

std::vector<double> uniform_grid(double a, double b, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    g.back() = b;
    return g;
}

constexpr double kOdeStep = 1e-3;

}  // namespace

void validate(const RNParams& pr) {
    if (pr.n < 2) throw PreconditionError("dimension n must be at least 2");
    if (!std::isfinite(pr.m) || !std::isfinite(pr.q) || !std::isfinite(pr.lambda))
        throw PreconditionError("model parameters must be finite");
    if (pr.lambda > 0.0) throw PreconditionError("cosmological constant must satisfy lambda <= 0");
}

std::string to_string(Extremality kind) {
    switch (kind) {
        case Extremality::SubExtremal: return "sub-extremal";
        case Extremality::Extremal: return "extremal";
        case Extremality::SuperExtremal: return "super-extremal";
    }
    return "unknown";
}

double eval_p(const RNParams& pr, double r) {
    require_positive_r(r);
    const int k = pr.n - 1;
    const double rk = ipow(r, k);
    return 1.0 - 2.0 * pr.m / rk + pr.q * pr.q / (rk * rk) - lambda_coeff(pr) * r * r;
}

double eval_dp(const RNParams& pr, double r) {
    require_positive_r(r);
    const int n = pr.n;
    return 2.0 * (n - 1) * pr.m / ipow(r, n) - 2.0 * (n - 1) * pr.q * pr.q / ipow(r, 2 * n - 1) -
           2.0 * lambda_coeff(pr) * r;
}

double eval_d2p(const RNParams& pr, double r) {
    require_positive_r(r);
    const int n = pr.n;
    return -2.0 * n * (n - 1) * pr.m / ipow(r, n + 1) +
           2.0 * (n - 1) * (2 * n - 1) * pr.q * pr.q / ipow(r, 2 * n) - 2.0 * lambda_coeff(pr);
}

double eval_h(const RNParams& pr, double r) {
    require_positive_r(r);
    const int n = pr.n;
    const double r2k = ipow(r, 2 * (n - 1));
    return r2k - pr.q * pr.q - 2.0 * pr.lambda * r2k * r * r / (n * (n - 1.0));
}

ExtremalityClass classify(const RNParams& pr, double band) {
    validate(pr);
    ExtremalityClass out;
    if (pr.m <= 0.0) {
        out.kind = Extremality::SuperExtremal;
        return out;
    }
    auto poly = [&](double r) { return poly_p(pr, r); };
    const int k = pr.n - 1;
    if (pr.q == 0.0) {
        // r^(n-1) p(r) = r^(n-1) - 2m - c r^(n+1) is increasing with value -2m at r = 0.
        auto reduced = [&](double r) {
            const double rk = ipow(r, k);
            return rk - 2.0 * pr.m - lambda_coeff(pr) * rk * r * r;
        };
        const double hi = std::pow(2.0 * pr.m, 1.0 / k);
        const double rp = reduced(hi) <= 0.0 ? hi : bracket_root(reduced, 0.0, hi);
        out.kind = Extremality::SubExtremal;
        out.r_plus = rp;
    } else {
        const double rh = h_root(pr);
        const double mc = mass_at_double_root(pr, rh);
        RNParams crit = pr;
        crit.m = mc;
        const double d2 = eval_d2p(crit, rh);
        const double width = band * (1.0 + std::abs(d2) * rh);
        const double band_m = d2 > 0.0 ? width * width * ipow(rh, k) / (4.0 * d2) : 0.0;
        const double floor_m = 64.0 * std::numeric_limits<double>::epsilon() * std::max(pr.m, mc);
        const double tol_m = std::max(band_m, floor_m);
        const double prh = poly(rh);
        if (std::abs(pr.m - mc) <= tol_m || (pr.m > mc && !(prh < 0.0))) {
            out.kind = Extremality::Extremal;
            out.r_plus = rh;
            return out;
        }
        if (pr.m < mc) {
            out.kind = Extremality::SuperExtremal;
            return out;
        }
        out.kind = Extremality::SubExtremal;
        out.r_minus = bracket_root(poly, 0.0, rh);
        double hi = 2.0 * rh;
        int guard = 0;
        while (poly(hi) <= 0.0) {
            hi *= 2.0;
            if (++guard > 200) throw InternalError("no upper bracket for the outer root of p");
        }
        out.r_plus = bracket_root(poly, rh, hi);
    }
    const double rp = *out.r_plus;
    const double dp = eval_dp(pr, rp);
    const double hp = eval_h(pr, rp);
    const double ident = (pr.n - 1) * hp / ipow(rp, 2 * pr.n - 1);
    if (!(dp > 0.0) || !(hp > 0.0) || std::abs(dp - ident) > 1e-8 * (1.0 + std::abs(dp)))
        throw InternalError("sign cross-check of p'(r+) against h(r+) failed");
    if (out.r_minus) {
        const double rm = *out.r_minus;
        if (!(eval_h(pr, rm) < 0.0) || !(eval_dp(pr, rm) < 0.0))
            throw InternalError("sign cross-check at the inner root failed");
    }
    return out;
}

double critical_mass(int n, double q, double lambda) {
    RNParams pr{n, 0.0, q, lambda};
    validate(pr);
    if (q == 0.0) return 0.0;
    return mass_at_double_root(pr, h_root(pr));
}

double radial_coordinate(const RNParams& pr, double r) {
    const auto cls = classify(pr);
    if (cls.kind != Extremality::SubExtremal)
        throw NotApplicableError("radial coordinate from the horizon requires a sub-extremal model");
    const double rp = *cls.r_plus;
    if (r < rp) {
        if (r >= rp * (1.0 - 1e-14)) return 0.0;
        throw DomainError("radius below the outer horizon");
    }
    const double tmax = std::sqrt(r - rp);
    if (tmax == 0.0) return 0.0;
    auto integrand = [&](double tau) { return 2.0 / std::sqrt(quotient_d(pr, rp, rp + tau * tau)); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, tmax, 12,
                                                                         1e-11);
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Analytic: return "analytic";
        case Provenance::Ode: return "ode";
        case Provenance::Mollified: return "mollified";
        case Provenance::Bent: return "bent";
    }
    return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "analytic") return Provenance::Analytic;
    if (s == "ode") return Provenance::Ode;
    if (s == "mollified") return Provenance::Mollified;
    if (s == "bent") return Provenance::Bent;
    throw UsageError("unknown provenance tag '" + s + "'");
}

void SampledProfile::push_back(double s_val, double f_val, double df_val, double d2f_val,
                               Provenance tag) {
    s.push_back(s_val);
    f.push_back(f_val);
    df.push_back(df_val);
    d2f.push_back(d2f_val);
    provenance.push_back(tag);
}

void SampledProfile::check_invariants() const {
    const std::size_t n = s.size();
    if (f.size() != n || df.size() != n || d2f.size() != n || provenance.size() != n)
        throw InternalError("profile columns have inconsistent lengths");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(f[i] > 0.0)) throw InternalError("profile is not positive");
        if (i > 0 && !(s[i] > s[i - 1])) throw InternalError("profile grid is not strictly increasing");
    }
}

SampledProfile rn_profile(const RNParams& pr, double s_max, int grid_n) {
    const auto cls = classify(pr);
    if (cls.kind != Extremality::SubExtremal)
        throw NotApplicableError("horizon-based radial profile requires a sub-extremal model");
    if (!(s_max > 0.0) || grid_n < 2) throw PreconditionError("need s_max > 0 and at least two samples");
    const double rp = *cls.r_plus;
    SampledProfile out;
    out.s = uniform_grid(0.0, s_max, grid_n);
    integrate_nodes(pr, true, rp, 0.0, out.s, kOdeStep, out.f, out.df);
    out.d2f.resize(out.s.size());
    for (std::size_t i = 0; i < out.s.size(); ++i) out.d2f[i] = 0.5 * eval_dp(pr, out.f[i]);
    out.provenance.assign(out.s.size(), Provenance::Ode);
    return out;
}

SampledProfile rn_profile_mu(const RNParams& pr, double mu, double s_max, int grid_n) {
    require_positive_r(mu);
    const auto cls = classify(pr);
    if (cls.r_plus && mu <= *cls.r_plus) throw DomainError("mu must exceed the outer horizon radius");
    const double p_mu = eval_p(pr, mu);
    if (!(p_mu > 0.0)) throw DomainError("p(mu) must be positive");
    if (!(s_max > 0.0) || grid_n < 2) throw PreconditionError("need s_max > 0 and at least two samples");
    SampledProfile out;
    out.s = uniform_grid(0.0, s_max, grid_n);
    integrate_nodes(pr, false, mu, std::sqrt(p_mu), out.s, kOdeStep, out.f, out.df);
    out.d2f.resize(out.s.size());
    for (std::size_t i = 0; i < out.s.size(); ++i) out.d2f[i] = 0.5 * eval_dp(pr, out.f[i]);
    out.provenance.assign(out.s.size(), Provenance::Ode);
    return out;
}

double rotsym_scalar_curvature(int n, double f, double df, double d2f) {
    return n * ((n - 1) * (1.0 - df * df) - 2.0 * f * d2f) / (f * f);
}

DECReport verify_model_identities(const RNParams& pr, const SampledProfile& profile, double tol) {
    DECReport rep;
    rep.tol = tol;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const double f = profile.f[i];
        const double r = rotsym_scalar_curvature(pr.n, f, profile.df[i], profile.d2f[i]);
        const double target = 2.0 * pr.lambda + pr.n * (pr.n - 1.0) * pr.q * pr.q / ipow(f, 2 * pr.n);
        const double viol = std::abs(r - target);
        if (viol > rep.max_violation) {
            rep.max_violation = viol;
            rep.worst_s = profile.s[i];
        }
    }
    rep.ok = rep.max_violation <= tol;
    return rep;
}

double horizon_mean_curvature(const RNParams& pr, double r) {
    require_positive_r(r);
    const auto cls = classify(pr);
    if (cls.r_plus && r < *cls.r_plus) {
        if (r < *cls.r_plus * (1.0 - 1e-12)) throw DomainError("radius inside the outer horizon");
        return 0.0;
    }
    return pr.n * std::sqrt(std::max(0.0, eval_p(pr, r))) / r;
}

struct RNProfileFunction::Impl {
    boost::math::interpolators::quintic_hermite<std::vector<double>> spline;
};

RNProfileFunction::RNProfileFunction(const RNParams& pr, std::optional<double> mu, double s_max,
                                     double step)
    : params_(pr), s_max_(s_max) {
    const auto cls = classify(pr);
    if (!(s_max > 0.0) || !(step > 0.0)) throw PreconditionError("need s_max > 0 and step > 0");
    if (mu) {
        require_positive_r(*mu);
        if (cls.r_plus && *mu <= *cls.r_plus) throw DomainError("mu must exceed the outer horizon radius");
        if (!(eval_p(pr, *mu) > 0.0)) throw DomainError("p(mu) must be positive");
        u0_ = *mu;
        from_horizon_ = false;
    } else {
        if (cls.kind != Extremality::SubExtremal)
            throw NotApplicableError("horizon start requires a sub-extremal model");
        u0_ = *cls.r_plus;
        from_horizon_ = true;
    }
    r_plus_ = cls.r_plus.value_or(0.0);
    const int count = static_cast<int>(std::ceil(s_max / step)) + 1;
    std::vector<double> nodes = uniform_grid(0.0, s_max, std::max(count, 3));
    std::vector<double> u, v;
    integrate_nodes(pr, from_horizon_, u0_, from_horizon_ ? 0.0 : std::sqrt(eval_p(pr, u0_)), nodes,
                    step, u, v);
    std::vector<double> du(u.size()), d2u(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        du[i] = slope_of(u[i]);
        d2u[i] = 0.5 * eval_dp(pr, u[i]);
    }
    impl_ = std::make_unique<Impl>(Impl{boost::math::interpolators::quintic_hermite<std::vector<double>>(
        std::move(nodes), std::move(u), std::move(du), std::move(d2u))});
}

RNProfileFunction::~RNProfileFunction() = default;
RNProfileFunction::RNProfileFunction(RNProfileFunction&&) noexcept = default;
RNProfileFunction& RNProfileFunction::operator=(RNProfileFunction&&) noexcept = default;

double RNProfileFunction::slope_of(double u) const {
    if (from_horizon_) {
        if (u <= r_plus_) return 0.0;
        return std::sqrt(std::max(0.0, (u - r_plus_) * quotient_d(params_, r_plus_, u)));
    }
    return std::sqrt(std::max(0.0, eval_p(params_, u)));
}

RNProfileFunction::Value RNProfileFunction::operator()(double s) const {
    if (s < 0.0 || s > s_max_) throw DomainError("profile evaluated outside its interval");
    const double u = impl_->spline(s);
    return {u, slope_of(u), 0.5 * eval_dp(params_, u)};
}

double RNProfileFunction::inverse(double r) const {
    const double lo = impl_->spline(0.0);
    const double hi = impl_->spline(s_max_);
    if (r < lo || r > hi) throw DomainError("radius outside the sampled profile range");
    if (r == lo) return 0.0;
    return bracket_root([&](double s) { return impl_->spline(s) - r; }, 0.0, s_max_);
}

double RNProfileFunction::inverse_slope(double slope) const {
    auto g = [&](double s) { return slope_of(impl_->spline(s)) - slope; };
    if (g(0.0) >= 0.0) return 0.0;
    if (g(s_max_) < 0.0) throw DomainError("slope not attained on the sampled profile");
    return bracket_root(g, 0.0, s_max_);
}

}  // namespace rnext
