#include "rnext/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rnext/chebyshev.hpp"
#include "rnext/errors.hpp"
#include "rnext/quasilocal.hpp"

namespace rnext {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Fraction of the bent band [s0 - delta, s0) handed to the gluing step as the right piece.
constexpr double kBendBand = 0.9;
// exp(-1/y^2) stays a normal double for y above this.
constexpr double kBendUnderflowX = 0.038;
constexpr int kBridgeTableIntervals = 4096;
constexpr int kMollifierNodes = 64;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Logistic form of the e^{-1/x} smooth step: S(x) = 1 / (1 + exp(-t)), t = 1/(1-x) - 1/x.
struct StepValue {
    double s, ds, d2s;
};

StepValue smooth_step(double x) {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    if (x >= 1.0) return {1.0, 0.0, 0.0};
    const double t = 1.0 / (1.0 - x) - 1.0 / x;
    const double e = std::exp(-std::abs(t));
    const double sig = t >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    const double dsig = e / ((1.0 + e) * (1.0 + e));
    const double d2sig = dsig * (t >= 0.0 ? -(1.0 - e) / (1.0 + e) : (1.0 - e) / (1.0 + e));
    const double dt = 1.0 / ((1.0 - x) * (1.0 - x)) + 1.0 / (x * x);
    const double d2t = 2.0 / std::pow(1.0 - x, 3) - 2.0 / (x * x * x);
    return {sig, dsig * dt, d2sig * dt * dt + dsig * d2t};
}

double bump_unnormalized(double s) {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
}

double bump_constant() {
    static const double c = [] {
        const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            bump_unnormalized, -1.0, 1.0, 15, 1e-15);
        return 1.0 / integral;
    }();
    return c;
}

const GaussRule& mollifier_rule() {
    static const GaussRule rule = gauss_legendre(kMollifierNodes);
    return rule;
}

ProfileValue add_scaled(const ProfileValue& acc, const ProfileValue& v, double w) {
    return {acc.f + w * v.f, acc.df + w * v.df, acc.d2f + w * v.d2f};
}

double junction_mass(int n, double q, double lambda, const ProfileValue& v) {
    return hawking_rotsym(n, q, lambda, v.f, v.df);
}

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

double bend_B(const RNParams& pr, double u) {
    return (pr.n - 1.0) * eval_h(pr, u) / (2.0 * std::pow(u, 2 * pr.n - 1));
}

}  // namespace

double omega_operator(int n, double q, double lambda, double f, double df) {
    if (!(f > 0.0)) throw DomainError("profile value must be positive");
    const RNParams pr{n, 0.0, q, lambda};
    return (n - 1.0) / (2.0 * f) * (eval_h(pr, f) / std::pow(f, 2 * (n - 1)) - df * df);
}

double dec_margin_value(int n, double q, double lambda, const ProfileValue& v) {
    return omega_operator(n, q, lambda, v.f, v.df) - v.d2f;
}

std::vector<double> dec_margin_operator(int n, double q, double lambda, const SampledProfile& p) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        out[i] = dec_margin_value(n, q, lambda, {p.f[i], p.df[i], p.d2f[i]});
    return out;
}

double glue_mass_floor(int n, double q, double lambda, double f) {
    return q * q / std::pow(f, n - 1) + 2.0 * lambda * std::pow(f, n + 1) / (n * (n - 1.0) * (n + 1.0));
}

ProfilePiece ProfilePiece::from_samples(const SampledProfile& samples, double q) {
    samples.check_invariants();
    if (samples.size() < 2) throw PreconditionError("profile piece needs at least two samples");
    auto spline = std::make_shared<boost::math::interpolators::quintic_hermite<std::vector<double>>>(
        std::vector<double>(samples.s), std::vector<double>(samples.f), std::vector<double>(samples.df),
        std::vector<double>(samples.d2f));
    ProfilePiece piece;
    piece.fn = [spline](double s) -> ProfileValue {
        return {(*spline)(s), spline->prime(s), spline->double_prime(s)};
    };
    piece.a = samples.s.front();
    piece.b = samples.s.back();
    piece.q = q;
    piece.tag = samples.provenance.empty() ? Provenance::Analytic : samples.provenance.front();
    return piece;
}

void check_glue_inputs(const GlueInputs& in) {
    if (in.n < 2) throw PreconditionError("dimension must be at least 2");
    if (in.lambda > 0.0) throw PreconditionError("Lambda must be non-positive");
    if (!(in.left.a < in.left.b) || !(in.right.a < in.right.b))
        throw PreconditionError("glue pieces need non-degenerate intervals");
    const ProfileValue l = in.left.fn(in.left.b);
    const ProfileValue r = in.right.fn(in.right.a);
    if (!(l.f < r.f)) throw PreconditionError("gluing needs f1(b1) < f2(a2)");
    if (!(l.df >= r.df)) throw PreconditionError("gluing needs f1'(b1) >= f2'(a2)");
    if (!(r.df >= 0.0)) throw PreconditionError("gluing needs f2'(a2) >= 0");
    const double q2 = in.q * in.q;
    if (q2 > in.left.q * in.left.q || q2 > in.right.q * in.right.q)
        throw PreconditionError("target charge exceeds an input charge");
    const auto junction = [&](const ProfilePiece& piece, const ProfileValue& v, const char* name) {
        const double mass = junction_mass(in.n, piece.q, in.lambda, v);
        const double floor = glue_mass_floor(in.n, piece.q, in.lambda, v.f);
        if (close_rel(mass, floor, 1e-12)) {
            if (!(q2 < piece.q * piece.q))
                throw PreconditionError(std::string("Hawking mass condition at the ") + name +
                                        " junction holds with equality; the target charge must be strictly smaller");
        } else if (mass < floor) {
            throw PreconditionError(std::string("Hawking mass condition fails at the ") + name + " junction");
        }
    };
    junction(in.left, l, "left");
    junction(in.right, r, "right");
}

double translate_right_interval(const GlueInputs& in) {
    check_glue_inputs(in);
    const ProfileValue l = in.left.fn(in.left.b);
    const ProfileValue r = in.right.fn(in.right.a);
    const double rise = r.f - l.f;
    const double s1 = l.df;
    const double s2 = r.df;
    double gap;
    if (close_rel(s1, s2, 1e-14)) {
        if (!(s1 > 0.0)) throw InternalError("equal slopes must be positive to bridge a rise");
        gap = rise / s1;
    } else {
        gap = 2.0 * rise / (s1 + s2);
        const bool ok = gap * s1 > rise && (s2 == 0.0 || rise > gap * s2);
        if (!ok) throw InternalError("no admissible translation of the right interval");
    }
    return in.left.b + gap - in.right.a;
}

struct Bridge::Table {
    boost::math::interpolators::quintic_hermite<std::vector<double>> integral;
};

Bridge::Bridge(double b1, double a2, double f_left, double slope_left, double slope_right, double rise)
    : b1_(b1), a2_(a2), f_left_(f_left), s1_(slope_left), s2_(slope_right) {
    const double L = a2 - b1;
    if (!(L > 0.0)) throw PreconditionError("bridge interval must be non-degenerate");
    if (close_rel(s1_, s2_, 1e-14)) {
        s2_ = s1_;
        return;
    }
    // Mean of S_c on [0, 1] needed for the integral condition.
    const double target = 1.0 - (rise / L - s2_) / (s1_ - s2_);
    if (!(target > 0.0 && target < 1.0)) throw InternalError("bridge integral target outside the achievable range");

    const GaussRule g = gauss_legendre(8);
    const auto mean_of = [&](double c) {
        const double alpha = std::log(0.5) / std::log(c);
        const int m = 512;
        double sum = 0.0;
        for (int k = 0; k < m; ++k) {
            const double lo = static_cast<double>(k) / m;
            const double hi = static_cast<double>(k + 1) / m;
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.x[j];
                sum += 0.5 * (hi - lo) * g.w[j] * smooth_step(std::pow(x, alpha)).s;
            }
        }
        return sum;
    };
    double lo = 1e-9, hi = 1.0 - 1e-9;
    if (!(mean_of(lo) >= target && mean_of(hi) <= target))
        throw InternalError("bridge shape parameter bisection has no sign change");
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mean = mean_of(mid);
        if (std::abs(mean - target) < 1e-15) {
            lo = hi = mid;
            break;
        }
        if (mean > target)
            lo = mid;
        else
            hi = mid;
    }
    center_ = 0.5 * (lo + hi);

    const int m = kBridgeTableIntervals;
    std::vector<double> x(m + 1), y(m + 1), dy(m + 1), d2y(m + 1);
    const double alpha = std::log(0.5) / std::log(center_);
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
        x[k] = static_cast<double>(k) / m;
        if (k > 0) {
            const double a = x[k - 1], b = x[k];
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                const double xx = 0.5 * (a + b) + 0.5 * (b - a) * g.x[j];
                acc += 0.5 * (b - a) * g.w[j] * smooth_step(std::pow(xx, alpha)).s;
            }
        }
        y[k] = acc;
        dy[k] = step(x[k]);
        d2y[k] = step_prime(x[k]);
    }
    // Remove the residual of the bisection so that the rise is met to rounding.
    const double scale = target / acc;
    for (int k = 0; k <= m; ++k) y[k] *= scale;
    table_ = std::make_shared<const Table>(Table{boost::math::interpolators::quintic_hermite<std::vector<double>>(
        std::move(x), std::move(y), std::move(dy), std::move(d2y))});
}

double Bridge::step(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double alpha = std::log(0.5) / std::log(center_);
    return smooth_step(std::pow(x, alpha)).s;
}

double Bridge::step_prime(double x) const {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double alpha = std::log(0.5) / std::log(center_);
    const double y = std::pow(x, alpha);
    if (y <= 0.0 || y >= 1.0) return 0.0;
    return smooth_step(y).ds * alpha * y / x;
}

double Bridge::step_integral(double x) const {
    if (x <= 0.0) return 0.0;
    const double top = table_->integral(1.0);
    if (x >= 1.0) return top + (x - 1.0);
    return table_->integral(x);
}

double Bridge::zeta(double s) const {
    if (!table_) return s1_;
    return s1_ - (s1_ - s2_) * step((s - b1_) / (a2_ - b1_));
}

double Bridge::zeta_prime(double s) const {
    if (!table_) return 0.0;
    const double L = a2_ - b1_;
    return -(s1_ - s2_) * step_prime((s - b1_) / L) / L;
}

ProfileValue Bridge::operator()(double s) const {
    const double L = a2_ - b1_;
    const double x = (s - b1_) / L;
    if (!table_) return {f_left_ + s1_ * (s - b1_), s1_, 0.0};
    const double f = f_left_ + L * (s1_ * x - (s1_ - s2_) * step_integral(x));
    return {f, zeta(s), zeta_prime(s)};
}

Bridge build_bridge(const GlueInputs& in, double shift) {
    const ProfileValue l = in.left.fn(in.left.b);
    const ProfileValue r = in.right.fn(in.right.a);
    return Bridge(in.left.b, in.right.a + shift, l.f, l.df, r.df, r.f - l.f);
}

struct GlueResult::Impl {
    ProfilePiece left;
    ProfilePiece right;
    Bridge bridge;
    double shift;
    double eps;
    double m1, w1, m2, w2;

    ProfileValue tilde(double s) const {
        if (s <= left.b) return left.fn(std::max(s, left.a));
        if (s < bridge.end()) return bridge(s);
        return right.fn(std::min(s - shift, right.b));
    }

    // eta and its first two derivatives.
    StepValue eta(double t) const {
        if (t <= m1 || t >= m2) return {0.0, 0.0, 0.0};
        if (t < m1 + w1) {
            const StepValue v = smooth_step((t - m1) / w1);
            return {v.s, v.ds / w1, v.d2s / (w1 * w1)};
        }
        if (t > m2 - w2) {
            const StepValue v = smooth_step((m2 - t) / w2);
            return {v.s, -v.ds / w2, v.d2s / (w2 * w2)};
        }
        return {1.0, 0.0, 0.0};
    }

    ProfileValue mollified(double t) const {
        const StepValue h = eta(t);
        if (h.s == 0.0) return tilde(t);
        const double e = eps * h.s;
        const double e1 = eps * h.ds;
        const double e2 = eps * h.d2s;
        // Split [-1, 1] where y = t - e s crosses a kink.
        std::vector<double> cuts{-1.0, 1.0};
        for (double k : {left.b, bridge.end()}) {
            const double sk = (t - k) / e;
            if (sk > -1.0 && sk < 1.0) cuts.push_back(sk);
        }
        std::sort(cuts.begin(), cuts.end());
        const GaussRule& g = mollifier_rule();
        const double c = bump_constant();
        ProfileValue acc{0.0, 0.0, 0.0};
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            const double lo = cuts[p], hi = cuts[p + 1];
            const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                const double s = mid + half * g.x[j];
                const double w = half * g.w[j] * c * bump_unnormalized(s);
                if (w == 0.0) continue;
                const ProfileValue v = tilde(t - e * s);
                const double dy = 1.0 - e1 * s;
                acc = add_scaled(acc, {v.f, v.df * dy, v.d2f * dy * dy - v.df * e2 * s}, w);
            }
        }
        return acc;
    }
};

ProfileValue GlueResult::operator()(double s) const { return impl_->mollified(s); }
ProfileValue GlueResult::unmollified(double s) const { return impl_->tilde(s); }
double GlueResult::begin() const { return impl_->left.a; }
double GlueResult::end() const { return impl_->right.b + impl_->shift; }

GlueResult mollify_and_certify(const GlueInputs& in, const Bridge& bridge, double shift) {
    const int n = in.n;
    const double q = in.q, lambda = in.lambda;
    const double a1 = in.left.a, b1 = in.left.b;
    const double a2 = in.right.a + shift, b2 = in.right.b + shift;
    if (!(a2 > b1)) throw PreconditionError("right interval must lie beyond the left one after translation");

    auto impl = std::make_shared<GlueResult::Impl>(GlueResult::Impl{in.left, in.right, bridge, shift, 0.0, 0.0, 0.0,
                                                                    0.0, 0.0});
    impl->m1 = 0.5 * (a1 + b1);
    impl->w1 = 0.5 * (b1 - impl->m1);
    impl->m2 = 0.5 * (a2 + b2);
    impl->w2 = 0.5 * (impl->m2 - a2);

    // Infimum of the unmollified margin over each smooth piece, endpoints included one-sided.
    double inf_margin = kInf;
    bool monotone = true;
    const auto scan = [&](const auto& fn, double lo, double hi) {
        const int m = 800;
        for (int k = 0; k <= m; ++k) {
            const double s = lo + (hi - lo) * k / m;
            const ProfileValue v = fn(s);
            inf_margin = std::min(inf_margin, dec_margin_value(n, q, lambda, v));
            if (!(v.df > 0.0)) monotone = false;
        }
    };
    scan(in.left.fn, a1, b1);
    scan(bridge, b1, a2);
    scan([&](double s) { return in.right.fn(s - shift); }, a2, b2);
    if (!(inf_margin > 0.0)) throw PreconditionError("glued profile before mollification violates the strict DEC");
    const double d = inf_margin / 3.0;

    GlueResult out;
    out.shift = shift;
    out.d = d;
    out.kink_left = b1;
    out.kink_right = a2;
    out.exact_left_end = impl->m1;
    out.exact_right_begin = impl->m2;

    const double length = b2 - a1;
    const double floor = std::ldexp(length, -30);
    const double c1_tol = 1e-6 * std::max(1.0, std::abs(impl->tilde(b2).f));
    double eps = 0.25 * std::min({impl->w1, impl->w2, a2 - b1});
    for (; eps >= floor; eps *= 0.5) {
        impl->eps = eps;
        std::vector<double> grid;
        const int coarse = 400;
        for (int k = 0; k <= coarse; ++k) grid.push_back(impl->m1 + (impl->m2 - impl->m1) * k / coarse);
        for (double kink : {b1, a2})
            for (int k = -16; k <= 16; ++k) grid.push_back(kink + eps * k / 8.0);
        double min_margin = kInf, c1 = 0.0;
        bool positive_slope = true;
        for (double t : grid) {
            const ProfileValue v = impl->mollified(t);
            const ProfileValue w = impl->tilde(t);
            min_margin = std::min(min_margin, dec_margin_value(n, q, lambda, v));
            c1 = std::max(c1, std::abs(v.f - w.f) + std::abs(v.df - w.df));
            if (!(v.df > 0.0)) positive_slope = false;
        }
        out.trace.push_back("eps = " + fmt(eps) + ": min margin = " + fmt(min_margin) + ", d/2 = " + fmt(0.5 * d) +
                            ", C1 distance = " + fmt(c1));
        if (min_margin >= 0.5 * d && c1 < c1_tol && (!monotone || positive_slope)) {
            out.epsilon = eps;
            out.min_margin = min_margin;
            out.impl_ = impl;
            return out;
        }
    }
    throw SurgeryError("mollification could not be certified above 2^-30 of the interval length", out.trace);
}

GlueResult glue(const GlueInputs& in) {
    const double shift = translate_right_interval(in);
    const Bridge bridge = build_bridge(in, shift);
    return mollify_and_certify(in, bridge, shift);
}

double bend_integral(double X) {
    if (X <= 0.0) return 0.0;
    return X * std::exp(-1.0 / (X * X)) - std::sqrt(std::numbers::pi) * std::erfc(1.0 / X);
}

BentProfile::BentProfile(std::shared_ptr<const RNProfileFunction> u, double s0, double delta, double scale)
    : u_(std::move(u)), s0_(s0), delta_(delta), scale_(scale) {
    if (!u_) throw PreconditionError("bent profile needs a model profile");
    if (!(delta > 0.0) || !(s0 > 0.0) || s0 > u_->s_max() || !(scale > 0.0))
        throw PreconditionError("invalid bending parameters");
}

double BentProfile::sigma(double s) const {
    if (s >= s0_) return s;
    return s - scale_ * bend_integral((s0_ - s) / scale_);
}

ProfileValue BentProfile::operator()(double s) const {
    if (s >= s0_) return (*u_)(s);
    const double X = s0_ - s;
    const double l2 = scale_ * scale_;
    const double e = std::exp(-l2 / (X * X));
    const double ds = 1.0 + e;
    const double d2s = -2.0 * l2 * e / (X * X * X);
    const ProfileValue v = (*u_)(sigma(s));
    return {v.f, v.df * ds, v.d2f * ds * ds + v.df * d2s};
}

double BentProfile::bracket(double s) const {
    if (s >= s0_) return 0.0;
    const double X = s0_ - s;
    const double l2 = scale_ * scale_;
    const double e = std::exp(-l2 / (X * X));
    const ProfileValue v = (*u_)(sigma(s));
    return 2.0 * l2 * v.df / (X * X * X) - (2.0 + e) * bend_B(u_->params(), v.f);
}

double BentProfile::margin(double s) const {
    const RNParams& pr = u_->params();
    if (s >= s0_) return dec_margin_value(pr.n, pr.q, pr.lambda, (*u_)(s));
    const double X = s0_ - s;
    return std::exp(-scale_ * scale_ / (X * X)) * bracket(s);
}

BendResult bend(std::shared_ptr<const RNProfileFunction> u, double s0, double alpha, double slope_cap,
                double delta_start, double scale) {
    if (!u) throw PreconditionError("bending needs a model profile");
    if (!(s0 > 0.0) || s0 > u->s_max()) throw PreconditionError("bending point outside the model profile");
    if (!((*u)(s0).df > 0.0)) throw PreconditionError("bending needs f'(s0) > 0");
    const double floor = std::ldexp(std::max(1.0, s0), -30);
    std::vector<std::string> trace;
    for (double delta = std::min(delta_start, s0); delta >= floor; delta *= 0.5) {
        const double start = s0 - delta - scale * bend_integral(delta / scale);
        if (start < 0.0) {
            trace.push_back("delta = " + fmt(delta) + ": sigma leaves the profile domain");
            continue;
        }
        const BentProfile bent(u, s0, delta, scale);
        double min_bracket = kInf;
        const int m = 256;
        for (int k = 1; k <= m; ++k) min_bracket = std::min(min_bracket, bent.bracket(s0 - delta * k / m));
        const ProfileValue v = bent(s0 - delta);
        std::string reason;
        if (!(min_bracket > 0.0)) reason = "margin bracket not positive";
        if (reason.empty() && std::isfinite(alpha) && !(v.f > alpha)) reason = "f(s0 - delta) <= alpha";
        if (reason.empty() && std::isfinite(slope_cap) && !(v.df < slope_cap)) reason = "f'(s0 - delta) >= cap";
        trace.push_back("delta = " + fmt(delta) + ": min bracket = " + fmt(min_bracket) +
                        (reason.empty() ? std::string() : ", " + reason));
        if (!reason.empty()) continue;

        BendResult r{bent, delta, min_bracket, {}, {}, trace};
        const int nb = 257, nr = 257;
        for (int k = 0; k < nb; ++k) {
            const double s = s0 - delta + delta * k / nb;
            const ProfileValue w = bent(s);
            r.samples.push_back(s, w.f, w.df, w.d2f, Provenance::Bent);
            r.sigma.push_back(bent.sigma(s));
        }
        for (int k = 0; k < nr; ++k) {
            const double s = s0 + (u->s_max() - s0) * k / (nr - 1);
            const ProfileValue w = (*u)(s);
            r.samples.push_back(s, w.f, w.df, w.d2f, Provenance::Ode);
            r.sigma.push_back(s);
        }
        return r;
    }
    throw SurgeryError("bending certificate never held down to the delta floor", trace);
}

BendResult bend(const RNParams& params, double s0, double alpha, double slope_cap) {
    auto u = std::make_shared<const RNProfileFunction>(params, std::nullopt, s0 + std::max(10.0, s0));
    return bend(u, s0, alpha, slope_cap);
}

double GluedExtension::end() const { return samples.s.back(); }

ProfileValue GluedExtension::operator()(double s) const {
    if (s <= glued.end()) return glued(s);
    return bent.profile(s - glued.shift);
}

Provenance GluedExtension::region(double s) const {
    if (s <= glued.exact_left_end) return Provenance::Analytic;
    if (s < glued.exact_right_begin) return Provenance::Mollified;
    if (s < attachment.s_match) return Provenance::Bent;
    return Provenance::Ode;
}

double GluedExtension::margin(double s) const {
    if (region(s) == Provenance::Bent) return bent.profile.margin(s - glued.shift);
    return dec_margin_value(n, attachment.q_e, lambda, (*this)(s));
}

GluedExtension glue_to_rn(const ProfilePiece& tail, int n, double m_star, double m_e, double q_e, double lambda,
                          double extra_length) {
    if (!(tail.a < tail.b)) throw PreconditionError("collar tail needs a non-degenerate interval");
    if (!(extra_length > 0.0)) throw PreconditionError("model region length must be positive");
    const ProfileValue vb = tail.fn(tail.b);
    const double fb = vb.f, dfb = vb.df;
    if (!(dfb > 0.0)) throw PreconditionError("gluing to the model needs f'(b) > 0");
    const double mass_b = hawking_rotsym(n, tail.q, lambda, fb, dfb);
    if (!close_rel(mass_b, m_star, 1e-8)) throw PreconditionError("m_star is not the Hawking mass at the tail end");
    const double floor_i = glue_mass_floor(n, tail.q, lambda, fb);
    const bool equality_i = close_rel(m_star, floor_i, 1e-12);
    if (!equality_i && m_star < floor_i) throw PreconditionError("Hawking mass at the tail end is below the charge floor");
    const double q2 = tail.q * tail.q, qe2 = q_e * q_e;
    if (qe2 > q2) throw PreconditionError("model charge must satisfy q_e^2 <= q^2");
    if (m_e < m_star) throw PreconditionError("model mass must satisfy m_e >= m_star");
    if (!(m_e > m_star || qe2 < q2)) throw PreconditionError("need m_e > m_star or q_e^2 < q^2");
    if (equality_i && !(qe2 < q2)) throw PreconditionError("equality in the mass floor requires q_e^2 < q^2");

    const RNParams pr{n, m_e, q_e, lambda};
    const ExtremalityClass cls = classify(pr);
    GluedExtension out;
    out.n = n;
    out.lambda = lambda;
    out.q_tail = tail.q;
    out.tail = tail;
    std::optional<double> mu;
    double u0;
    switch (cls.kind) {
        case Extremality::SubExtremal:
            u0 = *cls.r_plus;
            break;
        case Extremality::SuperExtremal:
            mu = fb;
            u0 = fb;
            break;
        case Extremality::Extremal:
        default:
            if (fb > *cls.r_plus) {
                mu = fb;
            } else {
                double step = *cls.r_plus;
                while (std::sqrt(std::max(0.0, eval_p(pr, *cls.r_plus + step))) >= 0.5 * dfb) {
                    step *= 0.5;
                    if (step < 1e-12 * *cls.r_plus) throw SurgeryError("no starting radius with small enough slope");
                }
                mu = *cls.r_plus + step;
            }
            u0 = *mu;
            break;
    }
    const auto model_slope = [&](double r) { return std::sqrt(std::max(0.0, eval_p(pr, r))); };
    const double slope_low = fb >= u0 ? model_slope(fb) : model_slope(u0) * (mu ? 1.0 : 0.0);
    if (!(slope_low < dfb)) throw SurgeryError("model slope at f(b) does not stay below f'(b)");
    const double target_slope = slope_low + 0.5 * (dfb - slope_low);
    out.trace.push_back("model " + to_string(cls.kind) + ", start radius " + fmt(u0) + ", target slope " +
                        fmt(target_slope));

    // Grow the model until it reaches the target slope, leaving room for the bend and the exact region.
    double reach = 4.0 * std::max(1.0, fb);
    std::shared_ptr<const RNProfileFunction> u;
    double K = 0.0;
    for (int tries = 0;; ++tries) {
        auto cand = std::make_shared<const RNProfileFunction>(pr, mu, reach + 2.0 + extra_length);
        if ((*cand)(reach).df > target_slope) {
            u = cand;
            K = u->inverse_slope(target_slope);
            break;
        }
        if (tries > 12) throw SurgeryError("model profile never reaches the target slope");
        reach *= 2.0;
    }
    const double uK_slope = (*u)(K).df;
    const double rho = dfb / uK_slope - 1.0;
    // Width scale of the deformation: with l = u'(K) / (2 B) the bracket is positive for y = X / l up to about 1.2.
    const double scale = std::min(1.0, uK_slope / (2.0 * bend_B(pr, (*u)(K).f)));
    double y_hi = 1.5;
    if (0.5 * rho < std::exp(-1.0 / (y_hi * y_hi))) y_hi = 1.0 / std::sqrt(std::log(2.0 / rho));

    // Pick delta = l y maximizing the smallest margin on the band used for gluing.
    double best_delta = 0.0, best_value = 0.0;
    for (int k = 0; k < 120; ++k) {
        const double y = y_hi * std::pow(0.95, k);
        if (kBendBand * y < kBendUnderflowX) break;
        const double delta = scale * y;
        const double s0 = K + delta + scale * bend_integral(y);
        if (s0 + extra_length > u->s_max()) continue;
        const BentProfile b(u, s0, delta, scale);
        bool feasible = true;
        for (int j = 1; j <= 64 && feasible; ++j)
            if (!(b.bracket(s0 - delta * j / 64.0) > 0.0)) feasible = false;
        if (!feasible) continue;
        double band_min = kInf;
        for (int j = 0; j <= 32; ++j)
            band_min = std::min(band_min, b.margin(s0 - delta + (1.0 - kBendBand) * delta * j / 32.0));
        if (band_min > best_value) {
            best_value = band_min;
            best_delta = delta;
        }
    }
    if (!(best_delta > 0.0)) throw SurgeryError("no bending width with a positive margin band", out.trace);
    const double s0 = K + best_delta + scale * bend_integral(best_delta / scale);
    out.trace.push_back("bend at s0 = " + fmt(s0) + " with delta = " + fmt(best_delta) + ", scale = " + fmt(scale) +
                        ", band margin " + fmt(best_value));
    out.bent = bend(u, s0, fb, dfb, best_delta, scale);
    const double delta = out.bent.delta;
    out.bend_band_end = s0 - kBendBand * delta;

    GlueInputs in;
    in.n = n;
    in.lambda = lambda;
    in.q = q_e;
    in.left = tail;
    in.right.fn = [b = out.bent.profile](double s) { return b(s); };
    in.right.a = s0 - delta;
    in.right.b = out.bend_band_end;
    in.right.q = q_e;
    in.right.tag = Provenance::Bent;
    out.glued = glue(in);
    for (const auto& line : out.glued.trace) out.trace.push_back(line);

    out.attachment = RNAttachment{m_e, q_e, lambda, (*u)(s0).f, s0 + out.glued.shift, u0, cls.kind};

    // Samples with margins by region.
    const auto add = [&](double s) {
        const ProfileValue v = out(s);
        out.samples.push_back(s, v.f, v.df, v.d2f, out.region(s));
        out.margins.push_back(out.margin(s));
    };
    const double a = tail.a;
    const double m1 = out.glued.exact_left_end;
    const double kb = out.glued.end();
    const double sm = out.attachment.s_match;
    for (int k = 0; k < 64; ++k) add(a + (m1 - a) * k / 64);
    std::vector<double> mid;
    for (int k = 0; k < 512; ++k) mid.push_back(m1 + (kb - m1) * k / 512);
    for (double kink : {out.glued.kink_left, out.glued.kink_right})
        for (int k = -16; k <= 16; ++k) mid.push_back(kink + out.glued.epsilon * k / 8.0);
    std::sort(mid.begin(), mid.end());
    mid.erase(std::unique(mid.begin(), mid.end()), mid.end());
    for (double s : mid)
        if (s >= m1 && s < kb) add(s);
    // The bent band is sampled where exp(-l^2/X^2) is a normal double.
    const double bent_stop = sm - scale * kBendUnderflowX;
    for (int k = 0; k < 64 && kb < bent_stop; ++k) add(kb + (bent_stop - kb) * k / 64);
    const double far = sm + extra_length;
    for (int k = 0; k <= 256; ++k) add(sm + (far - sm) * k / 256);
    out.samples.check_invariants();
    return out;
}

}  // namespace rnext
