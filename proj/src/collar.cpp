#include "rnext/collar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rnext/chebyshev.hpp"
#include "rnext/errors.hpp"

namespace rnext {

namespace {

// Fourth-order central difference from five equally spaced samples.
double central5(double m2, double m1, double p1, double p2, double h) {
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
}

double c_n(int n) { return n == 2 ? 4.0 : n * (n - 1.0); }

std::vector<double> eps_ladder() {
    std::vector<double> e;
    for (int k = 0; k <= 20; ++k) e.push_back(std::ldexp(1.0, -k));
    return e;
}

double min_of(const std::vector<double>& v) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : v) m = std::min(m, x);
    return m;
}

double max_of(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    return m;
}

struct PointData {
    double scalar, gprime_sq, u, u_t, lap_u_over_u;
};

double scalar_of_collar(int n, LapseKind lapse, const Warp& warp, double A, double t, const PointData& p) {
    const double F = warp.F(t), dF = warp.dF(t), d2F = warp.d2F(t);
    const bool eig = lapse == LapseKind::Eigenfunction;
    const double v = eig ? A * p.u : A;
    const double vt_over_v = eig ? p.u_t / p.u : 0.0;
    const double lap_v_over_v = eig ? p.lap_u_over_u : 0.0;
    return p.scalar / (F * F) - 2.0 * lap_v_over_v / (F * F) +
           (2.0 * n * vt_over_v * dF / F - n * ((n - 1.0) * dF * dF + 2.0 * F * d2F) / (F * F) -
            0.25 * p.gprime_sq) /
               (v * v);
}

double electric_sq(int n, double r_o, double q, double F) { return q * q / std::pow(r_o * F, 2 * n); }

}  // namespace

std::string to_string(CollarCase c) {
    switch (c) {
        case CollarCase::Eigenvalue: return "eigenvalue";
        case CollarCase::GaussNegative: return "gauss-negative";
        case CollarCase::ScalarPositive: return "scalar-positive";
        case CollarCase::Pinched: return "pinched";
    }
    return "unknown";
}

std::string to_string(LapseKind k) { return k == LapseKind::Constant ? "constant" : "eigenfunction"; }

CollarCase collar_case_from_int(int id) {
    if (id < 1 || id > 4) throw UsageError("collar case must be 1, 2, 3 or 4");
    return static_cast<CollarCase>(id);
}

LapseKind lapse_for(CollarCase c) {
    return c == CollarCase::Eigenvalue ? LapseKind::Eigenfunction : LapseKind::Constant;
}

double Warp::F(double t) const { return std::sqrt(1.0 + eps * t * t); }
double Warp::dF(double t) const { return eps * t / F(t); }
double Warp::d2F(double t) const {
    const double f = F(t);
    return eps / (f * f * f);
}

double condition_c_gap(CollarCase c, int n, double r_o, double q, double lambda, double kappa) {
    if (c == CollarCase::GaussNegative) return -2.0 * (kappa + lambda + q * q / std::pow(r_o, 4));
    return 2.0 * (kappa - lambda) - n * (n - 1.0) * q * q / std::pow(r_o, 2 * n);
}

bool condition_c(CollarCase c, int n, double r_o, double q, double lambda, double kappa) {
    return condition_c_gap(c, n, r_o, q, lambda, kappa) > 0.0;
}

double PathFields::volume() const {
    double s = 0.0;
    for (double w : weight) s += w;
    return s;
}

PathFields sample_path(const MetricPath& path, bool with_eigenfunction) {
    PathFields f;
    f.n = path.n();
    f.r_o = path.r_o();
    f.t = path.t_grid();
    f.nt = f.t.size();
    f.has_eigenfunction = with_eigenfunction;
    const double dt = f.t[1] - f.t[0];
    if (path.is_round()) {
        f.nx = 1;
        f.theta = {0.0};
        f.weight = {unit_sphere_volume(f.n) * std::pow(f.r_o, f.n)};
        const double r = f.n * (f.n - 1.0) / (f.r_o * f.r_o);
        f.scalar.assign(f.nt, r);
        f.gprime_sq.assign(f.nt, 0.0);
        f.u.assign(f.nt, 1.0);
        f.u_t.assign(f.nt, 0.0);
        f.lap_u_over_u.assign(f.nt, 0.0);
        f.lambda1.assign(f.nt, 0.5 * r);
        return f;
    }
    f.theta = path.theta_grid();
    f.nx = f.theta.size();
    const std::size_t nt = f.nt, nx = f.nx;
    const Chebyshev w0 = path.exponent_at(0.0);
    const auto cc = clenshaw_curtis_weights(nx - 1);
    f.weight.resize(nx);
    for (std::size_t j = 0; j < nx; ++j)
        f.weight[j] = 2.0 * std::numbers::pi * cc[j] * std::exp(2.0 * w0(std::cos(f.theta[j])));
    const double area = 4.0 * std::numbers::pi * f.r_o * f.r_o;

    f.scalar.resize(nt * nx);
    f.gprime_sq.resize(nt * nx);
    f.u.assign(nt * nx, 1.0);
    f.u_t.assign(nt * nx, 0.0);
    f.lap_u_over_u.assign(nt * nx, 0.0);
    f.lambda1.assign(nt, 0.0);
    std::vector<double> beta(nt * nx);
    for (std::size_t i = 0; i < nt; ++i) {
        const bool repeat = i > 0 && f.t[i - 1] >= path.theta_switch();
        if (repeat) {
            std::copy_n(f.scalar.begin() + (i - 1) * nx, nx, f.scalar.begin() + i * nx);
            std::copy_n(beta.begin() + (i - 1) * nx, nx, beta.begin() + i * nx);
            std::copy_n(f.u.begin() + (i - 1) * nx, nx, f.u.begin() + i * nx);
            std::copy_n(f.lap_u_over_u.begin() + (i - 1) * nx, nx, f.lap_u_over_u.begin() + i * nx);
            f.lambda1[i] = f.lambda1[i - 1];
            continue;
        }
        const PathSlice s = path.slice(f.t[i]);
        std::copy(s.scalar.begin(), s.scalar.end(), f.scalar.begin() + i * nx);
        std::copy(s.beta.begin(), s.beta.end(), beta.begin() + i * nx);
        if (with_eigenfunction) {
            std::function<double(double)> u;
            const double lam = lambda1_exponent(s.exponent, area, 0, &u);
            f.lambda1[i] = lam;
            for (std::size_t j = 0; j < nx; ++j) {
                f.u[i * nx + j] = u(s.x_of_xi[j]);
                f.lap_u_over_u[i * nx + j] = 0.5 * s.scalar[j] - lam;
            }
        }
    }
    auto idx = [&](long i) { return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(nt) - 1)); };
    for (std::size_t i = 0; i < nt; ++i) {
        const long k = static_cast<long>(i);
        for (std::size_t j = 0; j < nx; ++j) {
            const double db = central5(beta[idx(k - 2) * nx + j], beta[idx(k - 1) * nx + j],
                                       beta[idx(k + 1) * nx + j], beta[idx(k + 2) * nx + j], dt);
            f.gprime_sq[i * nx + j] = 8.0 * db * db;
            if (with_eigenfunction)
                f.u_t[i * nx + j] = central5(f.u[idx(k - 2) * nx + j], f.u[idx(k - 1) * nx + j],
                                             f.u[idx(k + 1) * nx + j], f.u[idx(k + 2) * nx + j], dt);
        }
    }
    return f;
}

void validate_collar_spec(const CollarSpec& spec, const PathFields& fields) {
    const int n = spec.n();
    if (!(spec.epsilon > 0.0 && spec.epsilon <= 1.0)) throw PreconditionError("collar epsilon must lie in (0, 1]");
    if (!(spec.A > 0.0) || !std::isfinite(spec.A)) throw PreconditionError("collar lapse scale A must be positive");
    if (!(spec.kappa >= 0.0) || !std::isfinite(spec.kappa)) throw PreconditionError("kappa must be nonnegative");
    if (!(spec.lambda <= 0.0) || !std::isfinite(spec.q)) throw PreconditionError("need finite q and Lambda <= 0");
    if (spec.case_id == CollarCase::GaussNegative && n != 2)
        throw PreconditionError("the Gauss curvature case requires n = 2");
    if (spec.case_id == CollarCase::Pinched && (n < 4 || spec.path.kind() != SeedKind::Declared))
        throw PreconditionError("the pinched case requires n >= 4 and a declared path");
    if (!condition_c(spec.case_id, n, spec.r_o(), spec.q, spec.lambda, spec.kappa)) {
        std::ostringstream os;
        os << "collar condition fails for case " << static_cast<int>(spec.case_id) << ": gap "
           << condition_c_gap(spec.case_id, n, spec.r_o(), spec.q, spec.lambda, spec.kappa);
        throw PreconditionError(os.str());
    }
    switch (spec.case_id) {
        case CollarCase::Eigenvalue: {
            if (!fields.has_eigenfunction && !spec.path.is_round())
                throw InternalError("eigenvalue case needs sampled eigenfunctions");
            const double lam = min_of(fields.lambda1);
            if (!(lam > spec.kappa))
                throw PreconditionError("kappa must lie below the first eigenvalue along the path (min " +
                                        std::to_string(lam) + ")");
            break;
        }
        case CollarCase::GaussNegative: {
            const double kmin = 0.5 * min_of(fields.scalar);
            if (!(kmin > -spec.kappa))
                throw PreconditionError("Gauss curvature along the path must exceed -kappa (min " +
                                        std::to_string(kmin) + ")");
            break;
        }
        case CollarCase::ScalarPositive:
        case CollarCase::Pinched: {
            const double rmin = spec.path.declared_scalar_floor().value_or(min_of(fields.scalar));
            if (!(rmin > 2.0 * spec.kappa))
                throw PreconditionError("scalar curvature along the path must exceed 2 kappa (min " +
                                        std::to_string(rmin) + ")");
            break;
        }
    }
}

MarginReport collar_margin(const PathFields& f, LapseKind lapse, double epsilon, double A, double q, double lambda) {
    const Warp warp{epsilon};
    MarginReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < f.nt; ++i) {
        const double t = f.t[i];
        const double e2 = electric_sq(f.n, f.r_o, q, warp.F(t));
        for (std::size_t j = 0; j < f.nx; ++j) {
            const std::size_t k = i * f.nx + j;
            const PointData p{f.scalar[k], f.gprime_sq[k], f.u[k], f.u_t[k], f.lap_u_over_u[k]};
            const double m = scalar_of_collar(f.n, lapse, warp, A, t, p) - 2.0 * lambda - f.n * (f.n - 1.0) * e2;
            if (m < rep.min_margin) {
                rep.min_margin = m;
                rep.worst_t = t;
                rep.worst_theta = f.theta[j];
            }
        }
    }
    return rep;
}

double collar_scalar_curvature(const CollarSpec& spec, double t, double theta) {
    const MetricPath& path = spec.path;
    const int n = path.n();
    const Warp warp{spec.epsilon};
    PointData p{n * (n - 1.0) / (spec.r_o() * spec.r_o()), 0.0, 1.0, 0.0, 0.0};
    if (!path.is_round()) {
        const double dt = path.t_grid()[1] - path.t_grid()[0];
        const std::vector<double> xi{theta == 0.0 ? 1.0 : std::cos(theta)};
        const double area = 4.0 * std::numbers::pi * spec.r_o() * spec.r_o();
        const bool eig = spec.lapse() == LapseKind::Eigenfunction;
        double beta[5], u[5];
        for (int k = -2; k <= 2; ++k) {
            const PathSlice s = path.slice_at(t + k * dt, xi);
            beta[k + 2] = s.beta[0];
            u[k + 2] = 1.0;
            if (eig) {
                std::function<double(double)> uf;
                const double lam = lambda1_exponent(s.exponent, area, 0, &uf);
                u[k + 2] = uf(s.x_of_xi[0]);
                if (k == 0) p.lap_u_over_u = 0.5 * s.scalar[0] - lam;
            }
            if (k == 0) p.scalar = s.scalar[0];
        }
        const double db = central5(beta[0], beta[1], beta[3], beta[4], dt);
        p.gprime_sq = 8.0 * db * db;
        p.u = u[2];
        p.u_t = central5(u[0], u[1], u[3], u[4], dt);
    }
    return scalar_of_collar(n, spec.lapse(), warp, spec.A, t, p);
}

ChargedCollar build_collar(const CollarSpec& spec) {
    return build_collar(spec, sample_path(spec.path, spec.lapse() == LapseKind::Eigenfunction));
}

ChargedCollar build_collar(const CollarSpec& spec, const PathFields& fields) {
    validate_collar_spec(spec, fields);
    const int n = spec.n();
    const double r_o = spec.r_o();
    const Warp warp{spec.epsilon};
    const bool eig = spec.lapse() == LapseKind::Eigenfunction;
    ChargedCollar c;
    c.spec = spec;
    c.fields = fields;
    c.margin = collar_margin(fields, spec.lapse(), spec.epsilon, spec.A, spec.q, spec.lambda);
    if (!(c.margin.min_margin > 0.0)) {
        std::ostringstream os;
        os << "strict dominant energy condition fails on the collar: margin " << c.margin.min_margin
           << " at t = " << c.margin.worst_t << ", theta = " << c.margin.worst_theta;
        throw VerificationError(os.str());
    }
    const std::size_t nt = fields.nt, nx = fields.nx;
    const double omega = unit_sphere_volume(n);
    const double sphere_volume = fields.volume();
    const RNParams p0{n, 0.0, spec.q, spec.lambda};
    c.scalar.resize(nt * nx);
    c.dec_margin.resize(nt * nx);
    c.mean_curvature.resize(nt * nx);
    c.slice_volume.resize(nt);
    c.lapse_inv_sq.resize(nt);
    c.lapse_dt_term.resize(nt);
    c.hawking.t = fields.t;
    c.hawking.mass.resize(nt);
    c.hawking.dmass_dt.resize(nt);
    c.hawking.charge = spec.q;
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = fields.t[i];
        const double F = warp.F(t), dF = warp.dF(t), d2F = warp.d2F(t);
        const double e2 = electric_sq(n, r_o, spec.q, F);
        double J = 0.0, J3 = 0.0;
        for (std::size_t j = 0; j < nx; ++j) {
            const std::size_t k = i * nx + j;
            const PointData pd{fields.scalar[k], fields.gprime_sq[k], fields.u[k], fields.u_t[k],
                               fields.lap_u_over_u[k]};
            const double r = scalar_of_collar(n, spec.lapse(), warp, spec.A, t, pd);
            c.scalar[k] = r;
            c.dec_margin[k] = r - 2.0 * spec.lambda - n * (n - 1.0) * e2;
            const double v = eig ? spec.A * fields.u[k] : spec.A;
            const double vt = eig ? spec.A * fields.u_t[k] : 0.0;
            c.mean_curvature[k] = n * dF / (v * F);
            J += fields.weight[j] / (v * v);
            J3 += fields.weight[j] * vt / (v * v * v);
        }
        c.lapse_inv_sq[i] = J;
        c.lapse_dt_term[i] = J3;
        c.slice_volume[i] = std::pow(F, n) * sphere_volume;
        const double scale = omega * std::pow(r_o, n - 2);
        const double rr = r_o * F;
        const double bracket = eval_p(p0, rr) - dF * dF * J / scale;
        c.hawking.mass[i] = 0.5 * std::pow(r_o, n - 1) * std::pow(F, n - 1) * bracket;
        c.hawking.dmass_dt[i] =
            0.5 * std::pow(r_o, n - 1) *
            ((n - 1.0) * std::pow(F, n - 2) * dF * bracket +
             std::pow(F, n - 1) * (eval_dp(p0, rr) * r_o * dF - (2.0 * dF * d2F * J - 2.0 * dF * dF * J3) / scale));
    }
    return c;
}

A0Result find_A0(const CollarSpec& spec) {
    return find_A0(spec, sample_path(spec.path, spec.lapse() == LapseKind::Eigenfunction));
}

A0Result find_A0(const CollarSpec& spec, const PathFields& fields) {
    CollarSpec probe = spec;
    probe.A = 1.0;
    validate_collar_spec(probe, fields);
    const int n = spec.n();
    const double gap = condition_c_gap(spec.case_id, n, spec.r_o(), spec.q, spec.lambda, spec.kappa);
    double c = c_n(n) + 0.25 * max_of(fields.gprime_sq);
    if (spec.lapse() == LapseKind::Eigenfunction) {
        double min_ratio = 0.0, min_u = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < fields.u.size(); ++k) {
            min_ratio = std::min(min_ratio, 2.0 * n * fields.u_t[k] / fields.u[k]);
            min_u = std::min(min_u, fields.u[k]);
        }
        c = (-min_ratio + c) / (min_u * min_u);
    }
    A0Result out;
    out.bound = std::sqrt(c / gap);

    std::vector<double> eps = eps_ladder();
    eps.push_back(spec.epsilon);
    auto passes = [&](double A) {
        for (double e : eps)
            if (!(collar_margin(fields, spec.lapse(), e, A, spec.q, spec.lambda).min_margin > 0.0)) return false;
        return true;
    };
    int k = 0;
    if (passes(out.bound)) {
        while (k > -400 && passes(out.bound * std::pow(1.05, k - 1))) --k;
    } else {
        while (!passes(out.bound * std::pow(1.05, k))) {
            if (++k > 400) throw NumericalError("no lapse scale up to 1.05^400 times the proof bound passes");
        }
    }
    out.a0 = out.bound * std::pow(1.05, k);
    return out;
}

double collar_mass_constant_lapse(int n, double r_o, double q, double lambda, double eps, double A, double t) {
    const Warp w{eps};
    const double F = w.F(t), dF = w.dF(t);
    const RNParams p0{n, 0.0, q, lambda};
    return 0.5 * std::pow(r_o * F, n - 1) * (eval_p(p0, r_o * F) - dF * dF * r_o * r_o / (A * A));
}

double collar_far_mass(int n, double r_o, double q, double lambda, double eps, double A) {
    const double r = std::sqrt(1.0 + eps) * r_o;
    const RNParams p0{n, 0.0, q, lambda};
    return 0.5 * std::pow(r, n - 1) * (eval_p(p0, r) - eps * eps * r_o * r_o / ((1.0 + eps) * A * A));
}

double find_eps0(int n, double r_o, double q, double lambda, double a0) {
    if (!(eval_h(RNParams{n, 0.0, q, lambda}, r_o) > 0.0))
        throw PreconditionError("quasi-local sub-extremality h(r_o) > 0 fails");
    if (!(a0 > 0.0)) throw PreconditionError("A0 must be positive");
    const double mo = m_o(n, r_o, q, lambda);
    for (double e : eps_ladder()) {
        if (collar_far_mass(n, r_o, q, lambda, e, a0) > mo && collar_far_mass(n, r_o, q, lambda, e, 10.0 * a0) > mo)
            return e;
    }
    std::ostringstream os;
    os << "no eps in {1, ..., 2^-20} gives M(1) > m_o = " << mo << " at A0 = " << a0;
    throw NumericalError(os.str());
}

double monotonicity_a1(int n, double r_o, double q, double lambda, double eps) {
    const double h = eval_h(RNParams{n, 0.0, q, lambda}, r_o);
    if (!(h > 0.0)) throw PreconditionError("quasi-local sub-extremality h(r_o) > 0 fails");
    const double r2n = std::pow(r_o, 2 * n);
    const double fmax = std::sqrt(1.0 + eps);
    const double max_f_df2 = eps * eps * std::pow(fmax, n - 4);
    const double max_f_d2f = eps * std::max(1.0, std::pow(fmax, n - 4));
    const double a2_sq = 2.0 * r2n * eps / ((n - 1.0) * h);
    const double a1_sq = r2n * std::pow(fmax, n) * ((n - 1.0) * max_f_df2 + 2.0 * max_f_d2f) / ((n - 1.0) * h);
    return std::sqrt(std::max(a2_sq, a1_sq));
}

MonotonicityReport monotonicity_check(const ChargedCollar& c) {
    MonotonicityReport rep;
    const auto& hc = c.hawking;
    const std::size_t nt = hc.t.size();
    const int n = c.spec.n();
    const double dt = hc.t[1] - hc.t[0];
    rep.dmass_dt_at_zero = hc.dmass_dt[0];
    rep.min_dmass_dt = std::numeric_limits<double>::infinity();
    bool strictly_positive = true;
    for (std::size_t i = 1; i < nt; ++i) {
        rep.min_dmass_dt = std::min(rep.min_dmass_dt, hc.dmass_dt[i]);
        if (!(hc.dmass_dt[i] > 0.0)) strictly_positive = false;
    }
    for (std::size_t i = 1; i + 1 < nt; ++i) {
        const double fd = (hc.mass[i + 1] - hc.mass[i - 1]) / (2.0 * dt);
        rep.max_fd_mismatch = std::max(rep.max_fd_mismatch, std::abs(fd - hc.dmass_dt[i]));
    }
    const auto& f = c.fields;
    const double limit = n * (n - 1.0) * unit_sphere_volume(n) * std::pow(f.r_o, n - 2);
    for (std::size_t i = 0; i < f.nt; ++i) {
        double integral = 0.0;
        for (std::size_t j = 0; j < f.nx; ++j) integral += f.weight[j] * f.at(f.scalar, i, j);
        if (integral > limit * (1.0 + 1e-10)) rep.scalar_integral_condition = false;
    }
    const double tol = 1e-8;
    if (n == 2) {
        rep.asserted = true;
        rep.monotone = rep.min_dmass_dt >= -tol;
        rep.verdict = rep.monotone ? "monotone (n = 2)" : "dM/dt negative (n = 2)";
    } else if (c.spec.lapse() == LapseKind::Constant) {
        rep.a1 = monotonicity_a1(n, f.r_o, c.spec.q, c.spec.lambda, c.spec.epsilon);
        if (c.spec.A >= *rep.a1) {
            rep.asserted = true;
            rep.monotone = strictly_positive;
            rep.verdict = rep.monotone ? "strictly increasing (A >= A1)" : "dM/dt not positive despite A >= A1";
        } else if (rep.scalar_integral_condition) {
            rep.asserted = true;
            rep.monotone = rep.min_dmass_dt >= -tol;
            rep.verdict = rep.monotone ? "monotone (scalar integral condition)" : "dM/dt negative";
        } else {
            rep.monotone = rep.min_dmass_dt >= -tol;
            rep.verdict = "no monotonicity statement applies; reported empirically";
        }
    } else {
        rep.monotone = rep.min_dmass_dt >= -tol;
        rep.verdict = "eigenfunction lapse with n >= 3; reported empirically";
    }
    return rep;
}

TailProfile::TailProfile(double r_o, double eps, double A, double s_begin)
    : r_o_(r_o), eps_(eps), A_(A), s_begin_(s_begin) {
    if (!(r_o > 0.0 && eps > 0.0 && A > 0.0 && s_begin >= 0.0 && s_begin < A))
        throw PreconditionError("invalid collar tail parameters");
}

RNProfileFunction::Value TailProfile::operator()(double s) const {
    const double g = 1.0 + eps_ * s * s / (A_ * A_);
    const double root = std::sqrt(g);
    return {r_o_ * root, r_o_ * eps_ * s / (A_ * A_ * root), r_o_ * eps_ / (A_ * A_ * g * root)};
}

TailProfile tail_function(const ChargedCollar& c) {
    const MetricPath& path = c.spec.path;
    if (!path.is_round()) {
        const PathSlice s = path.slice(path.theta_switch());
        const double r = 2.0 / (path.r_o() * path.r_o());
        for (double v : s.scalar)
            if (std::abs(v - r) > 1e-8 * r) throw PreconditionError("collar path is not round after theta_switch");
    }
    return TailProfile(path.r_o(), c.spec.epsilon, c.spec.A, path.theta_switch() * c.spec.A);
}

SampledProfile tail_to_arclength(const ChargedCollar& c, int grid_n) {
    if (grid_n < 2) throw PreconditionError("tail grid needs at least 2 points");
    const TailProfile tail = tail_function(c);
    SampledProfile prof;
    for (int i = 0; i < grid_n; ++i) {
        const double s = i + 1 == grid_n ? tail.s_end()
                                         : tail.s_begin() + (tail.s_end() - tail.s_begin()) * i / (grid_n - 1.0);
        const auto v = tail(s);
        prof.push_back(s, v.f, v.df, v.d2f, Provenance::Analytic);
    }
    return prof;
}

ImcfReparam imcf_reparametrization(const ChargedCollar& c, double t_min) {
    if (!(t_min > 0.0)) throw PreconditionError("F' vanishes at t = 0; the query interval must start above 0");
    const Warp warp{c.spec.epsilon};
    const int n = c.spec.n();
    const auto& f = c.fields;
    auto s_of = [&](double t) { return n * std::log(warp.F(t)); };
    const double h = 1e-3;
    ImcfReparam out;
    for (std::size_t i = 0; i < f.nt; ++i) {
        const double t = f.t[i];
        if (t < t_min) continue;
        out.t.push_back(t);
        out.s.push_back(s_of(t));
        const double ds_dt = central5(s_of(t - 2 * h), s_of(t - h), s_of(t + h), s_of(t + 2 * h), h);
        if (!(ds_dt > 0.0)) throw PreconditionError("F' vanishes inside the query interval");
        for (std::size_t j = 0; j < f.nx; ++j) {
            const double v = c.spec.lapse() == LapseKind::Eigenfunction ? c.spec.A * f.at(f.u, i, j) : c.spec.A;
            const double speed = v / ds_dt;
            out.max_speed_error = std::max(out.max_speed_error, std::abs(speed * c.mean_curvature[i * f.nx + j] - 1.0));
        }
    }
    return out;
}

}  // namespace rnext
