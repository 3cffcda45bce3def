#include "rnext/quasilocal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rnext/errors.hpp"

namespace rnext {

namespace {

void require_sphere_data(const SphereData& d) {
    if (d.n < 2) throw PreconditionError("sphere dimension must be at least 2");
    if (!(d.volume > 0.0)) throw PreconditionError("sphere volume must be positive");
    if (!(d.mean_curvature_sq_integral >= 0.0))
        throw PreconditionError("integral of H^2 must be nonnegative");
    if (d.lambda > 0.0) throw PreconditionError("cosmological constant must satisfy lambda <= 0");
}

}  // namespace

double unit_sphere_volume(int n) {
    if (n < 1) throw PreconditionError("sphere dimension must be positive");
    const double k = 0.5 * (n + 1);
    return 2.0 * std::pow(std::numbers::pi, k) / std::tgamma(k);
}

double volume_radius(int n, double volume) {
    if (!(volume > 0.0)) throw PreconditionError("sphere volume must be positive");
    return std::pow(volume / unit_sphere_volume(n), 1.0 / n);
}

double hawking_mass_definition(const SphereData& d) {
    require_sphere_data(d);
    const int n = d.n;
    const double w = unit_sphere_volume(n);
    const double ratio = d.volume / w;
    const double bracket = 1.0 -
                           std::pow(1.0 / ratio, (n - 2.0) / n) * d.mean_curvature_sq_integral / (n * n * w) +
                           d.charge * d.charge * std::pow(1.0 / ratio, 2.0 * (n - 1.0) / n) -
                           2.0 * d.lambda / (n * (n + 1.0)) * std::pow(ratio, 2.0 / n);
    return 0.5 * std::pow(ratio, (n - 1.0) / n) * bracket;
}

double hawking_mass_rewritten(const SphereData& d) {
    require_sphere_data(d);
    const int n = d.n;
    const double w = unit_sphere_volume(n);
    const double r = volume_radius(n, d.volume);
    const double p0 = eval_p(RNParams{n, 0.0, d.charge, d.lambda}, r);
    return 0.5 * std::pow(r, n - 1) *
           (p0 - d.mean_curvature_sq_integral / (n * n * w * std::pow(r, n - 2)));
}

double hawking_mass(const SphereData& d) {
    const double a = hawking_mass_definition(d);
    const double b = hawking_mass_rewritten(d);
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    if (std::abs(a - b) > 1e-12 * scale) throw InternalError("Hawking mass forms disagree");
    return b;
}

double hawking_rotsym_aux(int n, double q, double lambda, double f, double df, double m_aux) {
    if (!(f > 0.0)) throw DomainError("profile value must be positive");
    const RNParams pr{n, m_aux, q, lambda};
    return m_aux + 0.5 * std::pow(f, n - 1) * (eval_p(pr, f) - df * df);
}

double hawking_rotsym(int n, double q, double lambda, double f, double df) {
    const double m0 = hawking_rotsym_aux(n, q, lambda, f, df, 0.0);
    const double m1 = hawking_rotsym_aux(n, q, lambda, f, df, 1.0);
    const double m2 = hawking_rotsym_aux(n, q, lambda, f, df, -1.0);
    const double spread = std::max({m0, m1, m2}) - std::min({m0, m1, m2});
    const double terms = 0.5 * std::pow(f, n - 1) * (std::abs(eval_p(RNParams{n, 0.0, q, lambda}, f)) + df * df);
    if (spread > 1e-12 * std::max({1.0, std::abs(m0), terms}))
        throw InternalError("rotationally symmetric Hawking mass depends on the auxiliary mass");
    return m0;
}

double quasi_local_charge_rotsym(double q_param) { return q_param; }

std::string to_string(QLExtremality kind) {
    switch (kind) {
        case QLExtremality::SubExtremal: return "sub-extremal";
        case QLExtremality::Extremal: return "extremal";
        case QLExtremality::InnerRoot: return "inner-root";
    }
    return "unknown";
}

QLExtremality ql_subextremality(int n, double q, double lambda, double r_sigma, double rel_tol) {
    if (!(r_sigma > 0.0)) throw PreconditionError("volume radius must be positive");
    const RNParams pr{n, 0.0, q, lambda};
    validate(pr);
    const double h = eval_h(pr, r_sigma);
    const double scale = std::pow(r_sigma, 2 * (n - 1)) + q * q;
    if (std::abs(h) <= rel_tol * scale) return QLExtremality::Extremal;
    return h > 0.0 ? QLExtremality::SubExtremal : QLExtremality::InnerRoot;
}

double m_o(int n, double r_o, double q, double lambda) {
    if (!(r_o > 0.0)) throw PreconditionError("boundary radius must be positive");
    const double rk = std::pow(r_o, n - 1);
    return 0.5 * rk * (1.0 + q * q / (rk * rk) - 2.0 * lambda * r_o * r_o / (n * (n + 1.0)));
}

double penrose_slack(int n, double boundary_volume, double q, double lambda, double total_mass) {
    return total_mass - m_o(n, volume_radius(n, boundary_volume), q, lambda);
}

}  // namespace rnext
