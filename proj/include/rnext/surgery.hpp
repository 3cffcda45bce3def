#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rnext/lambda_rn.hpp"

namespace rnext {

using ProfileValue = RNProfileFunction::Value;
using ProfileFn = std::function<ProfileValue(double)>;

// Omega[f] = (n-1)/(2f) (h(f)/f^(2(n-1)) - f'^2). Strict DEC holds iff Omega[f] > f''.
double omega_operator(int n, double q, double lambda, double f, double df);
double dec_margin_value(int n, double q, double lambda, const ProfileValue& v);
std::vector<double> dec_margin_operator(int n, double q, double lambda, const SampledProfile& profile);

// Radial profile on [a, b] carrying the electric charge q.
struct ProfilePiece {
    ProfileFn fn;
    double a = 0.0;
    double b = 0.0;
    double q = 0.0;
    Provenance tag = Provenance::Analytic;

    // Quintic Hermite interpolant through the samples.
    static ProfilePiece from_samples(const SampledProfile& samples, double q);
};

struct GlueInputs {
    int n = 2;
    ProfilePiece left;
    ProfilePiece right;
    double lambda = 0.0;
    double q = 0.0;  // charge of the glued manifold
};

// Throws PreconditionError unless f1(b1) < f2(a2), f1'(b1) >= f2'(a2) >= 0, q^2 <= min(q1^2, q2^2)
// and the Hawking mass conditions at both junction spheres hold (strict q^2 when saturated).
void check_glue_inputs(const GlueInputs& in);

// Shift to add to the right piece's coordinates so that a2 - b1 = 2 (f2(a2) - f1(b1)) / (f1'(b1) + f2'(a2)).
double translate_right_interval(const GlueInputs& in);

// zeta on [b1, a2] (shifted coordinates): f2'(a2) + (f1'(b1) - f2'(a2)) (1 - S(x^alpha)) with x the
// normalized position, S the e^{-1/x} smooth step, and alpha = ln(1/2) / ln(center).
class Bridge {
public:
    Bridge(double b1, double a2, double f_left, double slope_left, double slope_right, double rise);
    ProfileValue operator()(double s) const;
    double zeta(double s) const;
    double zeta_prime(double s) const;
    double center() const { return center_; }
    double begin() const { return b1_; }
    double end() const { return a2_; }

private:
    struct Table;
    double b1_, a2_, f_left_, s1_, s2_, center_ = 0.5;
    std::shared_ptr<const Table> table_;
    double step(double x) const;
    double step_prime(double x) const;
    double step_integral(double x) const;
};

Bridge build_bridge(const GlueInputs& in, double shift);

// Mollified C^2 gluing of left, bridge and shifted right pieces on [a1, b2 + shift].
class GlueResult {
public:
    ProfileValue operator()(double s) const;
    // Piecewise C^{1,1} profile before mollification.
    ProfileValue unmollified(double s) const;
    double begin() const;
    double end() const;
    double shift = 0.0;
    double epsilon = 0.0;
    double d = 0.0;           // one third of the infimum of the unmollified margin
    double min_margin = 0.0;  // certified minimum over the check grid
    double kink_left = 0.0;   // b1
    double kink_right = 0.0;  // a2 + shift
    double exact_left_end = 0.0;    // (a1 + b1) / 2
    double exact_right_begin = 0.0; // (a2 + b2) / 2 + shift
    std::vector<std::string> trace;

private:
    friend GlueResult mollify_and_certify(const GlueInputs& in, const Bridge& bridge, double shift);
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// Halves epsilon from a quarter of the smallest band until the margin is at least d/2 on the check
// grid and f' > 0 whenever both inputs are increasing. Throws SurgeryError with the halving trace
// below 2^-30 of the interval length.
GlueResult mollify_and_certify(const GlueInputs& in, const Bridge& bridge, double shift);
GlueResult glue(const GlueInputs& in);

// G(X) = integral_0^X exp(-1/y^2) dy = X e^{-1/X^2} - sqrt(pi) erfc(1/X).
double bend_integral(double X);

// u o sigma on [s0 - delta, s0), u beyond; sigma(s) = s - l G((s0 - s) / l) with width scale l, so that
// sigma' = 1 + exp(-l^2 / (s - s0)^2). The unscaled deformation is l = 1.
class BentProfile {
public:
    BentProfile() = default;
    BentProfile(std::shared_ptr<const RNProfileFunction> u, double s0, double delta, double scale = 1.0);
    ProfileValue operator()(double s) const;
    double sigma(double s) const;
    // Omega - f'' in factored form e (2 l^2 u'(sigma)/|x|^3 - (2 + e) B(u(sigma))) inside the bent band,
    // with e = exp(-l^2 / x^2) and B = (n-1) h(u) / (2 u^(2n-1)).
    double margin(double s) const;
    // Bracket of the factored margin; its sign certifies the DEC where e underflows.
    double bracket(double s) const;
    double s0() const { return s0_; }
    double delta() const { return delta_; }
    double scale() const { return scale_; }
    double begin() const { return s0_ - delta_; }
    double end() const { return u_->s_max(); }
    const RNProfileFunction& rn() const { return *u_; }

private:
    std::shared_ptr<const RNProfileFunction> u_;
    double s0_ = 0.0;
    double delta_ = 0.0;
    double scale_ = 1.0;
};

struct BendResult {
    BentProfile profile;
    double delta = 0.0;
    double min_bracket = 0.0;
    SampledProfile samples;     // [s0 - delta, s_max]
    std::vector<double> sigma;  // sigma at the samples
    std::vector<std::string> trace;
};

// Halves delta from delta_start until the factored margin is positive on (s0 - delta, s0),
// sigma(s0 - delta) stays in the profile's domain, f(s0 - delta) > alpha and f'(s0 - delta) < slope_cap.
BendResult bend(std::shared_ptr<const RNProfileFunction> u, double s0, double alpha, double slope_cap,
                double delta_start = 1.0, double scale = 1.0);
// Sub-extremal convenience form on the horizon profile.
BendResult bend(const RNParams& params, double s0, double alpha, double slope_cap);

struct RNAttachment {
    double m_e = 0.0;
    double q_e = 0.0;
    double lambda = 0.0;
    double r_C = 0.0;      // radius where the output becomes exactly the model
    double s_match = 0.0;  // arclength where that happens
    double mu = 0.0;       // starting radius of the model profile
    Extremality kind = Extremality::SubExtremal;
};

struct GluedExtension {
    int n = 2;
    double lambda = 0.0;
    double q_tail = 0.0;
    ProfilePiece tail;
    GlueResult glued;
    BendResult bent;
    RNAttachment attachment;
    double bend_band_end = 0.0;  // end of the bent piece used as right gluing input (unshifted)

    double begin() const { return tail.a; }
    double end() const;
    ProfileValue operator()(double s) const;
    double margin(double s) const;
    Provenance region(double s) const;
    SampledProfile samples;
    std::vector<double> margins;
    std::vector<std::string> trace;
};

// Glues the collar tail (charge tail.q) to the model (m_e, q_e, lambda) via bending and gluing.
// `extra_length` sets how far the exact model region is sampled beyond the match point.
GluedExtension glue_to_rn(const ProfilePiece& tail, int n, double m_star, double m_e, double q_e, double lambda,
                          double extra_length = 4.0);

// Lower bound of assumption (i): q^2 / f^(n-1) + 2 Lambda f^(n+1) / (n (n-1) (n+1)).
double glue_mass_floor(int n, double q, double lambda, double f);

}  // namespace rnext
