#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rnext {

// Default half-width of the extremality band on p'(r+).
inline constexpr double kExtremalityBand = 1e-9;

struct RNParams {
    int n = 2;
    double m = 0.0;
    double q = 0.0;
    double lambda = 0.0;
};

// Throws PreconditionError unless n >= 2, lambda <= 0 and all values are finite.
void validate(const RNParams& params);

enum class Extremality { SubExtremal, Extremal, SuperExtremal };

std::string to_string(Extremality kind);

struct ExtremalityClass {
    Extremality kind = Extremality::SuperExtremal;
    std::optional<double> r_plus;
    std::optional<double> r_minus;
};

// p(r) = 1 - 2m/r^(n-1) + q^2/r^(2(n-1)) - 2 Lambda r^2/(n(n+1))
double eval_p(const RNParams& params, double r);
double eval_dp(const RNParams& params, double r);
double eval_d2p(const RNParams& params, double r);
// h(r) = r^(2(n-1)) - q^2 - 2 Lambda r^(2n)/(n(n-1))
double eval_h(const RNParams& params, double r);

ExtremalityClass classify(const RNParams& params, double band = kExtremalityBand);

// Mass threshold m_{q,Lambda}: sub-extremal above, super-extremal below. Zero when q = 0.
double critical_mass(int n, double q, double lambda);

// s(r) = integral of p^(-1/2) from r+ to r. Sub-extremal models only.
double radial_coordinate(const RNParams& params, double r);

enum class Provenance { Analytic, Ode, Mollified, Bent };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct SampledProfile {
    std::vector<double> s;
    std::vector<double> f;
    std::vector<double> df;
    std::vector<double> d2f;
    std::vector<Provenance> provenance;

    std::size_t size() const { return s.size(); }
    void push_back(double s_val, double f_val, double df_val, double d2f_val, Provenance tag);
    // Throws InternalError unless the grid is strictly increasing and f > 0.
    void check_invariants() const;
};

// Radial profile u on [0, s_max] with u(0) = r+ and u'(0) = 0. Sub-extremal models only.
SampledProfile rn_profile(const RNParams& params, double s_max, int grid_n);

// Radial profile starting at u(0) = mu with u'(0) = sqrt(p(mu)).
SampledProfile rn_profile_mu(const RNParams& params, double mu, double s_max, int grid_n);

// Scalar curvature of ds^2 + f(s)^2 g_round on (a, b) x S^n.
double rotsym_scalar_curvature(int n, double f, double df, double d2f);

struct DECReport {
    double max_violation = 0.0;
    double worst_s = 0.0;
    double tol = 0.0;
    bool ok = true;
};

// Checks R = 2 Lambda + n(n-1) q^2 / f^(2n) pointwise along a model profile.
DECReport verify_model_identities(const RNParams& params, const SampledProfile& profile, double tol);

// Mean curvature n sqrt(p(r))/r of the coordinate sphere of radius r.
double horizon_mean_curvature(const RNParams& params, double r);

// Continuous model profile u(s) for s in [0, s_max]: RK4 nodes interpolated by quintic
// Hermite splines, with u' = sqrt(p(u)) and u'' = p'(u)/2 evaluated from the model.
class RNProfileFunction {
public:
    struct Value {
        double f;
        double df;
        double d2f;
    };

    // Starts at the outer horizon (mu absent) or at u(0) = mu.
    RNProfileFunction(const RNParams& params, std::optional<double> mu, double s_max,
                      double step = 1e-3);
    ~RNProfileFunction();
    RNProfileFunction(RNProfileFunction&&) noexcept;
    RNProfileFunction& operator=(RNProfileFunction&&) noexcept;

    Value operator()(double s) const;
    double s_max() const { return s_max_; }
    double start_radius() const { return u0_; }
    const RNParams& params() const { return params_; }
    // First s in [0, s_max] with u(s) = r, by bisection on the monotone profile.
    double inverse(double r) const;
    // First s in [0, s_max] with u'(s) = slope.
    double inverse_slope(double slope) const;

private:
    RNParams params_;
    double u0_ = 0.0;
    double r_plus_ = 0.0;
    bool from_horizon_ = false;
    double s_max_ = 0.0;
    struct Impl;
    std::unique_ptr<Impl> impl_;
    double slope_of(double u) const;
};

}  // namespace rnext
