#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rnext/lambda_rn.hpp"
#include "rnext/quasilocal.hpp"
#include "rnext/sphere_seed.hpp"

namespace rnext {

// Curvature hypothesis on the path. Case numbers follow the collar construction.
enum class CollarCase { Eigenvalue = 1, GaussNegative = 2, ScalarPositive = 3, Pinched = 4 };
enum class LapseKind { Constant, Eigenfunction };

std::string to_string(CollarCase c);
std::string to_string(LapseKind k);
CollarCase collar_case_from_int(int id);
// Eigenfunction lapse in Case 1, constant lapse otherwise.
LapseKind lapse_for(CollarCase c);

// F(t) = sqrt(1 + eps t^2).
struct Warp {
    double eps = 0.1;
    double F(double t) const;
    double dF(double t) const;
    double d2F(double t) const;
};

struct CollarSpec {
    MetricPath path;
    double epsilon = 0.1;
    double A = 1.0;
    double kappa = 0.0;
    CollarCase case_id = CollarCase::ScalarPositive;
    double q = 0.0;
    double lambda = 0.0;

    int n() const { return path.n(); }
    double r_o() const { return path.r_o(); }
    LapseKind lapse() const { return lapse_for(case_id); }
};

// Lower bound entering the collar estimate; positive exactly when the collar condition holds.
double condition_c_gap(CollarCase c, int n, double r_o, double q, double lambda, double kappa);
bool condition_c(CollarCase c, int n, double r_o, double q, double lambda, double kappa);

// Path data sampled on the (t, reference node) grid. Arrays are row-major nt x nx.
struct PathFields {
    int n = 2;
    double r_o = 1.0;
    std::size_t nt = 0;
    std::size_t nx = 0;
    std::vector<double> t;
    std::vector<double> theta;      // reference angles; a single node for round paths
    std::vector<double> weight;     // quadrature weights of dV_g (t-independent)
    std::vector<double> scalar;     // R(g(t))
    std::vector<double> gprime_sq;  // |g'(t)|^2_{g(t)}
    std::vector<double> u;          // first eigenfunction of -Lap + R/2, normalized to the area
    std::vector<double> u_t;        // its t-derivative at fixed reference node
    std::vector<double> lap_u_over_u;
    std::vector<double> lambda1;    // per t
    bool has_eigenfunction = false;

    double at(const std::vector<double>& field, std::size_t i, std::size_t j) const { return field[i * nx + j]; }
    double volume() const;
};

PathFields sample_path(const MetricPath& path, bool with_eigenfunction);

// Throws PreconditionError unless the spec is admissible for its path: the collar condition, epsilon in
// (0, 1], A > 0, case-dependent dimension and path kind, and the strict curvature hypothesis
// against kappa (Case 1: lambda1 > kappa, Case 2: K > -kappa, Cases 3 and 4: R > 2 kappa).
void validate_collar_spec(const CollarSpec& spec, const PathFields& fields);

struct MarginReport {
    double min_margin = 0.0;
    double worst_t = 0.0;
    double worst_theta = 0.0;
};

// min of R(gamma) - 2 Lambda - n(n-1)|E|^2 over the grid for the given epsilon and A.
MarginReport collar_margin(const PathFields& fields, LapseKind lapse, double epsilon, double A, double q,
                           double lambda);

// Pointwise scalar curvature of v^2 dt^2 + F^2 g(t), with path derivatives by 4th-order central
// differences in t on the spacing of the path's t grid.
double collar_scalar_curvature(const CollarSpec& spec, double t, double theta);

struct ChargedCollar {
    CollarSpec spec;
    PathFields fields;
    std::vector<double> scalar;          // R(gamma), nt x nx
    std::vector<double> dec_margin;      // R(gamma) - 2 Lambda - n(n-1)|E|^2
    std::vector<double> mean_curvature;  // H = n F' / (v F)
    std::vector<double> slice_volume;    // |{t} x S^n| in gamma
    std::vector<double> lapse_inv_sq;    // integral of v^-2 dV_g per t
    std::vector<double> lapse_dt_term;   // integral of v_t / v^3 dV_g per t
    MarginReport margin;
    HawkingCurve hawking;
};

// Throws VerificationError naming the worst (t, theta) if the strict DEC fails.
ChargedCollar build_collar(const CollarSpec& spec);
ChargedCollar build_collar(const CollarSpec& spec, const PathFields& fields);

struct A0Result {
    double bound = 0.0;  // sqrt(C / I) from the proof's estimate
    double a0 = 0.0;     // smallest A on bound * 1.05^k passing the direct check for every tested eps
};

// Direct checks use spec.epsilon together with eps in {1, 1/2, ..., 2^-20}.
A0Result find_A0(const CollarSpec& spec);
A0Result find_A0(const CollarSpec& spec, const PathFields& fields);

// M({t} x S^n) along a constant-lapse collar, with J = integral of v^-2 dV_g = omega r_o^n / A^2.
double collar_mass_constant_lapse(int n, double r_o, double q, double lambda, double eps, double A, double t);
// Closed form at t = 1, where the path is round.
double collar_far_mass(int n, double r_o, double q, double lambda, double eps, double A);

// Largest eps in {1, 1/2, ..., 2^-20} with M(1) > m_o at A0 and at 10 A0.
double find_eps0(int n, double r_o, double q, double lambda, double a0);

// Threshold above which a constant-lapse collar has dM/dt > 0 on (0, 1].
double monotonicity_a1(int n, double r_o, double q, double lambda, double eps);

struct MonotonicityReport {
    double min_dmass_dt = 0.0;      // analytic, over t > 0
    double dmass_dt_at_zero = 0.0;
    double max_fd_mismatch = 0.0;   // central differences against the analytic derivative
    bool scalar_integral_condition = true;  // integral of R dV_g <= n(n-1) omega r_o^(n-2) for all t
    std::optional<double> a1;
    bool asserted = false;          // whether a monotonicity statement applies
    bool monotone = false;
    std::string verdict;
};

MonotonicityReport monotonicity_check(const ChargedCollar& collar);

// Far end of the collar in arclength s = A t: f(s) = r_o sqrt(1 + eps s^2 / A^2).
class TailProfile {
public:
    TailProfile(double r_o, double eps, double A, double s_begin);
    RNProfileFunction::Value operator()(double s) const;
    double s_begin() const { return s_begin_; }
    double s_end() const { return A_; }

private:
    double r_o_, eps_, A_, s_begin_;
};

TailProfile tail_function(const ChargedCollar& collar);
SampledProfile tail_to_arclength(const ChargedCollar& collar, int grid_n = 257);

struct ImcfReparam {
    std::vector<double> t;
    std::vector<double> s;
    double max_speed_error = 0.0;
};

// s(t) = n ln F(t) on the collar grid points in [t_min, 1].
ImcfReparam imcf_reparametrization(const ChargedCollar& collar, double t_min = 0.1);

}  // namespace rnext
