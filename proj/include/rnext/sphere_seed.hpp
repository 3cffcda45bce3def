#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rnext/chebyshev.hpp"

namespace rnext {

inline constexpr std::size_t kDefaultThetaGrid = 1025;
inline constexpr std::size_t kDefaultTimeGrid = 513;
inline constexpr double kDefaultThetaSwitch = 0.75;

// Metric e^{2w(theta)} g_round on S^2, sampled on a uniform theta grid over [0, pi].
// Internally w is held as a Chebyshev series in x = cos(theta); the uniform theta grid is
// exactly the Lobatto grid in x.
class AxisymConformalMetric {
public:
    // Samples on the uniform grid theta_j = j pi / (N - 1). Throws DomainError for
    // pole-irregular data (nonzero dw/dtheta at a pole beyond grid tolerance).
    explicit AxisymConformalMetric(std::vector<double> w_samples);

    static AxisymConformalMetric from_function(const std::function<double(double)>& w_of_theta,
                                               std::size_t grid = kDefaultThetaGrid);
    // w = a cos(theta) + b.
    static AxisymConformalMetric cosine(double a, double b = 0.0, std::size_t grid = kDefaultThetaGrid);
    // Builds from a Chebyshev exponent W(x) directly.
    static AxisymConformalMetric from_exponent(const Chebyshev& exponent, std::size_t grid);

    const std::vector<double>& theta_grid() const { return theta_; }
    const std::vector<double>& w() const { return w_; }
    // Highest odd theta-derivative verified to vanish at the poles.
    int pole_order() const { return 1; }
    const Chebyshev& exponent() const { return exponent_; }

    double area() const;
    double volume_radius() const;

private:
    AxisymConformalMetric(std::vector<double> w_samples, Chebyshev exponent);

    std::vector<double> theta_;
    std::vector<double> w_;
    Chebyshev exponent_;
};

// K = e^{-2w}(1 - Lap_round w) at the theta grid.
std::vector<double> gaussian_curvature(const AxisymConformalMetric& metric);
// Pointwise K for a Chebyshev exponent W at x = cos(theta).
double gaussian_curvature_at(const Chebyshev& exponent, double x);
// Round Laplacian of an axisymmetric function: (1 - x^2) W'' - 2 x W'.
Chebyshev round_laplacian(const Chebyshev& w);

// Exponent (1 - t) w. The endpoint t = 1 is the unit round sphere.
AxisymConformalMetric conformal_path(const AxisymConformalMetric& seed, double t);

struct EigenPair {
    double lambda = 0.0;
    // Positive eigenfunction at the theta grid, normalized by integral of u^2 dA = |S^2|_g.
    std::vector<double> u;
    double residual = 0.0;
};

// Lowest eigenpair of -Lap_g + K(g) on axisymmetric functions (Legendre-Galerkin).
EigenPair lambda1(const AxisymConformalMetric& metric, std::size_t modes = 0);

// Continuous form used by the path machinery. Returns lambda1, and the eigenfunction as a
// callable of x = cos(theta) through `u_of_x` when non-null.
double lambda1_exponent(const Chebyshev& exponent, double area_target, std::size_t modes,
                        std::function<double(double)>* u_of_x = nullptr, double* residual = nullptr);

enum class SeedKind { Round, Axisym, Declared };
std::string to_string(SeedKind kind);

struct PathOptions {
    double theta_switch = kDefaultThetaSwitch;
    std::size_t t_grid = kDefaultTimeGrid;
    std::size_t theta_grid = kDefaultThetaGrid;
};

// Geometry of one normalized metric g(t), pulled back to the reference coordinate xi = cos(theta)
// so that its area form equals that of g(0).
struct PathSlice {
    double t = 0.0;
    Chebyshev exponent;          // W_t(x), conformal exponent of g(t) before the area-preserving map
    std::vector<double> x_of_xi; // area-preserving map X_t at the reference nodes
    std::vector<double> scalar;  // R(g(t)) at the reference nodes
    std::vector<double> beta;    // log of the phi-circle radius, up to a t-independent term
    double total_area = 0.0;
};

// Path of metrics satisfying (E1)-(E3).
class MetricPath {
public:
    static MetricPath round(int n, double r_o, const PathOptions& options = {});
    // Externally provided path for n >= 3 (or any n), with an asserted lower bound on R(g(t)).
    // Computationally treated as round with volume radius r_o.
    static MetricPath declared(int n, double r_o, double scalar_floor, const PathOptions& options = {});

    int n() const { return n_; }
    double r_o() const { return r_o_; }
    double theta_switch() const { return theta_switch_; }
    SeedKind kind() const { return kind_; }
    const std::vector<double>& t_grid() const { return t_grid_; }
    const std::vector<double>& theta_grid() const { return theta_; }
    const std::optional<AxisymConformalMetric>& seed() const { return seed_; }
    std::optional<double> declared_scalar_floor() const { return declared_floor_; }
    double volume_form_deviation() const { return volume_form_deviation_; }
    double max_area_error() const { return max_area_error_; }

    // Clamped time: smooth, 0 for t <= 0, 1 for t >= theta_switch.
    double tau(double t) const;
    // Conformal exponent of g(t) (includes the area dilation).
    Chebyshev exponent_at(double t) const;
    AxisymConformalMetric metric_at(double t) const;
    PathSlice slice(double t) const;
    // Same at arbitrary reference nodes xi (strictly decreasing, inside [-1, 1]).
    PathSlice slice_at(double t, const std::vector<double>& xi) const;
    bool is_round() const { return kind_ != SeedKind::Axisym; }

private:
    friend MetricPath normalize_path(const AxisymConformalMetric& seed, const PathOptions& options);

    int n_ = 2;
    double r_o_ = 1.0;
    double theta_switch_ = kDefaultThetaSwitch;
    SeedKind kind_ = SeedKind::Round;
    std::vector<double> t_grid_;
    std::vector<double> theta_;
    std::optional<AxisymConformalMetric> seed_;
    std::optional<double> declared_floor_;
    double volume_form_deviation_ = 0.0;
    double max_area_error_ = 0.0;
};

// Clamps the conformal path of `seed` in time, dilates to constant area and fixes the area form.
MetricPath normalize_path(const AxisymConformalMetric& seed, const PathOptions& options = {});

struct CurvatureFloor {
    double min_gauss = 0.0;   // min over t, theta of K (n = 2) or R / 2 for round paths
    double min_scalar = 0.0;  // min over t, theta of R
    double min_lambda1 = 0.0; // min over t of lambda1(-Lap + R/2)
    double kappa_eigen = 0.0;      // Case (1)
    double kappa_gauss = 0.0;      // Case (2)
    double kappa_scalar = 0.0;     // Case (3)
    bool floor_preserved = true;   // normalized path keeps min K of the raw conformal path
};

CurvatureFloor curvature_floor_along_path(const MetricPath& path, double margin = 0.05);

// Seed from a CSV file with header `theta,w`.
AxisymConformalMetric load_seed_csv(const std::string& path);

}  // namespace rnext
