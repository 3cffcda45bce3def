#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rnext/collar.hpp"
#include "rnext/lambda_rn.hpp"
#include "rnext/sphere_seed.hpp"
#include "rnext/surgery.hpp"

namespace rnext {

// Minimal Bartnik data (S^n, g_o, H_o = 0, q, Lambda).
struct BartnikDataSpec {
    int n = 2;
    SeedKind seed = SeedKind::Round;
    double r_o = 1.0;                            // round and declared seeds
    std::optional<AxisymConformalMetric> axisym; // axisym seeds; r_o is then the seed's volume radius
    double declared_floor = 0.0;                 // asserted lower bound on R along a declared path
    double q = 0.0;
    double lambda = 0.0;
    double H_o = 0.0;
};

// 0 picks a case from the seed kind; 1..4 force one.
struct PipelineConfig {
    double theta_switch = kDefaultThetaSwitch;
    std::size_t t_grid = 257;
    std::size_t theta_grid = 257;
    double curvature_margin = 0.05;
    int collar_case = 0;
    // Fraction of m - m_o reached by the collar before gluing.
    double mass_fraction = 0.5;
    double model_length = 4.0;
    int bartnik_k_max = 5;
};

// Throws PreconditionError unless the data are admissible minimal Bartnik data.
void validate(const BartnikDataSpec& data);
MetricPath build_path(const BartnikDataSpec& data, const PipelineConfig& config);
double boundary_radius(const BartnikDataSpec& data);

struct CollarSetup {
    CollarSpec spec;  // epsilon = 1 and A = A0
    PathFields fields;
    double a0 = 0.0;
};

// Builds the path, picks the collar case and kappa satisfying the collar condition and the curvature
// hypothesis (tried in a fixed order unless config.collar_case forces one), and finds A0.
CollarSetup prepare_collar(const BartnikDataSpec& data, const PipelineConfig& config = {});

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExtensionReport {
    BartnikDataSpec data;
    PipelineConfig config;
    double m_o = 0.0;
    double m_requested = 0.0;
    double m_achieved = 0.0;   // from the attachment record
    double m_far = 0.0;        // Hawking mass of the last sample
    double q = 0.0;
    Extremality verdict = Extremality::SuperExtremal;
    CollarCase collar_case = CollarCase::ScalarPositive;
    double kappa = 0.0;
    double epsilon = 0.0;
    double A = 0.0;
    double a0 = 0.0;
    double m_star = 0.0;       // Hawking mass at the far end of the collar
    double min_dec_margin = 0.0;        // R - 2 Lambda - n(n-1)|E|^2 off the exact model region
    double min_mean_curvature = 0.0;    // over the foliation for t > 0
    double boundary_mean_curvature = 0.0;
    double penrose_slack = 0.0;
    double bartnik_bound = 0.0;         // B <= m_o
    RNAttachment attachment;

    // Whole profile in arclength. On [0, theta_switch A] f is the area radius of the collar slices.
    SampledProfile profile;
    std::vector<double> dec_margin;     // curvature units, per profile sample
    std::vector<double> mean_curvature; // H = n f' / f, per profile sample
    std::vector<double> hawking;        // generalized Hawking mass, per profile sample
    std::size_t collar_samples = 0;     // leading samples lying in the collar before theta_switch

    std::vector<CheckResult> checks;
    std::vector<std::string> diagnostics;
    bool verified = false;
};

// Runs the whole chain. Stage failures keep their error type with a "stage: " prefix.
// The report carries the verification checks; `verified` is false if any failed.
ExtensionReport construct_extension(const BartnikDataSpec& data, double m, const PipelineConfig& config = {});

struct OutwardMinimizingVerdict {
    bool pass = false;
    double boundary_H = 0.0;
    double min_H = 0.0;    // over samples beyond the boundary
    double worst_s = 0.0;
    std::string detail;
};

// H(boundary) = 0 and H > 0 at every later sample.
OutwardMinimizingVerdict verify_outward_minimizing(const ExtensionReport& report);
OutwardMinimizingVerdict verify_outward_minimizing(const SampledProfile& profile, double boundary_tol = 1e-12);

struct BartnikWitness {
    int k = 0;
    double m = 0.0;
    bool success = false;
    double slack = 0.0;
    std::string detail;
};

struct BartnikReport {
    BartnikDataSpec data;
    double m_o = 0.0;
    double h_r_o = 0.0;
    Extremality m_o_class = Extremality::SuperExtremal;
    double r_plus = 0.0;
    std::vector<BartnikWitness> witnesses;
    bool admissible_nonempty = false;
    double bound = 0.0;          // upper bound on the Bartnik mass: m_o
    double witnessed_gap = 0.0;  // smallest m - m_o among successful witnesses
    std::string statement;
};

BartnikReport bartnik_report(const BartnikDataSpec& data, const PipelineConfig& config = {});

}  // namespace rnext
