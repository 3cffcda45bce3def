#pragma once

#include <string>
#include <vector>

#include "rnext/lambda_rn.hpp"

namespace rnext {

struct SphereData {
    int n = 2;
    double volume = 0.0;
    double mean_curvature_sq_integral = 0.0;
    double charge = 0.0;
    double lambda = 0.0;
};

struct HawkingCurve {
    std::vector<double> t;
    std::vector<double> mass;
    std::vector<double> dmass_dt;
    double charge = 0.0;
};

// omega_n = |S^n| for the unit round metric.
double unit_sphere_volume(int n);

// r(Sigma) = (|Sigma| / omega_n)^(1/n).
double volume_radius(int n, double volume);

// Definitional form of the generalized Hawking mass.
double hawking_mass_definition(const SphereData& data);
// Form written through p_{0,Q,Lambda} at the volume radius.
double hawking_mass_rewritten(const SphereData& data);
// Returns the rewritten form after checking both forms agree to 1e-12 (relative to scale).
double hawking_mass(const SphereData& data);

// Hawking mass of a coordinate sphere in ds^2 + f^2 g_round, written with an auxiliary
// mass m_aux; the value does not depend on m_aux.
double hawking_rotsym_aux(int n, double q, double lambda, double f, double df, double m_aux);
// Evaluates with m_aux in {0, 1, -1} and checks agreement to 1e-12 (relative to scale).
double hawking_rotsym(int n, double q, double lambda, double f, double df);

// Charge of every coordinate sphere for the field q / f^n d_s.
double quasi_local_charge_rotsym(double q_param);

enum class QLExtremality { SubExtremal, Extremal, InnerRoot };

std::string to_string(QLExtremality kind);

// Classification of the model attached to a minimal sphere of volume radius r_sigma.
QLExtremality ql_subextremality(int n, double q, double lambda, double r_sigma, double rel_tol = 1e-12);

// Hawking mass of a minimal sphere of volume radius r_o.
double m_o(int n, double r_o, double q, double lambda);

// total_mass - m_o(n, r(boundary), q, Lambda) for minimal boundaries.
double penrose_slack(int n, double boundary_volume, double q, double lambda, double total_mass);

}  // namespace rnext
