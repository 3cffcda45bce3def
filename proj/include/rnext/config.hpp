#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rnext/acceptance.hpp"
#include "rnext/lambda_rn.hpp"
#include "rnext/pipeline.hpp"

namespace rnext {

inline const std::vector<std::string> kCommands = {"classify", "rn-profile", "collar", "glue",
                                                   "extend",   "bartnik",    "selftest"};

// Fully resolved run configuration. Every field has a default; the flat JSON form uses the
// member names as keys and the command line uses the same names with '_' written as '-'.
struct RunConfig {
    std::string command;

    // Model and data.
    int n = 2;
    double m = 1.0;        // model mass (classify, rn-profile)
    double q = 0.0;
    double lambda = 0.0;
    double mu = 0.0;       // rn-profile start radius; 0 starts at the outer horizon
    std::string seed = "round";  // round | axisym | declared
    double r_o = 1.0;
    double seed_a = 0.15;  // axisym seed w = seed_a cos(theta) + seed_b
    double seed_b = 0.0;
    std::string seed_csv;  // axisym seed samples (header theta,w); overrides seed_a and seed_b
    double declared_floor = 0.0;
    double mass = 0.0;     // requested total mass (glue, extend)

    // Collar.
    double eps = 0.0;      // 0 picks the eps ladder value used by the pipeline
    double A = 0.0;        // 0 uses A0
    int collar_case = 0;

    // Grids.
    double s_max = 10.0;
    int profile_grid = 1001;
    int t_grid = 257;
    int theta_grid = 257;
    double theta_switch = kDefaultThetaSwitch;
    double mass_fraction = 0.5;
    double model_length = 4.0;
    int bartnik_k_max = 5;

    // Tolerances.
    double extremality_band = kExtremalityBand;
    double curvature_margin = 0.05;
    double tol_scale = 1.0;
    int random_cases = 200;
    int random_seed = 20240611;

    // Outputs.
    std::string out;
    std::string profile_out;
    std::string plot_dir;

    bool operator==(const RunConfig&) const = default;
};

// Printed by parse_config when --help is given.
class HelpRequest : public std::exception {
public:
    explicit HelpRequest(std::string text) : text_(std::move(text)) {}
    const char* what() const noexcept override { return text_.c_str(); }

private:
    std::string text_;
};

// Every configuration key, in declaration order.
std::vector<std::string> config_keys();
// Keys that the environment may override as RNEXT_<KEY IN UPPER CASE>.
std::vector<std::string> env_keys();

nlohmann::json config_to_json(const RunConfig& config);
// Overlays the members of a flat JSON object on `base`. Unknown keys, nested values and type
// mismatches raise UsageError naming the key path.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {}, const std::string& origin = "config");
RunConfig load_config_file(const std::string& path, RunConfig base = {});
// Applies RNEXT_* overrides for the tolerance keys.
RunConfig apply_env(RunConfig base, const std::function<const char*(const char*)>& getenv_fn);

// Precedence: defaults, then the --config file, then RNEXT_* variables, then flags.
RunConfig parse_config(int argc, const char* const* argv,
                       const std::function<const char*(const char*)>& getenv_fn = nullptr);

// Throws UsageError for values no command accepts (e.g. lambda > 0) or that the command needs.
void validate(const RunConfig& config);

RNParams model_params(const RunConfig& config);
BartnikDataSpec data_spec(const RunConfig& config);
PipelineConfig pipeline_config(const RunConfig& config);
AcceptanceConfig acceptance_config(const RunConfig& config);

}  // namespace rnext
