#include "rnext/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <variant>

#include "CLI11.hpp"

#include "rnext/errors.hpp"

namespace rnext {

namespace {

using Member = std::variant<int RunConfig::*, double RunConfig::*, std::string RunConfig::*>;

struct Field {
    const char* key;
    Member member;
    const char* help;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"command", &RunConfig::command, "subcommand to run"},
        {"n", &RunConfig::n, "dimension of the spheres"},
        {"m", &RunConfig::m, "model mass"},
        {"q", &RunConfig::q, "charge"},
        {"lambda", &RunConfig::lambda, "cosmological constant (<= 0)"},
        {"mu", &RunConfig::mu, "start radius of rn-profile; 0 starts at the outer horizon"},
        {"seed", &RunConfig::seed, "boundary seed: round, axisym or declared"},
        {"r_o", &RunConfig::r_o, "boundary volume radius for round and declared seeds"},
        {"seed_a", &RunConfig::seed_a, "axisym seed w = a cos(theta) + b: coefficient a"},
        {"seed_b", &RunConfig::seed_b, "axisym seed w = a cos(theta) + b: coefficient b"},
        {"seed_csv", &RunConfig::seed_csv, "axisym seed samples with header theta,w"},
        {"declared_floor", &RunConfig::declared_floor, "asserted lower bound on R along a declared path"},
        {"mass", &RunConfig::mass, "requested total mass of the extension"},
        {"eps", &RunConfig::eps, "collar warp parameter; 0 picks it from the mass"},
        {"A", &RunConfig::A, "collar length; 0 uses A0"},
        {"collar_case", &RunConfig::collar_case, "collar case 1..4; 0 picks one from the seed"},
        {"s_max", &RunConfig::s_max, "arclength extent of rn-profile"},
        {"profile_grid", &RunConfig::profile_grid, "samples in rn-profile"},
        {"t_grid", &RunConfig::t_grid, "collar time grid"},
        {"theta_grid", &RunConfig::theta_grid, "angular grid"},
        {"theta_switch", &RunConfig::theta_switch, "time after which the path is round"},
        {"mass_fraction", &RunConfig::mass_fraction, "share of m - m_o reached by the collar"},
        {"model_length", &RunConfig::model_length, "arclength of the exact model region"},
        {"bartnik_k_max", &RunConfig::bartnik_k_max, "last witness exponent k in (1 + 2^-k) m_o"},
        {"extremality_band", &RunConfig::extremality_band, "half-width of the extremal band on p'(r+)"},
        {"curvature_margin", &RunConfig::curvature_margin, "relative margin kept below curvature floors"},
        {"tol_scale", &RunConfig::tol_scale, "selftest tolerance multiplier"},
        {"random_cases", &RunConfig::random_cases, "selftest randomized cases"},
        {"random_seed", &RunConfig::random_seed, "selftest random seed"},
        {"out", &RunConfig::out, "main output file"},
        {"profile_out", &RunConfig::profile_out, "profile CSV (extend, glue)"},
        {"plot_dir", &RunConfig::plot_dir, "directory for plot data (extend)"},
    };
    return table;
}

const std::vector<std::string>& tolerance_keys() {
    static const std::vector<std::string> keys = {"extremality_band", "curvature_margin", "tol_scale"};
    return keys;
}

const Field* find_field(const std::string& key) {
    for (const Field& f : fields())
        if (key == f.key) return &f;
    return nullptr;
}

std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

void set_from_text(RunConfig& cfg, const Field& f, const std::string& text, const std::string& where) {
    std::visit(
        [&](auto member) {
            using T = std::remove_reference_t<decltype(cfg.*member)>;
            if constexpr (std::is_same_v<T, std::string>) {
                cfg.*member = text;
            } else if constexpr (std::is_same_v<T, int>) {
                int v = 0;
                const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
                if (ec != std::errc() || end != text.data() + text.size())
                    throw UsageError(where + ": expected an integer, got '" + text + "'");
                cfg.*member = v;
            } else {
                char* end = nullptr;
                const double v = std::strtod(text.c_str(), &end);
                if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
                    throw UsageError(where + ": expected a finite number, got '" + text + "'");
                cfg.*member = v;
            }
        },
        f.member);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const Field& f : fields()) keys.emplace_back(f.key);
    return keys;
}

std::vector<std::string> env_keys() { return tolerance_keys(); }

nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const Field& f : fields()) std::visit([&](auto member) { j[f.key] = cfg.*member; }, f.member);
    return j;
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig base, const std::string& origin) {
    if (!j.is_object()) throw UsageError(origin + ": top level must be a JSON object");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        const nlohmann::json& value = item.value();
        const std::string path = origin + ": key '/" + key + "'";
        const Field* f = find_field(key);
        if (!f) throw UsageError(path + " is not a configuration key");
        std::visit(
            [&](auto member) {
                using T = std::remove_reference_t<decltype(std::declval<RunConfig&>().*member)>;
                if constexpr (std::is_same_v<T, std::string>) {
                    if (!value.is_string()) throw UsageError(path + " expects a string");
                    base.*member = value.template get<std::string>();
                } else if constexpr (std::is_same_v<T, int>) {
                    if (!value.is_number_integer()) throw UsageError(path + " expects an integer");
                    const auto v = value.template get<long long>();
                    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
                        throw UsageError(path + " is out of integer range");
                    base.*member = static_cast<int>(v);
                } else {
                    if (!value.is_number()) throw UsageError(path + " expects a number");
                    base.*member = value.template get<double>();
                }
            },
            f->member);
    }
    return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open configuration file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError(path + ": malformed JSON: " + e.what());
    }
    return config_from_json(j, std::move(base), path);
}

RunConfig apply_env(RunConfig base, const std::function<const char*(const char*)>& getenv_fn) {
    if (!getenv_fn) return base;
    for (const std::string& key : tolerance_keys()) {
        std::string var = "RNEXT_" + key;
        std::transform(var.begin(), var.end(), var.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = getenv_fn(var.c_str())) set_from_text(base, *find_field(key), v, var);
    }
    return base;
}

RunConfig parse_config(int argc, const char* const* argv, const std::function<const char*(const char*)>& getenv_fn) {
    CLI::App app{"Extensions of minimal Bartnik data glued to Lambda-Reissner-Nordstrom models", "rnext"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    const std::map<std::string, std::string> about = {
        {"classify", "classify a model (m, q, Lambda) as sub-extremal, extremal or super-extremal"},
        {"rn-profile", "write the radial profile of a model as CSV"},
        {"collar", "build a collar extension and report its Hawking mass"},
        {"glue", "glue a round collar tail to a model of the requested mass"},
        {"extend", "construct an extension of the boundary data with the requested mass"},
        {"bartnik", "report witnesses for the Bartnik mass bound"},
        {"selftest", "run the acceptance suite and print the ledger"},
    };
    for (const std::string& c : kCommands) app.add_subcommand(c, about.at(c));
    std::string config_path;
    app.add_option("--config", config_path, "flat JSON configuration file");
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> opts;
    for (const Field& f : fields()) {
        if (std::string(f.key) == "command") continue;
        const char* type = std::holds_alternative<int RunConfig::*>(f.member)      ? "INT"
                           : std::holds_alternative<double RunConfig::*>(f.member) ? "NUM"
                                                                                   : "TEXT";
        opts[f.key] = app.add_option("--" + dashed(f.key), raw[f.key], f.help)->type_name(type);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequest(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    cfg = apply_env(std::move(cfg), getenv_fn);
    for (const auto& [key, opt] : opts)
        if (opt->count() > 0) set_from_text(cfg, *find_field(key), raw[key], "--" + dashed(key));
    cfg.command = app.get_subcommands().front()->get_name();
    validate(cfg);
    return cfg;
}

void validate(const RunConfig& c) {
    require(std::find(kCommands.begin(), kCommands.end(), c.command) != kCommands.end(),
            "command must be one of classify, rn-profile, collar, glue, extend, bartnik, selftest (got '" +
                c.command + "')");
    require(c.n >= 2 && c.n <= 32, "n must lie in 2..32");
    require(std::isfinite(c.lambda) && c.lambda <= 0.0, "lambda must be <= 0 (got " + num(c.lambda) + ")");
    require(std::isfinite(c.m) && std::isfinite(c.q) && std::isfinite(c.mass), "m, q and mass must be finite");
    require(c.seed == "round" || c.seed == "axisym" || c.seed == "declared",
            "seed must be round, axisym or declared (got '" + c.seed + "')");
    require(c.seed != "axisym" || c.n == 2, "axisym seeds need n = 2");
    require(c.r_o > 0.0, "r_o must be positive");
    require(c.mu >= 0.0, "mu must be non-negative");
    require(c.s_max > 0.0, "s_max must be positive");
    require(c.profile_grid >= 2, "profile_grid must be at least 2");
    require(c.t_grid >= 9 && c.theta_grid >= 9, "t_grid and theta_grid must be at least 9");
    require(c.theta_switch > 0.0 && c.theta_switch < 1.0, "theta_switch must lie in (0, 1)");
    require(c.mass_fraction > 0.0 && c.mass_fraction <= 1.0, "mass_fraction must lie in (0, 1]");
    require(c.model_length > 0.0, "model_length must be positive");
    require(c.bartnik_k_max >= 1 && c.bartnik_k_max <= 30, "bartnik_k_max must lie in 1..30");
    require(c.eps >= 0.0 && c.eps <= 1.0, "eps must lie in [0, 1]");
    require(c.A >= 0.0, "A must be non-negative");
    require(c.collar_case >= 0 && c.collar_case <= 4, "collar_case must lie in 0..4");
    require(c.extremality_band > 0.0, "extremality_band must be positive");
    require(c.curvature_margin >= 0.0 && c.curvature_margin < 1.0, "curvature_margin must lie in [0, 1)");
    require(c.tol_scale > 0.0, "tol_scale must be positive");
    require(c.random_cases >= 1, "random_cases must be at least 1");
    if (c.command == "glue" || c.command == "extend") require(c.mass > 0.0, "mass is required for " + c.command);
}

RNParams model_params(const RunConfig& c) { return RNParams{c.n, c.m, c.q, c.lambda}; }

BartnikDataSpec data_spec(const RunConfig& c) {
    BartnikDataSpec d;
    d.n = c.n;
    d.r_o = c.r_o;
    d.q = c.q;
    d.lambda = c.lambda;
    d.declared_floor = c.declared_floor;
    if (c.seed == "axisym") {
        d.seed = SeedKind::Axisym;
        d.axisym = c.seed_csv.empty()
                       ? AxisymConformalMetric::cosine(c.seed_a, c.seed_b, static_cast<std::size_t>(c.theta_grid))
                       : load_seed_csv(c.seed_csv);
        d.r_o = d.axisym->volume_radius();
    } else if (c.seed == "declared") {
        d.seed = SeedKind::Declared;
    }
    return d;
}

PipelineConfig pipeline_config(const RunConfig& c) {
    PipelineConfig p;
    p.theta_switch = c.theta_switch;
    p.t_grid = static_cast<std::size_t>(c.t_grid);
    p.theta_grid = static_cast<std::size_t>(c.theta_grid);
    p.curvature_margin = c.curvature_margin;
    p.collar_case = c.collar_case;
    p.mass_fraction = c.mass_fraction;
    p.model_length = c.model_length;
    p.bartnik_k_max = c.bartnik_k_max;
    return p;
}

AcceptanceConfig acceptance_config(const RunConfig& c) {
    AcceptanceConfig a;
    a.tolerance_scale = c.tol_scale;
    a.random_cases = c.random_cases;
    a.random_seed = static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.random_seed));
    return a;
}

}  // namespace rnext
