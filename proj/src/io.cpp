#include "rnext/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "rnext/errors.hpp"

namespace rnext {

namespace {

void dump_value(const nlohmann::json& j, int indent, int depth, std::string& out) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += nlohmann::json(key).dump();
                out += indent < 0 ? ":" : ": ";
                dump_value(value, indent, depth + 1, out);
            }
            newline(depth);
            out += '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& value : j) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                dump_value(value, indent, depth + 1, out);
            }
            newline(depth);
            out += ']';
            return;
        }
        case nlohmann::json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        default:
            out += j.dump();
    }
}

std::string comment_block(const nlohmann::json& config) {
    return "# schema_version " + std::to_string(kSchemaVersion) + "\n# config " + dump_json(config, -1) + "\n";
}

double parse_double(const std::string& text, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
        throw IoError("profile CSV line " + std::to_string(line) + ": bad number '" + text + "'");
    return v;
}

nlohmann::json number_or_null(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    dump_value(j, indent, 0, out);
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("output directory does not exist: " + dir.string());
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

std::string profile_csv(const SampledProfile& p, const std::vector<double>& margins, const nlohmann::json& config) {
    if (!margins.empty() && margins.size() != p.size()) throw InternalError("one margin per profile sample expected");
    std::string out = comment_block(config);
    out += kProfileCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < p.size(); ++i) {
        out += format_double(p.s[i]) + ',' + format_double(p.f[i]) + ',' + format_double(p.df[i]) + ',' +
               format_double(p.d2f[i]) + ',' + to_string(p.provenance[i]) + ',' +
               (margins.empty() ? std::string("nan") : format_double(margins[i])) + '\n';
    }
    return out;
}

CsvProfile parse_profile_csv(const std::string& text) {
    CsvProfile out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# config ";
            if (line.compare(0, tag.size(), tag) == 0) out.config = nlohmann::json::parse(line.substr(tag.size()));
            continue;
        }
        if (!header) {
            if (line != kProfileCsvHeader) throw IoError("profile CSV header mismatch: " + line);
            header = true;
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) cols.push_back(cell);
        if (cols.size() != 6) throw IoError("profile CSV line " + std::to_string(lineno) + ": expected 6 columns");
        out.profile.push_back(parse_double(cols[0], lineno), parse_double(cols[1], lineno),
                              parse_double(cols[2], lineno), parse_double(cols[3], lineno),
                              provenance_from_string(cols[4]));
        out.margins.push_back(parse_double(cols[5], lineno));
    }
    if (!header) throw IoError("profile CSV has no header");
    return out;
}

nlohmann::json attachment_json(const RNAttachment& a) {
    return {{"m_e", a.m_e},     {"q_e", a.q_e},   {"lambda", a.lambda},
            {"r_C", a.r_C},     {"s_match", a.s_match}, {"mu", a.mu},
            {"kind", to_string(a.kind)}};
}

nlohmann::json classify_json(const RNParams& p, const ExtremalityClass& c) {
    return {{"params", {{"n", p.n}, {"m", p.m}, {"q", p.q}, {"lambda", p.lambda}}},
            {"kind", to_string(c.kind)},
            {"r_plus", number_or_null(c.r_plus)},
            {"r_minus", number_or_null(c.r_minus)},
            {"critical_mass", critical_mass(p.n, p.q, p.lambda)}};
}

nlohmann::json report_json(const ExtensionReport& r) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return {
        {"data",
         {{"n", r.data.n},
          {"seed", to_string(r.data.seed)},
          {"r_o", boundary_radius(r.data)},
          {"q", r.data.q},
          {"lambda", r.data.lambda},
          {"H_o", r.data.H_o}}},
        {"m_o", r.m_o},
        {"m_requested", r.m_requested},
        {"m_achieved", r.m_achieved},
        {"m_far", r.m_far},
        {"q", r.q},
        {"extremality", to_string(r.verdict)},
        {"collar", {{"case", to_string(r.collar_case)}, {"kappa", r.kappa}, {"epsilon", r.epsilon}, {"A", r.A},
                    {"A0", r.a0}, {"m_star", r.m_star}}},
        {"min_dec_margin", r.min_dec_margin},
        {"min_mean_curvature", r.min_mean_curvature},
        {"boundary_mean_curvature", r.boundary_mean_curvature},
        {"penrose_slack", r.penrose_slack},
        {"bartnik_bound", {{"value", r.bartnik_bound}, {"statement", "B <= m_o"}}},
        {"attachment", attachment_json(r.attachment)},
        {"samples", r.profile.size()},
        {"checks", checks},
        {"diagnostics", r.diagnostics},
        {"verified", r.verified},
    };
}

nlohmann::json bartnik_json(const BartnikReport& r) {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& x : r.witnesses)
        w.push_back({{"k", x.k}, {"m", x.m}, {"success", x.success}, {"slack", x.slack}, {"detail", x.detail}});
    return {{"m_o", r.m_o},
            {"h_r_o", r.h_r_o},
            {"m_o_extremality", to_string(r.m_o_class)},
            {"r_plus", r.r_plus},
            {"witnesses", w},
            {"admissible_nonempty", r.admissible_nonempty},
            {"bound", r.bound},
            {"witnessed_gap", r.witnessed_gap},
            {"statement", r.statement}};
}

nlohmann::json collar_json(const ChargedCollar& c, const MonotonicityReport& mono) {
    nlohmann::json hawking = nlohmann::json::array();
    for (std::size_t i = 0; i < c.hawking.t.size(); ++i)
        hawking.push_back({c.hawking.t[i], c.hawking.mass[i], c.hawking.dmass_dt[i]});
    return {{"case", to_string(c.spec.case_id)},
            {"lapse", to_string(c.spec.lapse())},
            {"kappa", c.spec.kappa},
            {"epsilon", c.spec.epsilon},
            {"A", c.spec.A},
            {"r_o", c.spec.r_o()},
            {"min_dec_margin", c.margin.min_margin},
            {"worst_t", c.margin.worst_t},
            {"worst_theta", c.margin.worst_theta},
            {"mass_boundary", c.hawking.mass.front()},
            {"mass_far", c.hawking.mass.back()},
            {"charge", c.hawking.charge},
            {"monotonicity", {{"asserted", mono.asserted}, {"monotone", mono.monotone},
                              {"min_dmass_dt", mono.min_dmass_dt}, {"verdict", mono.verdict}}},
            {"hawking_columns", {"t", "M", "dM/dt"}},
            {"hawking", hawking}};
}

nlohmann::json ledger_json(const SuiteResult& suite) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : suite.criteria)
        rows.push_back({{"id", c.id}, {"name", c.name}, {"status", to_string(c.status)}, {"measured", c.measured},
                        {"tolerance", c.tolerance}, {"detail", c.detail}});
    return {{"tolerance_scale", suite.config.tolerance_scale},
            {"random_seed", suite.config.random_seed},
            {"random_cases", suite.config.random_cases},
            {"all_pass", suite.all_pass()},
            {"criteria", rows}};
}

nlohmann::json envelope(nlohmann::json body, const std::string& command, const nlohmann::json& config) {
    body["schema_version"] = kSchemaVersion;
    body["command"] = command;
    body["config"] = config;
    return body;
}

PlotPaths PlotPaths::in_directory(const std::filesystem::path& dir) {
    return {dir / "profile.dat", dir / "hawking.dat", dir / "margin.dat"};
}

void emit_plotdata(const ExtensionReport& r, const PlotPaths& paths, const nlohmann::json& config) {
    const std::string head = comment_block(config);
    std::string prof = head + "# s f\n", hawk = head + "# t M\n", marg = head + "# s margin\n";
    for (std::size_t i = 0; i < r.profile.size(); ++i) {
        const double s = r.profile.s[i];
        prof += format_double(s) + ' ' + format_double(r.profile.f[i]) + '\n';
        hawk += format_double(s / r.A) + ' ' + format_double(r.hawking[i]) + '\n';
        marg += format_double(s) + ' ' + format_double(r.dec_margin[i]) + '\n';
    }
    write_atomic(paths.profile, prof);
    write_atomic(paths.hawking, hawk);
    write_atomic(paths.margin, marg);
}

}  // namespace rnext
