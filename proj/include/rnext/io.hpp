#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "rnext/acceptance.hpp"
#include "rnext/collar.hpp"
#include "rnext/lambda_rn.hpp"
#include "rnext/pipeline.hpp"
#include "rnext/surgery.hpp"

namespace rnext {

inline constexpr int kSchemaVersion = 1;

// Header of every profile CSV.
inline constexpr const char* kProfileCsvHeader = "s,f,df,d2f,provenance,margin";

// 17 significant digits; non-finite values as nan, inf and -inf.
std::string format_double(double x);

// JSON text with every floating value at 17 significant digits and non-finite values as null.
// Object keys keep the library's sorted order, so equal values give equal text.
std::string dump_json(const nlohmann::json& j, int indent = 2);

// Writes to a temporary file beside `path` and renames it into place. Throws IoError.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// CSV with leading '#' lines carrying the schema version and the resolved config as compact JSON.
// `margins` must be empty or have one entry per sample.
std::string profile_csv(const SampledProfile& profile, const std::vector<double>& margins, const nlohmann::json& config);

struct CsvProfile {
    SampledProfile profile;
    std::vector<double> margins;
    nlohmann::json config;
};
CsvProfile parse_profile_csv(const std::string& text);

nlohmann::json attachment_json(const RNAttachment& a);
nlohmann::json classify_json(const RNParams& params, const ExtremalityClass& c);
nlohmann::json report_json(const ExtensionReport& report);
nlohmann::json bartnik_json(const BartnikReport& report);
nlohmann::json collar_json(const ChargedCollar& collar, const MonotonicityReport& mono);
nlohmann::json ledger_json(const SuiteResult& suite);

// Adds schema_version, the command and the resolved config to an artifact body.
nlohmann::json envelope(nlohmann::json body, const std::string& command, const nlohmann::json& config);

struct PlotPaths {
    std::filesystem::path profile;  // s f
    std::filesystem::path hawking;  // t M
    std::filesystem::path margin;   // s margin
    static PlotPaths in_directory(const std::filesystem::path& dir);
};

// Whitespace-separated columns, one row per profile sample, '#' header lines. t = s / A
// is the collar time continued linearly past the collar.
void emit_plotdata(const ExtensionReport& report, const PlotPaths& paths, const nlohmann::json& config);

}  // namespace rnext
