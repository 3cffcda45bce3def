#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rnext {

struct AcceptanceConfig {
    // Multiplies every numeric tolerance. Below 1 a failing criterion is recorded as an
    // expected failure rather than a failure.
    double tolerance_scale = 1.0;
    std::uint64_t random_seed = 20240611;
    int random_cases = 200;
};

enum class CriterionStatus { Pass, Fail, ExpectedFail };

std::string to_string(CriterionStatus status);

struct CriterionResult {
    int id = 0;
    std::string name;
    CriterionStatus status = CriterionStatus::Fail;
    double measured = 0.0;   // worst observed error, or the smallest observed margin
    double tolerance = 0.0;  // scaled tolerance it was compared with
    std::string detail;
};

struct SuiteResult {
    AcceptanceConfig config;
    std::vector<CriterionResult> criteria;

    bool all_pass() const;
    // One line per criterion; contains no timings, so equal configs give equal text.
    std::string ledger() const;
};

// Runs acceptance criteria 1 to 12 in order.
SuiteResult selftest(const AcceptanceConfig& config = {});

// Runs a single criterion (1..12).
CriterionResult run_criterion(int id, const AcceptanceConfig& config = {});

}  // namespace rnext
