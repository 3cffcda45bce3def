// Acceptance criteria 1 to 12 at the default tolerances, one PASS/FAIL line each.
// Criterion 12 additionally requires two complete selftest runs to give byte-identical ledgers.

#include <cstdio>
#include <string>

#include "rnext/acceptance.hpp"

int main() {
    using namespace rnext;
    const SuiteResult first = selftest();
    const SuiteResult second = selftest();
    const bool identical = first.ledger() == second.ledger();
    bool all = true;
    for (const CriterionResult& c : first.criteria) {
        bool pass = c.status == CriterionStatus::Pass;
        std::string detail = c.detail;
        if (c.id == 12) {
            pass = pass && identical;
            detail += identical ? "; full ledgers identical" : "; full ledgers differ";
        }
        all = all && pass;
        std::printf("criterion %2d %s %-26s measured=%.3e tolerance=%.3e  %s\n", c.id, pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.measured, c.tolerance, detail.c_str());
    }
    return all ? 0 : 1;
}
