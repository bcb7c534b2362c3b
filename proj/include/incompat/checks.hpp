// Named invariant/property checks behind the `check` subcommand.
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace incompat {

struct CheckResult {
    std::string name;
    bool passed = false;
    // Set when the property is known not to hold at the tested sizes; the
    // failure is still reported, with the reason in `detail`.
    bool known_failure = false;
    std::string detail;
    double seconds = 0;
};

struct CheckInfo {
    std::string name;
    std::string description;
};

std::vector<CheckInfo> list_checks();

// Runs every check whose name contains `filter` (all when empty).
std::vector<CheckResult> run_checks(const std::string &filter = {},
                                    const std::function<void(const CheckResult &)> &on_result = {});

} // namespace incompat
