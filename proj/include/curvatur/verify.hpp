#pragma once

#include "curvatur/numkit/parallel.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace curvatur {

// One measured quantity against its bound: pass when value <= tolerance.
struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct SuiteResult {
    std::string name;
    int criterion = 0;
    std::string title;
    std::uint64_t seed = 0;
    double seconds = 0.0;
    std::vector<Check> checks;
    // exception text when the suite aborted
    std::string error;

    bool pass() const;
    // largest value / tolerance over the checks
    double worst_ratio() const;
};

struct SuiteInfo {
    std::string name;
    int criterion;
    std::string title;
};

const std::vector<SuiteInfo>& verify_suites();

struct VerifyOptions {
    std::uint64_t seed = 7;
    Exec exec = Exec::parallel;
};

// Throws PreconditionError for an unknown suite name.
SuiteResult run_suite(const std::string& name, const VerifyOptions& opt = {});
std::vector<SuiteResult> run_all_suites(const VerifyOptions& opt = {});

} // namespace curvatur
