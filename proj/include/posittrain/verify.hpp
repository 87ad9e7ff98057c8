#pragma once

// Oracle-backed verification suites, shared by the CLI and the test binaries.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "posittrain/posit.hpp"

namespace posittrain::verify {

/// A set of posit operations under test.
struct PositOps {
    std::string name;
    std::function<PositBits(PositBits, PositBits)> add;
    std::function<PositBits(PositBits, PositBits)> sub;
    std::function<PositBits(PositBits, PositBits)> mul;
    std::function<PositBits(PositBits, PositBits)> div;
};

PositOps fast_ops();
PositOps reference_ops();
/// The fast kernels with exact ties pushed away from zero. Exists so the
/// suites can show they catch a wrong tie rule.
PositOps ties_away_ops();

struct SuiteReport {
    std::string suite;
    bool passed = true;
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    std::string first_counterexample;
    double seconds = 0.0;
    nlohmann::json details = nlohmann::json::object();

    void fail(const std::string& counterexample);
};

void to_json(nlohmann::json& j, const SuiteReport& r);

/// Decode of all 256 patterns and all 256×256 add/sub/mul/div for es 0, 1, 2.
SuiteReport posit8_exhaustive(const std::vector<PositOps>& routes = {fast_ops(), reference_ops()});
/// All 2^16 patterns at es=1: encode(decode(p)) == p and value order equals
/// signed-integer order.
SuiteReport posit16_roundtrip();
/// 2^16 roundtrip, randomized and special-value arithmetic against the
/// binary64-then-round oracle.
SuiteReport half_exhaustive(std::uint64_t random_cases = 1'000'000, std::uint64_t reference_cases = 200'000);
/// binary32 backprop against central differences of a binary64 loss.
SuiteReport gradcheck();

const std::vector<std::string>& suite_names();
/// Throws std::invalid_argument for unknown names.
SuiteReport run_suite(const std::string& name);

}  // namespace posittrain::verify
