#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vcrown {

struct SelfcheckOptions {
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    /// Flips the sign of the direction handed to the solver under test.
    /// Exists only to demonstrate that the suites detect a broken solver.
    bool inject_fault = false;
};

struct SuiteResult {
    std::string name;
    std::size_t checked = 0;
    std::size_t violations = 0;
    /// Trial index of the first violation, replayable via synth_instance.
    std::optional<std::uint64_t> first_failure;
    bool passed() const { return violations == 0; }
};

/// Runs the oracle-equivalence, soundness-sampling, dominance, stationarity,
/// invariance and end-to-end suites at reduced trial counts.
std::vector<SuiteResult> run_selfcheck(const SelfcheckOptions& options);

} // namespace vcrown
