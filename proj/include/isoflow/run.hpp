#pragma once

#include "isoflow/config.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace isoflow {

struct CheckOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct Artifact {
    std::string filename;
    std::string contents;
};

/// Result of one experiment; nothing is written to disk yet.
struct RunReport {
    std::vector<std::pair<std::string, std::string>> summary;  // ordered key = value
    std::vector<CheckOutcome> checks;
    std::vector<Artifact> artifacts;

    bool passed() const;
    std::string summary_text() const;
};

/// Runs the configured experiment. Solver failures propagate as exceptions.
RunReport run_experiment(const RunConfig& config);

/// Writes the artifacts and summary.txt into dir (created if needed).
void write_report(const RunReport& report, const std::filesystem::path& dir);

/**
 * Runs config (and its sweep offsets concurrently, each into
 * <dir>/refine_<k>) and writes the artifacts. Returns 0 iff every check of
 * every run passed, 1 on a failed check and 2 on a solver failure.
 */
int run(const RunConfig& config, std::ostream& log);

/// Formats with 17 significant digits.
std::string format_real(double x);

}  // namespace isoflow
