#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bohm/simulation.hpp"

namespace bohm {

enum class ExperimentKind { single_run, scan, n_sweep, baseline, two_detector_suite };

const char* to_string(ExperimentKind kind);

/// Validation failure; `line()` is the 1-based line of the offending key, 0 if
/// the problem is not tied to one line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& message)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::single_run;
    SimConfig<double> sim;
    std::vector<int> n_values{2, 4, 6, 8, 10};
    std::vector<Index> scan_nodes;  // empty = every interior node
    std::size_t sampling_count = 0;  // > 0 switches scan to seeded Born sampling
    std::uint64_t seed = 0;
    /// Two-detector suite: (left center, right center) per scenario.
    std::vector<std::pair<double, double>> suite_pairs{{-5.0, 5.0}, {-4.0, 4.0}, {0.0, 4.0}, {0.0, 1.5}};
    std::string output_directory = ".";
    int csv_precision = 12;
    unsigned threads = 1;
};

/**
 * Parses a `key = value` document (one pair per line, `#` starts a comment).
 * Missing keys take the defaults: L = 10, dx = 0.1, dt = dx^2/4, m = mu = 1,
 * lambda = 0.01, N = 1, d = 1, one detector at x0 = 5 with r0 = 5.5, and a
 * collapse threshold of 0.95. Unknown keys, malformed values and invariant
 * violations raise ConfigError.
 */
ExperimentSpec parse_config(std::string_view text);

ExperimentSpec load_config(const std::string& path);

}  // namespace bohm
