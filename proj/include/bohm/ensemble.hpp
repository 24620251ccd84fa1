#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bohm/simulation.hpp"

namespace bohm {

struct ScanEntry {
    Index node = 0;
    double r0 = 0;
    double weight = 0;
    RunOutcome<double> outcome;
};

/// One run per scanned node, ordered by node index.
struct ScanResult {
    std::vector<ScanEntry> entries;
};

struct ScanOptions {
    /// Nodes to scan; empty means every interior node.
    std::vector<Index> nodes;
    unsigned threads = 1;
    /// Keep per-run time series (memory heavy for full scans).
    bool keep_series = false;
};

/// Scans r0 over grid nodes, weighting node j by rho(0, x_j) dx renormalised
/// over the scan set. Runs are independent and may execute on several threads;
/// the result does not depend on scheduling or on the order of `nodes`.
ScanResult scan_r0(const SimConfig<double>& base, const ScanOptions& options = {});

/// Sampling mode for convergence studies: `count` initial positions drawn from
/// the Born density with `seed`, each weighted 1/count. `node` holds the
/// nearest grid node of each draw.
ScanResult scan_sampled(const SimConfig<double>& base, std::size_t count, std::uint64_t seed,
                        unsigned threads = 1);

struct EnsembleReport {
    std::vector<double> centers;
    std::vector<double> p;   // dBB collapse probability per detector
    std::vector<double> p0;  // Born-rule probability per detector window
    double p_no_detection = 0;
    double p_absorbed = 0;
    double p_timeout = 0;

    /// sum p + p_no_detection + p_absorbed + p_timeout
    double total_mass() const;
};

/// Collapse probabilities per detector; p0 and centers are left empty.
EnsembleReport detector_probabilities(const ScanResult& scan, std::size_t detector_count);

/// p_n^(0): Born probability inside each detector window at t = 0.
std::vector<double> qm_baseline(const StaggeredWavefunction<double>& psi0, const DetectorArray<double>& dets,
                                const Grid<double>& grid);

/// detector_probabilities plus the Born baseline and detector centers for `base`.
EnsembleReport ensemble_report(const ScanResult& scan, const SimConfig<double>& base);

/// (1/2) sum |p_n - p0_n| + (1/2)(p_no_detection + p_absorbed + p_timeout).
double total_variation(const EnsembleReport& report);

struct CollapseTimePoint {
    int dof_count = 0;
    OutcomeKind kind = OutcomeKind::timeout;
    std::int64_t step = 0;
    double time = 0;
};

/// t_c for each N in `dof_counts` (every detector of `base` gets that N).
/// Non-collapsed outcomes are reported with their kind, never dropped.
std::vector<CollapseTimePoint> collapse_time_experiment(const SimConfig<double>& base,
                                                        std::span<const int> dof_counts, unsigned threads = 1);

/// One run of the two-detector suite.
struct SuiteRun {
    std::size_t scenario = 0;
    double left_center = 0;
    double right_center = 0;
    ScanEntry entry;
};

/// For each (left, right) pair of centers: two detectors copied from the first
/// detector of `base`, with r0 scanned over every node strictly inside the left
/// window. Weights are renormalised per scenario.
std::vector<SuiteRun> two_detector_suite(const SimConfig<double>& base,
                                         std::span<const std::pair<double, double>> pairs,
                                         unsigned threads = 1);

/// Ordinary least squares of ln y on ln x. residual is the sum of squared
/// residuals on ln-ln axes.
struct PowerLawFit {
    double slope = 0;
    double intercept = 0;
    double residual = 0;
};

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// The same fit in time units (ln t_c vs ln N) and step-count units (ln steps vs ln N).
struct CollapseScaling {
    PowerLawFit time_units;
    PowerLawFit step_units;
};

CollapseScaling fit_collapse_scaling(std::span<const CollapseTimePoint> points);

/// Draws positions from the discrete Born density: a node is chosen with
/// probability proportional to max(rho, 0), then a uniform offset within its cell.
std::vector<double> sample_initial_positions(const StaggeredWavefunction<double>& psi, const Grid<double>& grid,
                                             std::size_t count, std::uint64_t seed);

/// Kolmogorov-Smirnov distance between the empirical CDF of `positions` and
/// the cell-wise linear CDF of max(rho, 0).
double ks_distance(std::vector<double> positions, const StaggeredWavefunction<double>& psi,
                   const Grid<double>& grid);

/// Moves every position along the guidance flow of `psi` for `steps` steps with
/// the given static potential (no detectors). psi is advanced in place.
void transport_ensemble(StaggeredWavefunction<double>& psi, const Grid<double>& grid,
                        const PotentialField<double>& potential, double mass,
                        std::vector<Realization<double>>& ensemble, std::int64_t steps);

}  // namespace bohm
