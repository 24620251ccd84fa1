#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bohm/detectors.hpp"
#include "bohm/grid.hpp"
#include "bohm/guidance.hpp"
#include "bohm/schrodinger.hpp"

namespace bohm {

template <typename Scalar = double>
struct SimConfig {
    Scalar half_width = 10;
    Index interior_nodes = 199;
    Scalar mass = 1;
    Scalar dt = Scalar(0.0025);
    DetectorArray<Scalar> detectors;
    Scalar r0 = 0;
    Scalar collapse_threshold = Scalar(0.95);
    std::int64_t max_steps = 2'000'000;
    /// Sampling stride for the time series; 0 disables recording.
    std::int64_t record_every = 0;
    /// Stride for density snapshots; 0 disables them.
    std::int64_t density_every = 0;
    bool short_circuit_stationary = true;
    Scalar node_epsilon = Scalar(kDefaultNodeEpsilon);

    Grid<Scalar> grid() const { return Grid<Scalar>(half_width, interior_nodes); }

    void validate() const {
        (void)grid();
        if (!(mass > Scalar(0))) throw std::invalid_argument("mass must be positive");
        if (!(dt > Scalar(0))) throw std::invalid_argument("dt must be positive");
        if (!(collapse_threshold > Scalar(0) && collapse_threshold <= Scalar(1))) {
            throw std::invalid_argument("collapse_threshold must lie in (0, 1]");
        }
        if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
        if (record_every < 0 || density_every < 0) {
            throw std::invalid_argument("recording strides must be non-negative");
        }
        if (!(std::abs(r0) <= half_width)) throw std::invalid_argument("r0 must lie in [-L, L]");
        for (const auto& det : detectors) det.validate();
    }
};

enum class OutcomeKind { collapsed, no_detection, absorbed, timeout };
enum class WallSide { left, right };

inline const char* to_string(OutcomeKind kind) {
    switch (kind) {
        case OutcomeKind::collapsed: return "collapsed";
        case OutcomeKind::no_detection: return "no_detection";
        case OutcomeKind::absorbed: return "absorbed";
        case OutcomeKind::timeout: return "timeout";
    }
    return "unknown";
}

/// Samples of one run on a shared step axis. y and probability are indexed
/// [detector][sample].
template <typename Scalar = double>
struct TimeSeries {
    Scalar dt{};
    std::vector<std::int64_t> steps;
    std::vector<Scalar> r;
    std::vector<std::vector<Scalar>> y;
    std::vector<std::vector<Scalar>> probability;
    std::vector<std::int64_t> density_steps;
    std::vector<ArrayX<Scalar>> density_snapshots;

    std::size_t samples() const { return steps.size(); }
    bool empty() const { return steps.empty(); }
};

/// Per-run numerical health figures.
template <typename Scalar = double>
struct RunDiagnostics {
    Scalar initial_norm = 0;
    Scalar max_norm_drift = 0;
    Scalar max_abs_detector_potential = 0;
    Scalar r_min = 0;
    Scalar r_max = 0;
};

template <typename Scalar = double>
struct RunOutcome {
    OutcomeKind kind = OutcomeKind::timeout;
    int detector_index = -1;  // collapsed only
    WallSide side = WallSide::left;  // absorbed only
    std::int64_t step = 0;  // terminal step
    Scalar time = 0;
    Realization<Scalar> realization{};
    DetectorArray<Scalar> detectors;
    RunDiagnostics<Scalar> diagnostics{};
    TimeSeries<Scalar> series{};

    bool collapsed() const { return kind == OutcomeKind::collapsed; }
};

/// sum_j W(x_j) max(rho_j, 0) dx; with the midpoint convention, edge nodes count half.
template <typename Scalar>
Scalar window_probability(const StaggeredWavefunction<Scalar>& psi, const Detector<Scalar>& det,
                          const Grid<Scalar>& grid) {
    const ArrayX<Scalar> rho = density(psi).max(Scalar(0));
    Scalar p = 0;
    for (Index j = 0; j < grid.size(); ++j) {
        const Scalar w = window(det, grid.x(j));
        if (w > Scalar(0)) p += w * rho[j];
    }
    return p * grid.spacing();
}

namespace detail {

template <typename Scalar>
std::optional<std::size_t> first_at_or_above(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& probs,
                                             Scalar threshold) {
    for (Index i = 0; i < probs.size(); ++i) {
        if (probs[i] >= threshold) return static_cast<std::size_t>(i);
    }
    return std::nullopt;
}

}  // namespace detail

/// Lowest-index detector whose window probability reaches `threshold`.
template <typename Scalar>
std::optional<std::size_t> collapse_check(const StaggeredWavefunction<Scalar>& psi,
                                          const DetectorArray<Scalar>& dets, const Grid<Scalar>& grid,
                                          Scalar threshold) {
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (window_probability(psi, dets[i], grid) >= threshold) return i;
    }
    return std::nullopt;
}

/**
 * Coupled run: ground state, pointers at rest, realization at r0. Each step:
 * refresh the detector potential, advance psi, move r, kick every pointer with
 * the new r, test for collapse, then record.
 */
template <typename Scalar>
RunOutcome<Scalar> run(const SimConfig<Scalar>& config) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    config.validate();
    const Grid<Scalar> grid = config.grid();
    const Scalar dx = grid.spacing();
    const Scalar dt = config.dt;
    const auto n_det = config.detectors.size();

    RunOutcome<Scalar> out;
    out.detectors = config.detectors;
    for (auto& det : out.detectors) {
        det.y = 0;
        det.y_dot = 0;
    }
    auto& dets = out.detectors;
    auto& real = out.realization;
    real.position = config.r0;
    apply_absorptive_boundary(real, grid);

    StaggeredWavefunction<Scalar> psi = ground_state(grid, config.mass, dt);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> windows = window_matrix(dets, grid);

    auto& series = out.series;
    series.dt = dt;
    series.y.assign(n_det, {});
    series.probability.assign(n_det, {});

    ArrayX<Scalar> rho = density(psi);
    Vector probs(static_cast<Index>(n_det));
    auto update_probabilities = [&] {
        if (n_det > 0) probs.noalias() = windows.transpose() * (rho.max(Scalar(0)) * dx).matrix();
    };
    auto record_series = [&](std::int64_t step) {
        if (config.record_every == 0 || (!series.steps.empty() && series.steps.back() == step)) return;
        series.steps.push_back(step);
        series.r.push_back(real.position);
        for (std::size_t i = 0; i < n_det; ++i) {
            series.y[i].push_back(dets[i].y);
            series.probability[i].push_back(probs[static_cast<Index>(i)]);
        }
    };
    auto record_density = [&](std::int64_t step) {
        if (config.density_every == 0 ||
            (!series.density_steps.empty() && series.density_steps.back() == step)) {
            return;
        }
        series.density_steps.push_back(step);
        series.density_snapshots.push_back(rho);
    };
    auto record = [&](std::int64_t step) {
        record_series(step);
        record_density(step);
    };
    auto finish = [&](OutcomeKind kind, std::int64_t step) {
        out.kind = kind;
        out.step = step;
        out.time = Scalar(step) * dt;
        record(step);
        return out;
    };

    auto& diag = out.diagnostics;
    diag.initial_norm = rho.sum() * dx;
    diag.r_min = diag.r_max = real.position;

    update_probabilities();
    record(0);
    if (real.absorbed()) {
        out.side = real.position > 0 ? WallSide::right : WallSide::left;
        return finish(OutcomeKind::absorbed, 0);
    }
    if (auto hit = detail::first_at_or_above(probs, config.collapse_threshold)) {
        out.detector_index = static_cast<int>(*hit);
        return finish(OutcomeKind::collapsed, 0);
    }
    if (config.short_circuit_stationary) {
        const bool dormant = std::all_of(dets.begin(), dets.end(), [&](const Detector<Scalar>& det) {
            return window(det, real.position) == Scalar(0) && det.restoring.is_zero();
        });
        if (dormant) return finish(OutcomeKind::no_detection, 0);
    }

    ArrayX<Scalar> potential = ArrayX<Scalar>::Zero(grid.size());
    ArrayX<Scalar> scratch(grid.size());
    Vector coefficients(static_cast<Index>(n_det));

    for (std::int64_t step = 1; step <= config.max_steps; ++step) {
        if (n_det > 0) {
            coefficients = potential_coefficients(dets);
            if (coefficients.isZero(Scalar(0))) {
                potential.setZero();
            } else {
                potential = (windows * coefficients).array();
                diag.max_abs_detector_potential =
                    std::max(diag.max_abs_detector_potential, potential.abs().maxCoeff());
            }
        }

        visscher_step(grid, psi, potential, config.mass, scratch);
        rho = density(psi);
        diag.max_norm_drift = std::max(diag.max_norm_drift, std::abs(rho.sum() * dx - diag.initial_norm));

        step_realization(real, psi, grid, config.mass, dt, rho.maxCoeff(), config.node_epsilon);
        diag.r_min = std::min(diag.r_min, real.position);
        diag.r_max = std::max(diag.r_max, real.position);
        if (real.absorbed()) {
            update_probabilities();
            out.side = real.position > 0 ? WallSide::right : WallSide::left;
            return finish(OutcomeKind::absorbed, step);
        }

        for (auto& det : dets) step_pointer(det, real.position, dt);

        update_probabilities();
        if (auto hit = detail::first_at_or_above(probs, config.collapse_threshold)) {
            out.detector_index = static_cast<int>(*hit);
            return finish(OutcomeKind::collapsed, step);
        }

        if (config.record_every > 0 && step % config.record_every == 0) record_series(step);
        if (config.density_every > 0 && step % config.density_every == 0) record_density(step);
    }

    const bool untouched = std::all_of(dets.begin(), dets.end(), [](const Detector<Scalar>& det) {
        return det.y == Scalar(0) && det.y_dot == Scalar(0);
    });
    return finish(untouched ? OutcomeKind::no_detection : OutcomeKind::timeout, config.max_steps);
}

template <typename Scalar = double>
struct QuantumForce {
    Scalar potential_term = 0;  // -dV_T/dx
    Scalar quantum_term = 0;    // (1/2m) d/dx (R''/R)

    Scalar total() const { return potential_term + quantum_term; }
};

/**
 * Force on the realization, m r'' = -dV_T/dx + (1/2m) d/dx(R''/R), with
 * R = sqrt(max(rho, 0)) and centered differences, interpolated linearly to r.
 * Diagnostic only.
 */
template <typename Scalar>
QuantumForce<Scalar> quantum_force_diagnostic(const StaggeredWavefunction<Scalar>& psi,
                                              const PotentialField<Scalar>& potential,
                                              const Grid<Scalar>& grid, Scalar mass, Scalar r,
                                              Scalar node_epsilon = Scalar(kDefaultNodeEpsilon)) {
    if (!(std::abs(r) <= grid.half_width())) throw std::out_of_range("quantum force: r outside the well");
    const Index n = grid.size();
    const Scalar dx = grid.spacing();
    const ArrayX<Scalar> rho = density(psi).max(Scalar(0));
    const ArrayX<Scalar> amp = rho.sqrt();
    const ArrayX<Scalar> v_total = potential.total();
    const Scalar rho_floor = node_epsilon * rho.maxCoeff();

    auto amp_at = [&](Index k) { return (k < 0 || k >= n) ? Scalar(0) : amp[k]; };
    // R''/R at an interior node.
    auto curvature_ratio = [&](Index k) {
        if (!(rho[k] > rho_floor)) {
            throw std::domain_error("quantum force: too close to a wavefunction node");
        }
        return (amp_at(k + 1) - Scalar(2) * amp[k] + amp_at(k - 1)) / (dx * dx * amp[k]);
    };
    // Centered derivative at node k, one-sided at the outermost nodes.
    auto derivative = [&](auto&& f, Index k) {
        if (k == 0) return (f(1) - f(0)) / dx;
        if (k == n - 1) return (f(n - 1) - f(n - 2)) / dx;
        return (f(k + 1) - f(k - 1)) / (Scalar(2) * dx);
    };
    auto force_at = [&](Index k) {
        QuantumForce<Scalar> f;
        f.potential_term = -derivative([&](Index i) { return v_total[i]; }, k);
        f.quantum_term = derivative(curvature_ratio, k) / (Scalar(2) * mass);
        return f;
    };

    const Scalar u = std::clamp(grid.fractional_index(r), Scalar(0), Scalar(n - 1));
    Index lo = std::min<Index>(static_cast<Index>(std::floor(u)), n - 2);
    const Scalar frac = u - Scalar(lo);
    if (!((Scalar(1) - frac) * rho[lo] + frac * rho[lo + 1] > rho_floor)) {
        throw std::domain_error("quantum force: density at r below the node threshold");
    }
    const QuantumForce<Scalar> a = force_at(lo);
    const QuantumForce<Scalar> b = frac > Scalar(0) ? force_at(lo + 1) : a;
    return {(Scalar(1) - frac) * a.potential_term + frac * b.potential_term,
            (Scalar(1) - frac) * a.quantum_term + frac * b.quantum_term};
}

}  // namespace bohm
