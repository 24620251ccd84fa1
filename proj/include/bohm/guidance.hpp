#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bohm/grid.hpp"
#include "bohm/schrodinger.hpp"

namespace bohm {

enum class RealizationStatus { active, absorbed };

/// The particle's definite position r(t). Absorbed realizations sit on a wall
/// and never move again.
template <typename Scalar = double>
struct Realization {
    Scalar position = 0;
    RealizationStatus status = RealizationStatus::active;
    Scalar velocity_last = 0;

    bool absorbed() const { return status == RealizationStatus::absorbed; }
};

/// Default threshold (relative to max rho) below which the guidance velocity is
/// held at its last value.
inline constexpr double kDefaultNodeEpsilon = 1e-12;

/**
 * Guidance velocity v = J / rho at r: J and rho are linearly interpolated
 * separately between the bracketing nodes (walls count as nodes with psi = 0),
 * then divided. Near a zero of the wavefunction (interpolated rho below
 * node_epsilon * rho_max) `velocity_last` is returned instead.
 */
template <typename Scalar>
Scalar velocity_at(const StaggeredWavefunction<Scalar>& psi, const Grid<Scalar>& grid, Scalar r,
                   Scalar mass, Scalar velocity_last, Scalar rho_max,
                   Scalar node_epsilon = Scalar(kDefaultNodeEpsilon)) {
    if (!(std::abs(r) <= grid.half_width())) {
        throw std::out_of_range("velocity_at: position outside the well");
    }
    const Index n = grid.size();
    const Scalar u = grid.fractional_index(r);
    Index lo = static_cast<Index>(std::floor(u));
    lo = std::clamp<Index>(lo, -1, n - 1);
    const Scalar frac = u - Scalar(lo);

    auto rho_at = [&](Index k) {
        return (k < 0 || k >= n) ? Scalar(0) : psi.re[k] * psi.re[k] + psi.im[k] * psi.im_prev[k];
    };
    const Scalar rho = (Scalar(1) - frac) * rho_at(lo) + frac * rho_at(lo + 1);
    if (!(rho > node_epsilon * rho_max)) return velocity_last;
    const Scalar current = (Scalar(1) - frac) * current_at_node(psi, grid, mass, lo) +
                           frac * current_at_node(psi, grid, mass, lo + 1);
    return current / rho;
}

template <typename Scalar>
Scalar velocity_at(const StaggeredWavefunction<Scalar>& psi, const Grid<Scalar>& grid, Scalar r,
                   Scalar mass, Scalar velocity_last = Scalar(0)) {
    return velocity_at(psi, grid, r, mass, velocity_last, density(psi).maxCoeff());
}

/// Clamps to the wall once r comes within one lattice spacing of it.
template <typename Scalar>
void apply_absorptive_boundary(Realization<Scalar>& real, const Grid<Scalar>& grid) {
    const Scalar L = grid.half_width();
    const Scalar dx = grid.spacing();
    if (real.position > L - dx) {
        real.position = L;
        real.status = RealizationStatus::absorbed;
    } else if (real.position < -L + dx) {
        real.position = -L;
        real.status = RealizationStatus::absorbed;
    }
}

/// Explicit Euler step of m dr/dt = dS/dr followed by the absorptive wall rule.
template <typename Scalar>
void step_realization(Realization<Scalar>& real, const StaggeredWavefunction<Scalar>& psi,
                      const Grid<Scalar>& grid, Scalar mass, Scalar dt, Scalar rho_max,
                      Scalar node_epsilon = Scalar(kDefaultNodeEpsilon)) {
    if (real.absorbed()) return;
    const Scalar v = velocity_at(psi, grid, real.position, mass, real.velocity_last, rho_max, node_epsilon);
    real.velocity_last = v;
    real.position += dt * v;
    apply_absorptive_boundary(real, grid);
}

template <typename Scalar>
void step_realization(Realization<Scalar>& real, const StaggeredWavefunction<Scalar>& psi,
                      const Grid<Scalar>& grid, Scalar mass, Scalar dt) {
    if (real.absorbed()) return;
    step_realization(real, psi, grid, mass, dt, density(psi).maxCoeff());
}

}  // namespace bohm
