#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bohm {

using Index = Eigen::Index;

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/**
 * Uniform lattice on the interior of the infinite well [-L, L].
 *
 * Node j sits at x_j = -L + (j+1)*dx, j = 0..M-1, with (M+1)*dx = 2L. The walls
 * at +-L carry psi = 0 and are not stored.
 */
template <typename Scalar = double>
class Grid {
public:
    Grid(Scalar half_width, Index interior_nodes)
        : half_width_(half_width), interior_nodes_(interior_nodes) {
        if (!(half_width > Scalar(0))) {
            throw std::invalid_argument("grid half-width must be positive");
        }
        if (interior_nodes < 3) {
            throw std::invalid_argument("grid needs at least 3 interior nodes, got " +
                                        std::to_string(interior_nodes));
        }
        spacing_ = Scalar(2) * half_width / Scalar(interior_nodes + 1);
    }

    Scalar half_width() const { return half_width_; }
    Scalar spacing() const { return spacing_; }
    Index size() const { return interior_nodes_; }

    // Evaluated as an offset from the well center so that mirror nodes are exact
    // negatives of each other.
    Scalar x(Index j) const {
        return (Scalar(j) - Scalar(interior_nodes_ - 1) / Scalar(2)) * spacing_;
    }

    ArrayX<Scalar> positions() const {
        ArrayX<Scalar> xs(interior_nodes_);
        for (Index j = 0; j < interior_nodes_; ++j) xs[j] = x(j);
        return xs;
    }

    /// Continuous node coordinate: 0 at x_0, M-1 at x_{M-1}, -1 and M at the walls.
    Scalar fractional_index(Scalar xv) const {
        return (xv + half_width_) / spacing_ - Scalar(1);
    }

private:
    Scalar half_width_;
    Index interior_nodes_;
    Scalar spacing_{};
};

template <typename Scalar>
Grid<Scalar> make_grid(Scalar half_width, Index interior_nodes) {
    return Grid<Scalar>(half_width, interior_nodes);
}

/// Integer offset from the well center in units of dx ("lattice units").
struct LatticeCoordinate {
    std::int64_t offset_from_center = 0;

    template <typename Scalar>
    Scalar to_length(const Grid<Scalar>& grid) const {
        return Scalar(offset_from_center) * grid.spacing();
    }
};

/// Nearest interior node; exact midpoints round toward the well center.
template <typename Scalar>
Index x_to_node(const Grid<Scalar>& grid, Scalar xv) {
    if (!(std::abs(xv) <= grid.half_width())) {
        throw std::out_of_range("position outside the well");
    }
    // Measured from the center so that +-x map to mirror indices.
    const Scalar center = Scalar(grid.size() - 1) / Scalar(2);
    const Scalar u = center + xv / grid.spacing();
    const Scalar lower = std::floor(u);
    const Scalar frac = u - lower;
    const Scalar tie_tol = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), std::abs(u));
    Index j;
    if (frac < Scalar(0.5) - tie_tol) {
        j = static_cast<Index>(lower);
    } else if (frac > Scalar(0.5) + tie_tol) {
        j = static_cast<Index>(lower) + 1;
    } else {
        j = (u > center) ? static_cast<Index>(lower) : static_cast<Index>(lower) + 1;
    }
    return std::clamp<Index>(j, 0, grid.size() - 1);
}

/**
 * Wavefunction in Visscher's staggered layout: the real part lives at integer
 * time t, the imaginary part at t + dt/2 and t - dt/2.
 */
template <typename Scalar = double>
struct StaggeredWavefunction {
    ArrayX<Scalar> re;
    ArrayX<Scalar> im;
    ArrayX<Scalar> im_prev;
    std::int64_t step_index = 0;
    Scalar dt{};

    Index size() const { return re.size(); }
    Scalar time() const { return Scalar(step_index) * dt; }
};

/// Lowest eigenvalue of the Dirichlet finite-difference Hamiltonian -(1/2m) D2.
template <typename Scalar>
Scalar discrete_ground_energy(const Grid<Scalar>& grid, Scalar mass) {
    const Scalar dx = grid.spacing();
    const Scalar k = std::numbers::pi_v<Scalar> / (Scalar(2) * grid.half_width());
    // 1 - cos(k dx) written as 2 sin^2(k dx / 2) to avoid cancellation.
    const Scalar s = std::sin(k * dx / Scalar(2));
    return Scalar(2) * s * s / (mass * dx * dx);
}

/**
 * Ground state of the well, sampled on the nodes and renormalised so that
 * sum(re^2) dx = 1. The imaginary half-steps use the discrete eigenvalue, which
 * makes the state stationary under visscher_step.
 */
template <typename Scalar>
StaggeredWavefunction<Scalar> ground_state(const Grid<Scalar>& grid, Scalar mass, Scalar dt) {
    if (!(dt > Scalar(0))) throw std::invalid_argument("time step must be positive");
    if (!(mass > Scalar(0))) throw std::invalid_argument("mass must be positive");
    const Scalar L = grid.half_width();
    const Scalar pi = std::numbers::pi_v<Scalar>;

    StaggeredWavefunction<Scalar> psi;
    psi.dt = dt;
    // sin(pi (x - L) / 2L) == -cos(pi x / 2L); the cosine form is bit-symmetric in x.
    psi.re = -(pi * grid.positions() / (Scalar(2) * L)).cos() / std::sqrt(L);
    psi.re /= std::sqrt(psi.re.square().sum() * grid.spacing());

    const Scalar s = std::sin(discrete_ground_energy(grid, mass) * dt / Scalar(2));
    psi.im = -s * psi.re;
    psi.im_prev = s * psi.re;
    return psi;
}

/// Wraps a real profile as a state with zero imaginary part.
template <typename Scalar>
StaggeredWavefunction<Scalar> real_state(ArrayX<Scalar> re, Scalar dt) {
    StaggeredWavefunction<Scalar> psi;
    psi.dt = dt;
    psi.im = ArrayX<Scalar>::Zero(re.size());
    psi.im_prev = psi.im;
    psi.re = std::move(re);
    return psi;
}

}  // namespace bohm
