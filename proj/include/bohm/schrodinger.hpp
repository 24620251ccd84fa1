#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "bohm/grid.hpp"

namespace bohm {

/// Membership in [lo, hi), with edges snapped so that lattice positions computed
/// as offset*dx land on the intended side.
template <typename Scalar>
bool in_half_open(Scalar x, Scalar lo, Scalar hi) {
    const Scalar tol = std::sqrt(std::numeric_limits<Scalar>::epsilon()) *
                       std::max({Scalar(1), std::abs(lo), std::abs(hi)});
    return x >= lo - tol && x < hi - tol;
}

/// Potential energy per node. The infinite walls are the Dirichlet boundary, so
/// static_part is zero inside the well unless a caller adds an extra term.
template <typename Scalar = double>
struct PotentialField {
    ArrayX<Scalar> static_part;
    ArrayX<Scalar> detector_part;

    static PotentialField zero(Index size) {
        return {ArrayX<Scalar>::Zero(size), ArrayX<Scalar>::Zero(size)};
    }

    Index size() const { return static_part.size(); }
    ArrayX<Scalar> total() const { return static_part + detector_part; }
};

/// Centered first difference with zero ghosts beyond the walls.
template <typename Scalar>
ArrayX<Scalar> centered_difference(const ArrayX<Scalar>& f, Scalar dx) {
    const Index n = f.size();
    ArrayX<Scalar> d = ArrayX<Scalar>::Zero(n);
    if (n == 0) return d;
    d.head(n - 1) += f.tail(n - 1);
    d.tail(n - 1) -= f.head(n - 1);
    return d / (Scalar(2) * dx);
}

/// (Hf)_j = -(f_{j+1} - 2 f_j + f_{j-1}) / (2 m dx^2) + V_j f_j, Dirichlet ghosts.
template <typename Scalar>
void apply_hamiltonian(const Grid<Scalar>& grid, const ArrayX<Scalar>& f,
                       const ArrayX<Scalar>& total_potential, Scalar mass, ArrayX<Scalar>& out) {
    const Index n = grid.size();
    if (f.size() != n || total_potential.size() != n) {
        throw std::invalid_argument("apply_hamiltonian: length mismatch with grid");
    }
    const Scalar kinetic = Scalar(1) / (Scalar(2) * mass * grid.spacing() * grid.spacing());
    out.resize(n);
    out = Scalar(2) * f;
    out.head(n - 1) -= f.tail(n - 1);
    out.tail(n - 1) -= f.head(n - 1);
    out *= kinetic;
    out += total_potential * f;
}

template <typename Scalar>
ArrayX<Scalar> apply_hamiltonian(const Grid<Scalar>& grid, const ArrayX<Scalar>& f,
                                 const PotentialField<Scalar>& potential, Scalar mass) {
    if (potential.size() != grid.size() || potential.detector_part.size() != grid.size()) {
        throw std::invalid_argument("apply_hamiltonian: potential length mismatch with grid");
    }
    ArrayX<Scalar> out;
    apply_hamiltonian(grid, f, potential.total(), mass, out);
    return out;
}

/// Real half of a Visscher step: re <- re + dt H[im].
template <typename Scalar>
void advance_real(const Grid<Scalar>& grid, StaggeredWavefunction<Scalar>& psi,
                  const ArrayX<Scalar>& total_potential, Scalar mass, ArrayX<Scalar>& scratch) {
    apply_hamiltonian(grid, psi.im, total_potential, mass, scratch);
    psi.re += psi.dt * scratch;
}

/// Imaginary half of a Visscher step: im_prev <- im; im <- im - dt H[re].
template <typename Scalar>
void advance_imaginary(const Grid<Scalar>& grid, StaggeredWavefunction<Scalar>& psi,
                       const ArrayX<Scalar>& total_potential, Scalar mass, ArrayX<Scalar>& scratch) {
    apply_hamiltonian(grid, psi.re, total_potential, mass, scratch);
    psi.im_prev = psi.im;
    psi.im -= psi.dt * scratch;
    ++psi.step_index;
}

/**
 * One Visscher leapfrog step: re <- re + dt H[im]; im_prev <- im; im <- im - dt H[re].
 *
 * `scratch` avoids a per-step allocation in the hot loop; its contents are
 * overwritten.
 */
template <typename Scalar>
void visscher_step(const Grid<Scalar>& grid, StaggeredWavefunction<Scalar>& psi,
                   const ArrayX<Scalar>& total_potential, Scalar mass, ArrayX<Scalar>& scratch) {
    advance_real(grid, psi, total_potential, mass, scratch);
    advance_imaginary(grid, psi, total_potential, mass, scratch);
}

template <typename Scalar>
void visscher_step(const Grid<Scalar>& grid, StaggeredWavefunction<Scalar>& psi,
                   const PotentialField<Scalar>& potential, Scalar mass) {
    ArrayX<Scalar> scratch;
    visscher_step(grid, psi, potential.total(), mass, scratch);
}

/// Visscher's conserved density re^2 + im*im_prev. Can dip slightly below zero.
template <typename Scalar>
ArrayX<Scalar> density(const StaggeredWavefunction<Scalar>& psi) {
    return psi.re.square() + psi.im * psi.im_prev;
}

template <typename Scalar>
Scalar pseudo_norm(const StaggeredWavefunction<Scalar>& psi, const Grid<Scalar>& grid) {
    return density(psi).sum() * grid.spacing();
}

/// sum over nodes in [a, b) of max(rho, 0) dx.
template <typename Scalar>
Scalar probability_in_interval(const StaggeredWavefunction<Scalar>& psi, const Grid<Scalar>& grid,
                               Scalar a, Scalar b) {
    const Scalar L = grid.half_width();
    if (!(a < b) || a < -L || b > L) {
        throw std::invalid_argument("probability_in_interval: need -L <= a < b <= L");
    }
    const ArrayX<Scalar> rho = density(psi);
    Scalar p = 0;
    for (Index j = 0; j < grid.size(); ++j) {
        if (in_half_open(grid.x(j), a, b)) p += std::max(rho[j], Scalar(0));
    }
    return p * grid.spacing();
}

/// Imaginary part centered at the time level of re.
template <typename Scalar>
ArrayX<Scalar> centered_imaginary(const StaggeredWavefunction<Scalar>& psi) {
    return Scalar(0.5) * (psi.im + psi.im_prev);
}

/// J = (1/m)(re D[im_avg] - im_avg D[re]).
template <typename Scalar>
ArrayX<Scalar> probability_current(const StaggeredWavefunction<Scalar>& psi,
                                   const Grid<Scalar>& grid, Scalar mass) {
    const ArrayX<Scalar> ia = centered_imaginary(psi);
    const Scalar dx = grid.spacing();
    return (psi.re * centered_difference(ia, dx) - ia * centered_difference(psi.re, dx)) / mass;
}

/// Pointwise current at node j; matches probability_current(...)[j]. Indices
/// -1 and M (the walls) return zero.
template <typename Scalar>
Scalar current_at_node(const StaggeredWavefunction<Scalar>& psi, const Grid<Scalar>& grid,
                       Scalar mass, Index j) {
    const Index n = grid.size();
    if (j < 0 || j >= n) return Scalar(0);
    auto re = [&](Index k) { return (k < 0 || k >= n) ? Scalar(0) : psi.re[k]; };
    auto ia = [&](Index k) {
        return (k < 0 || k >= n) ? Scalar(0) : Scalar(0.5) * (psi.im[k] + psi.im_prev[k]);
    };
    const Scalar two_dx = Scalar(2) * grid.spacing();
    const Scalar d_ia = (ia(j + 1) - ia(j - 1)) / two_dx;
    const Scalar d_re = (re(j + 1) - re(j - 1)) / two_dx;
    return (re(j) * d_ia - ia(j) * d_re) / mass;
}

/**
 * Staggered state from a complex profile at t = 0, with the imaginary half steps
 * taken from a first-order Taylor step of i dpsi/dt = H psi.
 */
template <typename Scalar>
StaggeredWavefunction<Scalar> staggered_from_complex(
    const Grid<Scalar>& grid, const Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>& psi0,
    const PotentialField<Scalar>& potential, Scalar mass, Scalar dt) {
    if (psi0.size() != grid.size()) {
        throw std::invalid_argument("staggered_from_complex: length mismatch with grid");
    }
    const ArrayX<Scalar> re = psi0.real();
    const ArrayX<Scalar> im = psi0.imag();
    const ArrayX<Scalar> h_re = apply_hamiltonian(grid, re, potential, mass);
    StaggeredWavefunction<Scalar> psi;
    psi.dt = dt;
    psi.re = re;
    psi.im = im - Scalar(0.5) * dt * h_re;
    psi.im_prev = im + Scalar(0.5) * dt * h_re;
    return psi;
}

/// Largest stable time step for the explicit scheme given the potential bound.
template <typename Scalar>
Scalar stable_time_step_bound(const Grid<Scalar>& grid, Scalar mass, Scalar max_abs_potential) {
    const Scalar dx2 = grid.spacing() * grid.spacing();
    return dx2 * mass / (Scalar(1) + max_abs_potential * dx2 * mass);
}

}  // namespace bohm
