#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bohm/grid.hpp"
#include "bohm/schrodinger.hpp"

namespace bohm {

/// Value of a top-hat window exactly on its edge.
enum class EdgeConvention {
    midpoint,   // W = 1/2 on both edges; adjacent windows sum to 1, mirror symmetric
    half_open,  // W = 1 on [x0 - d, x0 + d)
};

/// Restoring potential U2(y) = k y^2 / 2 acting on the pointer; k = 0 disables it.
template <typename Scalar = double>
struct RestoringPotential {
    Scalar stiffness = 0;

    Scalar gradient(Scalar y) const { return stiffness * y; }
    bool is_zero() const { return stiffness == Scalar(0); }
};

/**
 * A detector: top-hat window of half-width d around x0, coupled with strength
 * lambda to a classical pointer (y, y_dot) of mass mu representing N degrees of
 * freedom.
 */
template <typename Scalar = double>
struct Detector {
    Scalar center = 0;
    Scalar half_width = 1;
    Scalar coupling = Scalar(0.01);
    int dof_count = 1;
    Scalar pointer_mass = 1;
    Scalar y = 0;
    Scalar y_dot = 0;
    RestoringPotential<Scalar> restoring{};
    /// Window value away from the detector, 0 (default) or -1.
    Scalar outside_value = 0;
    EdgeConvention edges = EdgeConvention::midpoint;

    Scalar lower_edge() const { return center - half_width; }
    Scalar upper_edge() const { return center + half_width; }

    void validate() const {
        if (!(half_width > Scalar(0))) throw std::invalid_argument("detector half-width must be positive");
        if (dof_count < 1) throw std::invalid_argument("detector dof_count must be >= 1");
        if (!(pointer_mass > Scalar(0))) throw std::invalid_argument("pointer mass must be positive");
        if (outside_value != Scalar(0) && outside_value != Scalar(-1)) {
            throw std::invalid_argument("window outside value must be 0 or -1");
        }
    }
};

/// Top-hat window. Returns 1 inside, `outside_value` outside, and on the edges
/// whatever the edge convention prescribes.
template <typename Scalar>
Scalar window(const Detector<Scalar>& det, Scalar x) {
    const Scalar lo = det.lower_edge();
    const Scalar hi = det.upper_edge();
    if (det.edges == EdgeConvention::half_open) {
        return in_half_open(x, lo, hi) ? Scalar(1) : det.outside_value;
    }
    const Scalar tol = std::sqrt(std::numeric_limits<Scalar>::epsilon()) *
                       std::max({Scalar(1), std::abs(lo), std::abs(hi)});
    if (std::abs(x - lo) <= tol || std::abs(x - hi) <= tol) {
        return Scalar(0.5) * (Scalar(1) + det.outside_value);
    }
    return (x > lo && x < hi) ? Scalar(1) : det.outside_value;
}

/// Ordered set of detectors, centers strictly increasing.
template <typename Scalar = double>
class DetectorArray {
public:
    DetectorArray() = default;
    explicit DetectorArray(std::vector<Detector<Scalar>> detectors) : detectors_(std::move(detectors)) {
        for (std::size_t i = 0; i < detectors_.size(); ++i) {
            detectors_[i].validate();
            if (i > 0 && !(detectors_[i].center > detectors_[i - 1].center)) {
                throw std::invalid_argument("detector centers must be strictly increasing");
            }
        }
    }

    std::size_t size() const { return detectors_.size(); }
    bool empty() const { return detectors_.empty(); }
    const Detector<Scalar>& operator[](std::size_t i) const { return detectors_[i]; }
    Detector<Scalar>& operator[](std::size_t i) { return detectors_[i]; }
    auto begin() const { return detectors_.begin(); }
    auto end() const { return detectors_.end(); }
    auto begin() { return detectors_.begin(); }
    auto end() { return detectors_.end(); }

private:
    std::vector<Detector<Scalar>> detectors_;
};

/// `count` equal windows tiling [-L, L]; every other field copied from `prototype`.
template <typename Scalar>
DetectorArray<Scalar> partition_array(Scalar half_width_of_well, int count,
                                      const Detector<Scalar>& prototype) {
    if (count < 1) throw std::invalid_argument("partition needs at least one detector");
    std::vector<Detector<Scalar>> dets;
    const Scalar d = half_width_of_well / Scalar(count);
    for (int i = 0; i < count; ++i) {
        Detector<Scalar> det = prototype;
        det.half_width = d;
        det.center = -half_width_of_well + d * Scalar(2 * i + 1);
        det.y = 0;
        det.y_dot = 0;
        dets.push_back(det);
    }
    return DetectorArray<Scalar>(std::move(dets));
}

/// W_i(x_j) for every node (rows) and detector (columns).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> window_matrix(const DetectorArray<Scalar>& dets,
                                                                     const Grid<Scalar>& grid) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w(grid.size(), static_cast<Index>(dets.size()));
    for (Index i = 0; i < w.cols(); ++i) {
        for (Index j = 0; j < grid.size(); ++j) w(j, i) = window(dets[static_cast<std::size_t>(i)], grid.x(j));
    }
    return w;
}

/// -lambda_i N_i y_i for each detector: the coefficient multiplying W_i in the potential.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> potential_coefficients(const DetectorArray<Scalar>& dets) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(static_cast<Index>(dets.size()));
    for (std::size_t i = 0; i < dets.size(); ++i) {
        c[static_cast<Index>(i)] = -dets[i].coupling * Scalar(dets[i].dof_count) * dets[i].y;
    }
    return c;
}

/// Vdet_j = -lambda N sum_i y_i W_i(x_j).
template <typename Scalar>
ArrayX<Scalar> detector_potential(const DetectorArray<Scalar>& dets, const Grid<Scalar>& grid) {
    if (dets.empty()) return ArrayX<Scalar>::Zero(grid.size());
    return (window_matrix(dets, grid) * potential_coefficients(dets)).array();
}

/// Semi-implicit Euler: y_dot <- y_dot + dt (lambda W(r) - U2'(y)/N) / mu; y <- y + dt y_dot.
template <typename Scalar>
void step_pointer(Detector<Scalar>& det, Scalar r, Scalar dt) {
    const Scalar force = det.coupling * window(det, r) -
                         det.restoring.gradient(det.y) / Scalar(det.dof_count);
    det.y_dot += dt * force / det.pointer_mass;
    det.y += dt * det.y_dot;
}

}  // namespace bohm
