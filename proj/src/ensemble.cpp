#include "bohm/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace bohm {

namespace {

// Runs task(i) for i in [0, count) on up to `threads` workers.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < count; i = next++) task(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    next = count;
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

ScanResult scan_r0(const SimConfig<double>& base, const ScanOptions& options) {
    base.validate();
    const Grid<double> grid = base.grid();

    std::vector<Index> nodes = options.nodes;
    if (nodes.empty()) {
        nodes.resize(static_cast<std::size_t>(grid.size()));
        for (Index j = 0; j < grid.size(); ++j) nodes[static_cast<std::size_t>(j)] = j;
    }
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
        throw std::invalid_argument("scan_r0: duplicate scan node");
    }
    if (nodes.front() < 0 || nodes.back() >= grid.size()) {
        throw std::invalid_argument("scan_r0: scan node outside the grid");
    }

    const ArrayX<double> rho0 = density(ground_state(grid, base.mass, base.dt));
    ScanResult scan;
    scan.entries.resize(nodes.size());
    double total_weight = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        auto& e = scan.entries[k];
        e.node = nodes[k];
        e.r0 = grid.x(e.node);
        e.weight = std::max(rho0[e.node], 0.0) * grid.spacing();
        total_weight += e.weight;
    }
    if (!(total_weight > 0)) throw std::invalid_argument("scan_r0: scan set carries no probability");
    for (auto& e : scan.entries) e.weight /= total_weight;

    parallel_for(scan.entries.size(), options.threads, [&](std::size_t k) {
        SimConfig<double> cfg = base;
        cfg.r0 = scan.entries[k].r0;
        if (!options.keep_series) {
            cfg.record_every = 0;
            cfg.density_every = 0;
        }
        scan.entries[k].outcome = run(cfg);
    });
    return scan;
}

ScanResult scan_sampled(const SimConfig<double>& base, std::size_t count, std::uint64_t seed,
                        unsigned threads) {
    base.validate();
    if (count == 0) throw std::invalid_argument("scan_sampled: empty sample");
    const Grid<double> grid = base.grid();
    const auto positions = sample_initial_positions(ground_state(grid, base.mass, base.dt), grid, count, seed);
    ScanResult scan;
    scan.entries.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        scan.entries[k].r0 = positions[k];
        scan.entries[k].node = x_to_node(grid, positions[k]);
        scan.entries[k].weight = 1.0 / static_cast<double>(count);
    }
    parallel_for(count, threads, [&](std::size_t k) {
        SimConfig<double> cfg = base;
        cfg.r0 = scan.entries[k].r0;
        cfg.record_every = 0;
        cfg.density_every = 0;
        scan.entries[k].outcome = run(cfg);
    });
    return scan;
}

double EnsembleReport::total_mass() const {
    double s = 0;
    for (double v : p) s += v;
    return s + p_no_detection + p_absorbed + p_timeout;
}

EnsembleReport detector_probabilities(const ScanResult& scan, std::size_t detector_count) {
    if (scan.entries.empty()) throw std::invalid_argument("detector_probabilities: empty scan");
    // Reduce in position order so the sums are bitwise independent of how entries arrived.
    std::vector<const ScanEntry*> ordered;
    ordered.reserve(scan.entries.size());
    for (const auto& e : scan.entries) ordered.push_back(&e);
    std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->r0 < b->r0; });

    EnsembleReport report;
    report.p.assign(detector_count, 0.0);
    for (const ScanEntry* e : ordered) {
        const auto& o = e->outcome;
        switch (o.kind) {
            case OutcomeKind::collapsed:
                if (o.detector_index < 0 || static_cast<std::size_t>(o.detector_index) >= detector_count) {
                    throw std::out_of_range("detector_probabilities: outcome names an unknown detector");
                }
                report.p[static_cast<std::size_t>(o.detector_index)] += e->weight;
                break;
            case OutcomeKind::no_detection: report.p_no_detection += e->weight; break;
            case OutcomeKind::absorbed: report.p_absorbed += e->weight; break;
            case OutcomeKind::timeout: report.p_timeout += e->weight; break;
        }
    }
    return report;
}

std::vector<double> qm_baseline(const StaggeredWavefunction<double>& psi0, const DetectorArray<double>& dets,
                                const Grid<double>& grid) {
    std::vector<double> p0;
    p0.reserve(dets.size());
    for (const auto& det : dets) p0.push_back(window_probability(psi0, det, grid));
    return p0;
}

EnsembleReport ensemble_report(const ScanResult& scan, const SimConfig<double>& base) {
    EnsembleReport report = detector_probabilities(scan, base.detectors.size());
    const Grid<double> grid = base.grid();
    report.p0 = qm_baseline(ground_state(grid, base.mass, base.dt), base.detectors, grid);
    for (const auto& det : base.detectors) report.centers.push_back(det.center);
    return report;
}

double total_variation(const EnsembleReport& report) {
    if (report.p.size() != report.p0.size()) {
        throw std::invalid_argument("total_variation: report has no baseline");
    }
    double tv = report.p_no_detection + report.p_absorbed + report.p_timeout;
    for (std::size_t i = 0; i < report.p.size(); ++i) tv += std::abs(report.p[i] - report.p0[i]);
    return 0.5 * tv;
}

std::vector<CollapseTimePoint> collapse_time_experiment(const SimConfig<double>& base,
                                                        std::span<const int> dof_counts, unsigned threads) {
    if (base.detectors.empty()) throw std::invalid_argument("collapse_time_experiment: no detector");
    std::vector<CollapseTimePoint> points(dof_counts.size());
    parallel_for(dof_counts.size(), threads, [&](std::size_t k) {
        SimConfig<double> cfg = base;
        cfg.record_every = 0;
        cfg.density_every = 0;
        for (auto& det : cfg.detectors) det.dof_count = dof_counts[k];
        const RunOutcome<double> o = run(cfg);
        points[k] = {dof_counts[k], o.kind, o.step, o.time};
    });
    return points;
}

std::vector<SuiteRun> two_detector_suite(const SimConfig<double>& base,
                                         std::span<const std::pair<double, double>> pairs,
                                         unsigned threads) {
    if (base.detectors.empty()) throw std::invalid_argument("two_detector_suite: no prototype detector");
    const Grid<double> grid = base.grid();
    std::vector<SuiteRun> runs;
    std::vector<SimConfig<double>> configs;
    for (std::size_t s = 0; s < pairs.size(); ++s) {
        Detector<double> left = base.detectors[0];
        Detector<double> right = base.detectors[0];
        left.center = pairs[s].first;
        right.center = pairs[s].second;
        SimConfig<double> cfg = base;
        cfg.detectors = DetectorArray<double>({left, right});

        ScanOptions options;
        for (Index j = 0; j < grid.size(); ++j) {
            if (window(left, grid.x(j)) == 1.0) options.nodes.push_back(j);
        }
        options.threads = threads;
        for (auto& e : scan_r0(cfg, options).entries) {
            runs.push_back({s, left.center, right.center, std::move(e)});
        }
    }
    return runs;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: x and y differ in length");
    if (x.size() < 2) throw std::invalid_argument("fit_power_law: need at least two points");
    const auto n = static_cast<Index>(x.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd target(n);
    for (Index i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        const double yi = y[static_cast<std::size_t>(i)];
        if (!(xi > 0) || !(yi > 0)) throw std::invalid_argument("fit_power_law: inputs must be positive");
        design(i, 0) = std::log(xi);
        design(i, 1) = 1.0;
        target[i] = std::log(yi);
    }
    if ((design.col(0).array() == design(0, 0)).all()) {
        throw std::invalid_argument("fit_power_law: x values are all equal");
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
    return {coef[0], coef[1], (design * coef - target).squaredNorm()};
}

CollapseScaling fit_collapse_scaling(std::span<const CollapseTimePoint> points) {
    std::vector<double> n, t, s;
    for (const auto& p : points) {
        if (p.kind != OutcomeKind::collapsed) {
            throw std::invalid_argument("fit_collapse_scaling: N = " + std::to_string(p.dof_count) +
                                        " did not collapse (" + to_string(p.kind) + ")");
        }
        n.push_back(p.dof_count);
        t.push_back(p.time);
        s.push_back(static_cast<double>(p.step));
    }
    return {fit_power_law(n, t), fit_power_law(n, s)};
}

std::vector<double> sample_initial_positions(const StaggeredWavefunction<double>& psi, const Grid<double>& grid,
                                             std::size_t count, std::uint64_t seed) {
    const ArrayX<double> rho = density(psi).max(0.0);
    std::mt19937_64 rng(seed);
    std::discrete_distribution<Index> pick(rho.data(), rho.data() + rho.size());
    std::uniform_real_distribution<double> offset(-0.5, 0.5);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const Index j = pick(rng);
        out.push_back(grid.x(j) + offset(rng) * grid.spacing());
    }
    return out;
}

double ks_distance(std::vector<double> positions, const StaggeredWavefunction<double>& psi,
                   const Grid<double>& grid) {
    if (positions.empty()) throw std::invalid_argument("ks_distance: no samples");
    const ArrayX<double> rho = density(psi).max(0.0);
    const double mass = rho.sum();
    const double dx = grid.spacing();
    // Cumulative mass up to the lower edge of each cell.
    std::vector<double> below(static_cast<std::size_t>(grid.size()) + 1, 0.0);
    for (Index j = 0; j < grid.size(); ++j) {
        below[static_cast<std::size_t>(j) + 1] = below[static_cast<std::size_t>(j)] + rho[j] / mass;
    }
    auto cdf = [&](double x) {
        const double u = (x - (grid.x(0) - 0.5 * dx)) / dx;
        if (u <= 0) return 0.0;
        if (u >= static_cast<double>(grid.size())) return 1.0;
        const auto j = static_cast<std::size_t>(std::floor(u));
        return below[j] + (u - static_cast<double>(j)) * (below[j + 1] - below[j]);
    };
    std::sort(positions.begin(), positions.end());
    const double n = static_cast<double>(positions.size());
    double d = 0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        const double f = cdf(positions[k]);
        d = std::max({d, std::abs(f - static_cast<double>(k) / n), std::abs(static_cast<double>(k + 1) / n - f)});
    }
    return d;
}

void transport_ensemble(StaggeredWavefunction<double>& psi, const Grid<double>& grid,
                        const PotentialField<double>& potential, double mass,
                        std::vector<Realization<double>>& ensemble, std::int64_t steps) {
    const ArrayX<double> v_total = potential.total();
    ArrayX<double> scratch(grid.size());
    for (std::int64_t s = 0; s < steps; ++s) {
        visscher_step(grid, psi, v_total, mass, scratch);
        const double rho_max = density(psi).maxCoeff();
        for (auto& real : ensemble) step_realization(real, psi, grid, mass, psi.dt, rho_max);
    }
}

}  // namespace bohm
