// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--threads N] [--out DIR] [--only A3,A9]
//
// With --out, the CSVs behind each check are written under DIR.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bohm/csv.hpp"
#include "bohm/ensemble.hpp"

using namespace bohm;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kA1StationaryDrift = 1e-10;
constexpr double kA1CoupledDrift = 1e-4;
constexpr double kA1Seconds = 5;
constexpr double kA2DensityChange = 1e-8;
constexpr double kA3PaperTime = 723.238;
constexpr double kA3Band = 0.10;
constexpr double kA3Seconds = 30;
constexpr double kA4PaperSlope = -0.38;
constexpr double kA4SlopeBand = 0.08;
constexpr double kA4Seconds = 300;
constexpr double kA5Closure = 1e-12;
constexpr double kA5Symmetry = 0.02;
constexpr double kA5CentralRelative = 0.1;
constexpr double kA5Seconds = 3600;
constexpr double kA7Expected = 0.198363;
constexpr double kA7Tolerance = 2e-3;
constexpr double kA8Ks = 0.05;
constexpr std::size_t kA8Samples = 2000;
constexpr double kA8Time = 50;
constexpr double kA9Low = 5.5;
constexpr double kA9High = 6.1;

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Context {
    unsigned threads = 1;
    std::optional<fs::path> out;
    // Shared between A5 and A6.
    std::optional<double> tv_n1;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SimConfig<double> single_detector(double center, double r0, int dof_count = 1) {
    SimConfig<double> c;
    Detector<double> d;
    d.center = center;
    d.dof_count = dof_count;
    c.detectors = DetectorArray<double>({d});
    c.r0 = r0;
    return c;
}

SimConfig<double> array_config(int dof_count, double threshold) {
    SimConfig<double> c;
    Detector<double> proto;
    proto.dof_count = dof_count;
    c.detectors = partition_array(10.0, 10, proto);
    c.collapse_threshold = threshold;
    return c;
}

double analytic_well_probability(double a, double b, double L) {
    auto F = [L](double x) { return (x / 2 + L / (2 * std::numbers::pi) * std::sin(std::numbers::pi * x / L)) / L; };
    return F(b) - F(a);
}

Verdict a1_norm(Context& ctx) {
    const Stopwatch clock;
    const auto grid = make_grid(10.0, 199);
    auto psi = ground_state(grid, 1.0, 0.0025);
    const double n0 = pseudo_norm(psi, grid);
    const ArrayX<double> zero = ArrayX<double>::Zero(grid.size());
    ArrayX<double> scratch;
    double stationary = 0;
    for (int k = 0; k < 100000; ++k) {
        visscher_step(grid, psi, zero, 1.0, scratch);
        stationary = std::max(stationary, std::abs(pseudo_norm(psi, grid) - n0));
    }

    auto c = single_detector(5.0, 5.5);
    c.record_every = 1000;
    const auto o = run(c);
    const double coupled = o.diagnostics.max_norm_drift;
    const double secs = clock.seconds();
    if (ctx.out) write_text(*ctx.out / "a1" / "outcome.csv", outcome_csv(o));
    return {stationary < kA1StationaryDrift && coupled < kA1CoupledDrift && secs < kA1Seconds,
            fmt("stationary drift %.3g (< %.0e), coupled drift %.6g over %lld steps (< %.0e), %.2f s (< %.0f s)",
                stationary, kA1StationaryDrift, coupled, static_cast<long long>(o.step), kA1CoupledDrift, secs,
                kA1Seconds)};
}

Verdict a2_stationary(Context&) {
    auto c = single_detector(5.0, -5.0);
    const auto fast = run(c);
    c.short_circuit_stationary = false;
    c.max_steps = 100000;
    c.density_every = 100000;
    const auto slow = run(c);
    const auto& snaps = slow.series.density_snapshots;
    const double change = (snaps.back() - snaps.front()).abs().maxCoeff();
    const bool dormant = slow.detectors[0].y == 0.0 && slow.detectors[0].y_dot == 0.0;
    return {fast.kind == OutcomeKind::no_detection && slow.kind == OutcomeKind::no_detection &&
                snaps.size() == 2 && change < kA2DensityChange && dormant,
            fmt("short-circuit %s, simulated %s, max density change %.3g (< %.0e), y %s", to_string(fast.kind),
                to_string(slow.kind), change, kA2DensityChange, dormant ? "exactly 0" : "moved")};
}

Verdict a3_collapse_time(Context& ctx) {
    const Stopwatch clock;
    auto c = single_detector(5.0, 5.5);
    c.record_every = 1000;
    c.density_every = 50000;
    const auto o = run(c);
    const double secs = clock.seconds();
    if (ctx.out) {
        emit_run_csv(o.series, o, *ctx.out / "a3" / "run.csv");
        write_text(*ctx.out / "a3" / "density.csv", density_csv(o.series, c.grid()));
        write_text(*ctx.out / "a3" / "outcome.csv", outcome_csv(o));
    }
    const double rel = std::abs(o.time - kA3PaperTime) / kA3PaperTime;
    return {o.collapsed() && o.detector_index == 0 && rel < kA3Band && secs < kA3Seconds,
            fmt("%s at step %lld, t_c = %.3f vs %.3f (%.2f%%, band %.0f%%), %.2f s", to_string(o.kind),
                static_cast<long long>(o.step), o.time, kA3PaperTime, 100 * rel, 100 * kA3Band, secs)};
}

Verdict a4_power_law(Context& ctx) {
    const Stopwatch clock;
    const auto base = single_detector(0.0, LatticeCoordinate{5}.to_length(make_grid(10.0, 199)));
    const std::vector<int> n{2, 4, 6, 8, 10};
    const auto pts = collapse_time_experiment(base, n, ctx.threads);
    bool monotone = true;
    std::string steps;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].kind == OutcomeKind::collapsed) || (i > 0 && !(pts[i].time < pts[i - 1].time))) {
            monotone = false;
        }
        steps += (i ? " " : "") + std::to_string(pts[i].step);
    }
    if (!monotone) return {false, "collapse steps not strictly decreasing: " + steps};
    const auto fit = fit_collapse_scaling(pts);
    const double secs = clock.seconds();
    if (ctx.out) {
        write_text(*ctx.out / "a4" / "nsweep.csv", nsweep_csv(pts));
        write_text(*ctx.out / "a4" / "fit.csv", fit_csv(fit));
    }
    const double slope = fit.step_units.slope;
    return {std::abs(slope - kA4PaperSlope) <= kA4SlopeBand && secs < kA4Seconds,
            fmt("steps %s; slope %.4f (target %.2f +- %.2f), intercept %.3f in step units / %.3f in time units, %.1f s",
                steps.c_str(), slope, kA4PaperSlope, kA4SlopeBand, fit.step_units.intercept,
                fit.time_units.intercept, secs)};
}

EnsembleReport array_scan(Context& ctx, int dof_count, double threshold, const char* tag, double& seconds) {
    const Stopwatch clock;
    const auto c = array_config(dof_count, threshold);
    ScanOptions options;
    options.threads = ctx.threads;
    const auto scan = scan_r0(c, options);
    const auto report = ensemble_report(scan, c);
    seconds = clock.seconds();
    if (ctx.out) {
        write_text(*ctx.out / tag / "scan.csv", scan_csv(scan));
        emit_report_csv(report, *ctx.out / tag / "report.csv");
    }
    return report;
}

Verdict a5_array_n1(Context& ctx) {
    double secs = 0;
    const auto r = array_scan(ctx, 1, 0.95, "a5", secs);
    const double closure = std::abs(r.total_mass() - 1.0);
    double asym = 0;
    for (std::size_t i = 0; i < r.p.size(); ++i) asym = std::max(asym, std::abs(r.p[i] - r.p[r.p.size() - 1 - i]));
    bool central = true;
    std::string central_text;
    for (std::size_t i : {std::size_t(4), std::size_t(5)}) {
        const double dev = std::abs(r.p[i] - r.p0[i]) / r.p0[i];
        central = central && dev < kA5CentralRelative;
        central_text += fmt(" p%zu %.4f vs %.4f (%.2f%%)", i, r.p[i], r.p0[i], 100 * dev);
    }
    const double tv = total_variation(r);
    ctx.tv_n1 = tv;
    const bool pass = closure < kA5Closure && asym < kA5Symmetry && central && tv > 0 && secs < kA5Seconds;
    return {pass, fmt("closure %.2g (< %.0e), asymmetry %.4f (< %.2f),%s, total variation %.4f (> 0); "
                      "absorbed %.4f, timeout %.4f; %.0f s",
                      closure, kA5Closure, asym, kA5Symmetry, central_text.c_str(), tv, r.p_absorbed, r.p_timeout,
                      secs)};
}

Verdict a6_array_n2(Context& ctx) {
    if (!ctx.tv_n1) {
        double secs = 0;
        ctx.tv_n1 = total_variation(array_scan(ctx, 1, 0.95, "a5", secs));
    }
    double secs = 0;
    const auto r = array_scan(ctx, 2, 0.75, "a6", secs);
    const double tv = total_variation(r);
    return {tv < *ctx.tv_n1, fmt("total variation N=2 %.4f vs N=1 %.4f; absorbed %.4f, timeout %.4f; %.0f s", tv,
                                 *ctx.tv_n1, r.p_absorbed, r.p_timeout, secs)};
}

Verdict a7_baseline(Context& ctx) {
    const auto grid = make_grid(10.0, 199);
    const DetectorArray<double> center({Detector<double>{}});
    const double p0 = qm_baseline(ground_state(grid, 1.0, 0.0025), center, grid)[0];
    const double oracle = analytic_well_probability(-1.0, 1.0, 10.0);
    if (ctx.out) {
        const auto arr = array_config(1, 0.95).detectors;
        const auto base = qm_baseline(ground_state(grid, 1.0, 0.0025), arr, grid);
        write_text(*ctx.out / "a7" / "baseline.csv", baseline_csv(arr, base));
    }
    return {std::abs(p0 - kA7Expected) < kA7Tolerance && std::abs(p0 - oracle) < kA7Tolerance,
            fmt("p0 = %.6f, analytic %.6f, expected %.6f +- %.0e", p0, oracle, kA7Expected, kA7Tolerance)};
}

Verdict a8_equivariance(Context&) {
    const auto grid = make_grid(10.0, 199);
    const double L = grid.half_width();
    const double dt = 0.0025;
    Eigen::Array<std::complex<double>, Eigen::Dynamic, 1> psi0(grid.size());
    for (Index j = 0; j < grid.size(); ++j) {
        const double x = grid.x(j);
        psi0[j] = std::cos(std::numbers::pi * x / (2 * L)) + std::complex<double>(0, 1) * std::sin(std::numbers::pi * x / L);
    }
    psi0 /= std::sqrt(psi0.abs2().sum() * grid.spacing());
    const auto field = PotentialField<double>::zero(grid.size());
    auto psi = staggered_from_complex(grid, psi0, field, 1.0, dt);
    const auto x0 = sample_initial_positions(psi, grid, kA8Samples, 20240607);
    std::vector<Realization<double>> ensemble(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) ensemble[i].position = x0[i];
    const double ks0 = ks_distance(x0, psi, grid);
    transport_ensemble(psi, grid, field, 1.0, ensemble, static_cast<std::int64_t>(std::llround(kA8Time / dt)));
    std::vector<double> x;
    x.reserve(ensemble.size());
    double moved = 0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        x.push_back(ensemble[i].position);
        moved += std::abs(ensemble[i].position - x0[i]) / static_cast<double>(ensemble.size());
    }
    const double ks = ks_distance(x, psi, grid);
    return {ks < kA8Ks, fmt("KS distance %.4f at t = %.1f (< %.2f), %.4f at t = 0, %zu trajectories, "
                            "mean displacement %.3f",
                            ks, psi.time(), kA8Ks, ks0, x.size(), moved)};
}

Verdict a9_excursion(Context& ctx) {
    auto c = single_detector(4.0, 4.5);
    c.record_every = 1;
    const auto o = run(c);
    const auto& r = o.series.r;
    auto inside = [](double x) { return x >= 3.0 && x < 5.0; };
    std::optional<std::size_t> exit, reentry;
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (!exit && !inside(r[k])) exit = k;
        if (exit && !reentry && inside(r[k])) reentry = k;
    }
    const double peak = *std::max_element(r.begin(), r.end());
    if (ctx.out) {
        auto thin = c;
        thin.record_every = 1000;
        const auto t = run(thin);
        emit_run_csv(t.series, t, *ctx.out / "a9" / "run.csv");
    }
    const bool pass = o.collapsed() && exit && reentry && peak >= kA9Low && peak <= kA9High;
    return {pass, fmt("%s at step %lld; left the window at step %lld, back at step %lld; max r = %.3f (band [%.1f, %.1f])",
                      to_string(o.kind), static_cast<long long>(o.step),
                      exit ? static_cast<long long>(o.series.steps[*exit]) : -1LL,
                      reentry ? static_cast<long long>(o.series.steps[*reentry]) : -1LL, peak, kA9Low, kA9High)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks for the collapse simulator"};
    unsigned threads = 0;
    std::string out;
    std::vector<std::string> only;
    app.add_option("--threads", threads, "worker threads for scans (0 = hardware concurrency)");
    app.add_option("--out", out, "write the CSVs behind each check under this directory");
    app.add_option("--only", only, "run only these criteria (e.g. A3,A9)")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    Context ctx;
    ctx.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    if (!out.empty()) ctx.out = fs::path(out);

    struct Criterion {
        const char* id;
        const char* title;
        Verdict (*check)(Context&);
    };
    const Criterion criteria[] = {
        {"A1", "norm conservation", a1_norm},
        {"A2", "stationarity without detection", a2_stationary},
        {"A3", "single-detector collapse time", a3_collapse_time},
        {"A4", "collapse time power law in N", a4_power_law},
        {"A5", "detector array probabilities, N = 1", a5_array_n1},
        {"A6", "detector array agreement improves at N = 2", a6_array_n2},
        {"A7", "Born baseline of the central window", a7_baseline},
        {"A8", "equivariance of Born-sampled trajectories", a8_equivariance},
        {"A9", "excursion out of the detector and back", a9_excursion},
    };
    const std::set<std::string> selected(only.begin(), only.end());

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.contains(c.id)) continue;
        Verdict v;
        try {
            v = c.check(ctx);
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failures;
        std::printf("%s %s  %s: %s\n", c.id, v.pass ? "PASS" : "FAIL", c.title, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}
