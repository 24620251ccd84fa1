#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "bohm/ensemble.hpp"

using namespace bohm;

namespace {

double analytic_well_probability(double a, double b, double L) {
    auto F = [L](double x) { return (x / 2 + L / (2 * std::numbers::pi) * std::sin(std::numbers::pi * x / L)) / L; };
    return F(b) - F(a);
}

SimConfig<double> central_detector(int dof_count = 1) {
    SimConfig<double> c;
    Detector<double> d;
    d.dof_count = dof_count;
    c.detectors = DetectorArray<double>({d});
    c.r0 = 0.5;
    return c;
}

ScanEntry entry_with(OutcomeKind kind, int detector, double weight, Index node) {
    ScanEntry e;
    e.node = node;
    e.weight = weight;
    e.outcome.kind = kind;
    e.outcome.detector_index = detector;
    return e;
}

bool same_report(const EnsembleReport& a, const EnsembleReport& b) {
    return a.p == b.p && a.p0 == b.p0 && a.centers == b.centers && a.p_no_detection == b.p_no_detection &&
           a.p_absorbed == b.p_absorbed && a.p_timeout == b.p_timeout;
}

}  // namespace

TEST_CASE("power-law fit") {
    SUBCASE("exact power law") {
        const std::array<double, 5> n{2, 4, 6, 8, 10};
        std::array<double, 5> t{};
        for (std::size_t i = 0; i < n.size(); ++i) t[i] = 7.0 * std::pow(n[i], -2.0);
        const auto fit = fit_power_law(n, t);
        CHECK(std::abs(fit.slope + 2.0) < 1e-12);
        CHECK(std::abs(fit.intercept - std::log(7.0)) < 1e-12);
        CHECK(std::abs(fit.residual) < 1e-12);
    }
    SUBCASE("least-squares optimality") {
        const std::array<double, 6> x{1, 2, 3, 5, 8, 13};
        const std::array<double, 6> y{3.1, 2.2, 1.9, 1.2, 0.95, 0.61};
        const auto fit = fit_power_law(x, y);
        auto rss = [&](double s, double c) {
            double r = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double e = std::log(y[i]) - (c + s * std::log(x[i]));
                r += e * e;
            }
            return r;
        };
        CHECK(fit.residual == doctest::Approx(rss(fit.slope, fit.intercept)).epsilon(1e-12));
        for (double ds : {-1e-3, 1e-3}) {
            for (double dc : {-1e-3, 0.0, 1e-3}) CHECK(rss(fit.slope + ds, fit.intercept + dc) > fit.residual);
        }
    }
    SUBCASE("preconditions") {
        const std::array<double, 1> one{2};
        CHECK_THROWS_AS(fit_power_law(one, one), std::invalid_argument);
        const std::array<double, 2> x{1, 2}, bad{1, -1}, same{3, 3};
        CHECK_THROWS_AS(fit_power_law(x, bad), std::invalid_argument);
        CHECK_THROWS_AS(fit_power_law(same, x), std::invalid_argument);
        const std::array<double, 3> three{1, 2, 3};
        CHECK_THROWS_AS(fit_power_law(x, three), std::invalid_argument);
    }
}

TEST_CASE("collapse scaling needs every point collapsed") {
    std::vector<CollapseTimePoint> pts{{2, OutcomeKind::collapsed, 1000, 2.5}, {4, OutcomeKind::timeout, 2000, 5.0}};
    CHECK_THROWS_AS(fit_collapse_scaling(pts), std::invalid_argument);
    pts[1] = {4, OutcomeKind::collapsed, 250, 0.625};
    const auto s = fit_collapse_scaling(pts);
    CHECK(s.time_units.slope == doctest::Approx(-2.0));
    CHECK(s.step_units.slope == doctest::Approx(-2.0));
    CHECK(s.step_units.intercept - s.time_units.intercept == doctest::Approx(-std::log(0.0025)));
}

TEST_CASE("Born baseline") {
    SimConfig<double> c;
    c.detectors = partition_array(10.0, 10, Detector<double>{});
    const auto grid = c.grid();
    const auto psi = ground_state(grid, 1.0, c.dt);
    const auto p0 = qm_baseline(psi, c.detectors, grid);
    REQUIRE(p0.size() == 10);
    CHECK(std::abs(p0[9] - analytic_well_probability(8.0, 10.0, 10.0)) < 2e-3);
    CHECK(std::abs(p0[9] - 0.00645) < 2e-3);
    double sum = 0;
    for (double p : p0) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-6);
    for (std::size_t i = 0; i < 5; ++i) CHECK(p0[i] == doctest::Approx(p0[9 - i]).epsilon(1e-14));

    const DetectorArray<double> center({Detector<double>{}});
    const double pc = qm_baseline(psi, center, grid)[0];
    CHECK(std::abs(pc - analytic_well_probability(-1.0, 1.0, 10.0)) < 2e-3);
    CHECK(std::abs(pc - 0.198363) < 2e-3);
}

TEST_CASE("aggregation of outcomes") {
    SUBCASE("every run on one detector") {
        ScanResult scan;
        for (Index j = 0; j < 7; ++j) scan.entries.push_back(entry_with(OutcomeKind::collapsed, 3, 1.0 / 7, j));
        const auto r = detector_probabilities(scan, 5);
        CHECK(r.p[3] == doctest::Approx(1.0).epsilon(1e-15));
        for (std::size_t i : {0u, 1u, 2u, 4u}) CHECK(r.p[i] == 0.0);
        CHECK(std::abs(r.total_mass() - 1.0) < 1e-12);
    }
    SUBCASE("mixed outcomes and total variation") {
        ScanResult scan;
        scan.entries = {entry_with(OutcomeKind::collapsed, 0, 0.5, 0), entry_with(OutcomeKind::collapsed, 1, 0.2, 1),
                        entry_with(OutcomeKind::absorbed, -1, 0.1, 2), entry_with(OutcomeKind::timeout, -1, 0.15, 3),
                        entry_with(OutcomeKind::no_detection, -1, 0.05, 4)};
        auto r = detector_probabilities(scan, 2);
        CHECK(r.p_absorbed == doctest::Approx(0.1));
        CHECK(r.p_timeout == doctest::Approx(0.15));
        CHECK(r.p_no_detection == doctest::Approx(0.05));
        CHECK(std::abs(r.total_mass() - 1.0) < 1e-12);
        r.p0 = {0.6, 0.4};
        CHECK(total_variation(r) == doctest::Approx(0.5 * (0.1 + 0.2) + 0.5 * 0.3));
        CHECK_THROWS_AS(detector_probabilities(scan, 1), std::out_of_range);
    }
}

TEST_CASE("scan weights") {
    SimConfig<double> c;
    Detector<double> far;
    far.center = 9.0;
    c.detectors = DetectorArray<double>({far});
    c.max_steps = 10;
    const auto scan = scan_r0(c, {.nodes = {10, 50, 99, 148, 188}});
    REQUIRE(scan.entries.size() == 5);
    double sum = 0;
    for (const auto& e : scan.entries) sum += e.weight;
    CHECK(std::abs(sum - 1.0) < 1e-14);
    CHECK(scan.entries[0].weight == scan.entries[4].weight);
    CHECK(scan.entries[1].weight == scan.entries[3].weight);
    CHECK(scan.entries[2].r0 == 0.0);

    CHECK_THROWS_AS(scan_r0(c, {.nodes = {3, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(scan_r0(c, {.nodes = {199}}), std::invalid_argument);
}

TEST_CASE("scan is independent of node order and thread count") {
    SimConfig<double> c;
    c.detectors = partition_array(10.0, 10, Detector<double>{});
    c.max_steps = 30000;
    std::vector<Index> nodes{5, 40, 77, 99, 120, 150, 193};
    const auto a = ensemble_report(scan_r0(c, {.nodes = nodes, .threads = 1}), c);
    std::mt19937 rng(3);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const auto b = ensemble_report(scan_r0(c, {.nodes = nodes, .threads = 3}), c);
    CHECK(same_report(a, b));
    CHECK(std::abs(a.total_mass() - 1.0) < 1e-12);
}

TEST_CASE("single window covering the well always collapses on it") {
    SimConfig<double> c;
    Detector<double> whole;
    whole.half_width = 10;
    c.detectors = DetectorArray<double>({whole});
    const auto r = ensemble_report(scan_r0(c), c);
    CHECK(r.p[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("central detector collapses exactly for starts inside it") {
    auto c = central_detector(1);
    const auto scan = scan_r0(c);
    for (const auto& e : scan.entries) {
        const double w = window(c.detectors[0], e.r0);
        CAPTURE(e.r0);
        if (w == 1.0) CHECK(e.outcome.kind == OutcomeKind::collapsed);
        if (w == 0.0) CHECK(e.outcome.kind == OutcomeKind::no_detection);
    }
    const auto r = ensemble_report(scan, c);
    CHECK(std::abs(r.total_mass() - 1.0) < 1e-12);
    CHECK(r.p[0] == doctest::Approx(r.p0[0]).epsilon(0.1));
}

TEST_CASE("collapse time experiment") {
    const auto base = central_detector();
    const std::array<int, 5> n{2, 4, 6, 8, 10};
    const auto pts = collapse_time_experiment(base, n, 2);
    REQUIRE(pts.size() == 5);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].kind == OutcomeKind::collapsed);
        CHECK(pts[i].dof_count == n[i]);
        if (i > 0) CHECK(pts[i].time < pts[i - 1].time);
    }

    const std::array<int, 1> one{1};
    const auto single = collapse_time_experiment(base, one)[0];
    const auto direct = run(base);
    CHECK(single.step == direct.step);
    CHECK(single.time == direct.time);

    auto strong = base;
    strong.detectors[0].coupling = 0.02;
    const auto faster = collapse_time_experiment(strong, one)[0];
    CHECK(faster.kind == OutcomeKind::collapsed);
    CHECK(faster.time < single.time);

    auto tight = base;
    tight.max_steps = 100;
    CHECK(collapse_time_experiment(tight, one)[0].kind == OutcomeKind::timeout);
}

TEST_CASE("two-detector suite") {
    const auto base = central_detector();
    const std::array<std::pair<double, double>, 2> pairs{{{-5.0, 5.0}, {0.0, 1.5}}};
    const auto runs = two_detector_suite(base, pairs, 2);
    double weight[2] = {0, 0};
    int right[2] = {0, 0};
    for (const auto& r : runs) {
        weight[r.scenario] += r.entry.weight;
        CHECK(r.entry.r0 > r.left_center - 1.0);
        CHECK(r.entry.r0 < r.left_center + 1.0);
        if (r.entry.outcome.collapsed() && r.entry.outcome.detector_index == 1) ++right[r.scenario];
    }
    CHECK(weight[0] == doctest::Approx(1.0));
    CHECK(weight[1] == doctest::Approx(1.0));
    // Far apart, the second detector plays no role.
    CHECK(right[0] == 0);
    // Close together, the collapse can move onto the right detector.
    CHECK(right[1] >= 1);
}

TEST_CASE("Born sampling") {
    const auto grid = make_grid(10.0, 199);
    const auto psi = ground_state(grid, 1.0, 0.0025);
    const auto a = sample_initial_positions(psi, grid, 4000, 42);
    const auto b = sample_initial_positions(psi, grid, 4000, 42);
    CHECK(a == b);
    CHECK(a != sample_initial_positions(psi, grid, 4000, 43));
    CHECK(ks_distance(a, psi, grid) < 0.03);
    for (double x : a) CHECK(std::abs(x) <= 10.0);

    std::vector<double> lopsided(1000, 5.0);
    CHECK(ks_distance(lopsided, psi, grid) > 0.5);

    SimConfig<double> c;
    Detector<double> far;
    far.center = 9.0;
    c.detectors = DetectorArray<double>({far});
    c.max_steps = 10;
    const auto scan = scan_sampled(c, 50, 9);
    REQUIRE(scan.entries.size() == 50);
    for (const auto& e : scan.entries) {
        CHECK(e.weight == doctest::Approx(1.0 / 50));
        CHECK(std::abs(grid.x(e.node) - e.r0) <= 0.05 + 1e-12);
    }
}
