// Command-line driver: one subcommand per experiment family.
//
//   bohm_collapse run      --config run.cfg --out out/
//   bohm_collapse scan     --config array.cfg --out out/ --threads 8
//   bohm_collapse nsweep   --config sweep.cfg --out out/
//   bohm_collapse baseline --config array.cfg --out out/
//   bohm_collapse suite    --config suite.cfg --out out/
//
// Exit codes: 0 success, 1 validation error, 2 runtime or numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bohm/config.hpp"
#include "bohm/csv.hpp"
#include "bohm/ensemble.hpp"

namespace fs = std::filesystem;
using namespace bohm;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> record_every;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key = value configuration file (defaults if omitted)");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--threads", flags.threads, "worker threads for independent runs")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", flags.seed, "RNG seed (sampling mode only)");
    cmd->add_option("--record-every", flags.record_every, "time-series sampling stride in steps")
        ->check(CLI::NonNegativeNumber);
}

ExperimentSpec load_spec(const CommonFlags& flags, ExperimentKind kind) {
    ExperimentSpec spec = flags.config_path.empty() ? parse_config("") : load_config(flags.config_path);
    spec.kind = kind;
    if (flags.out) spec.output_directory = *flags.out;
    if (flags.threads) spec.threads = *flags.threads;
    if (flags.seed) spec.seed = *flags.seed;
    if (flags.record_every) spec.sim.record_every = *flags.record_every;
    return spec;
}

bool numerically_healthy(const RunOutcome<double>& o) {
    const auto& d = o.diagnostics;
    return std::isfinite(d.max_norm_drift) && std::isfinite(o.realization.position) &&
           std::isfinite(d.max_abs_detector_potential);
}

void print_diagnostics(const RunOutcome<double>& o) {
    const auto& d = o.diagnostics;
    std::cerr << "  norm drift " << d.max_norm_drift << ", max |Vdet| " << d.max_abs_detector_potential
              << ", r range [" << d.r_min << ", " << d.r_max << "]\n";
}

int cmd_run(const ExperimentSpec& spec) {
    const fs::path dir = spec.output_directory;
    const RunOutcome<double> o = run(spec.sim);
    write_text(dir / "outcome.csv", outcome_csv(o, spec.csv_precision));
    if (!o.series.empty()) emit_run_csv(o.series, o, dir / "run.csv", spec.csv_precision);
    if (!o.series.density_steps.empty()) {
        write_text(dir / "density.csv", density_csv(o.series, spec.sim.grid(), spec.csv_precision));
    }
    std::cout << to_string(o.kind);
    if (o.collapsed()) std::cout << " on detector " << o.detector_index;
    std::cout << " at step " << o.step << " (t = " << o.time << ")\n";
    if (!numerically_healthy(o)) {
        std::cerr << "numerical failure\n";
        print_diagnostics(o);
        return kExitRuntime;
    }
    return 0;
}

int cmd_scan(const ExperimentSpec& spec) {
    const fs::path dir = spec.output_directory;
    ScanResult scan;
    if (spec.sampling_count > 0) {
        scan = scan_sampled(spec.sim, spec.sampling_count, spec.seed, spec.threads);
    } else {
        ScanOptions options;
        options.nodes = spec.scan_nodes;
        options.threads = spec.threads;
        scan = scan_r0(spec.sim, options);
    }
    const EnsembleReport report = ensemble_report(scan, spec.sim);
    write_text(dir / "scan.csv", scan_csv(scan, spec.csv_precision));
    emit_report_csv(report, dir / "report.csv", spec.csv_precision);

    for (std::size_t i = 0; i < report.p.size(); ++i) {
        std::cout << "detector " << i << "  x0 = " << report.centers[i] << "  p = " << report.p[i]
                  << "  p0 = " << report.p0[i] << '\n';
    }
    std::cout << "no detection " << report.p_no_detection << ", absorbed " << report.p_absorbed << ", timeout "
              << report.p_timeout << "\ntotal variation " << total_variation(report) << '\n';
    for (const auto& e : scan.entries) {
        if (!numerically_healthy(e.outcome)) {
            std::cerr << "numerical failure at r0 = " << e.r0 << '\n';
            print_diagnostics(e.outcome);
            return kExitRuntime;
        }
    }
    return 0;
}

int cmd_nsweep(const ExperimentSpec& spec) {
    const fs::path dir = spec.output_directory;
    const auto points = collapse_time_experiment(spec.sim, spec.n_values, spec.threads);
    write_text(dir / "nsweep.csv", nsweep_csv(points, spec.csv_precision));
    for (const auto& p : points) {
        std::cout << "N = " << p.dof_count << "  " << to_string(p.kind) << "  step " << p.step << "  t = " << p.time
                  << '\n';
    }
    CollapseScaling scaling;
    try {
        scaling = fit_collapse_scaling(points);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    write_text(dir / "fit.csv", fit_csv(scaling, spec.csv_precision));
    std::cout << "ln t_c = " << scaling.time_units.intercept << " + " << scaling.time_units.slope << " ln N\n"
              << "ln steps = " << scaling.step_units.intercept << " + " << scaling.step_units.slope << " ln N\n";
    return 0;
}

int cmd_baseline(const ExperimentSpec& spec) {
    const Grid<double> grid = spec.sim.grid();
    const auto p0 = qm_baseline(ground_state(grid, spec.sim.mass, spec.sim.dt), spec.sim.detectors, grid);
    write_text(fs::path(spec.output_directory) / "baseline.csv",
               baseline_csv(spec.sim.detectors, p0, spec.csv_precision));
    for (std::size_t i = 0; i < p0.size(); ++i) {
        std::cout << "detector " << i << "  x0 = " << spec.sim.detectors[i].center << "  p0 = " << p0[i] << '\n';
    }
    return 0;
}

int cmd_suite(const ExperimentSpec& spec) {
    const auto runs = two_detector_suite(spec.sim, spec.suite_pairs, spec.threads);
    std::string csv = "scenario,x0_left,x0_right,r0,weight,outcome,detector_index,step,t\n";
    std::vector<int> migrated(spec.suite_pairs.size(), 0);
    for (const auto& r : runs) {
        const auto& o = r.entry.outcome;
        const int p = spec.csv_precision;
        csv += std::to_string(r.scenario) + ',' + format_number(r.left_center, p) + ',' +
               format_number(r.right_center, p) + ',' + format_number(r.entry.r0, p) + ',' +
               format_number(r.entry.weight, p) + ',' + to_string(o.kind) + ',' + std::to_string(o.detector_index) +
               ',' + std::to_string(o.step) + ',' + format_number(o.time, p) + '\n';
        if (o.collapsed() && o.detector_index == 1) ++migrated[r.scenario];
    }
    write_text(fs::path(spec.output_directory) / "suite.csv", csv);
    for (std::size_t s = 0; s < spec.suite_pairs.size(); ++s) {
        std::cout << "scenario " << s << "  left " << spec.suite_pairs[s].first << "  right "
                  << spec.suite_pairs[s].second << "  collapses on the right detector: " << migrated[s] << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamical wavefunction collapse in a square well with classical-pointer detectors"};
    app.require_subcommand(1);

    struct Command {
        const char* name;
        const char* help;
        ExperimentKind kind;
        int (*action)(const ExperimentSpec&);
    };
    const Command commands[] = {
        {"run", "single coupled run", ExperimentKind::single_run, cmd_run},
        {"scan", "scan r0 over the grid and aggregate detector probabilities", ExperimentKind::scan, cmd_scan},
        {"nsweep", "collapse time versus detector degrees of freedom", ExperimentKind::n_sweep, cmd_nsweep},
        {"baseline", "Born-rule probabilities of the detector windows", ExperimentKind::baseline, cmd_baseline},
        {"suite", "two-detector scenarios", ExperimentKind::two_detector_suite, cmd_suite},
    };
    CommonFlags flags;
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common_flags(sub, flags);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        ExperimentSpec spec;
        try {
            spec = load_spec(flags, commands[i].kind);
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return kExitValidation;
        }
        try {
            return commands[i].action(spec);
        } catch (const std::invalid_argument& e) {
            std::cerr << "invalid configuration: " << e.what() << '\n';
            return kExitValidation;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitRuntime;
        }
    }
    return kExitValidation;
}
