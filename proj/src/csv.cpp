#include "bohm/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bohm {

std::string format_number(double value, int precision) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    return std::string(buf, static_cast<std::size_t>(n));
}

namespace {

class Row {
public:
    explicit Row(int precision) : precision_(precision) {}

    Row& operator<<(double v) { return field(format_number(v, precision_)); }
    Row& operator<<(std::int64_t v) { return field(std::to_string(v)); }
    Row& operator<<(int v) { return field(std::to_string(v)); }
    Row& operator<<(std::string_view v) { return field(std::string(v)); }

    void end(std::string& out) {
        out += line_;
        out += '\n';
        line_.clear();
    }

private:
    Row& field(const std::string& s) {
        if (!line_.empty()) line_ += ',';
        line_ += s;
        return *this;
    }

    int precision_;
    std::string line_;
};

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

double to_double(std::string_view s) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error("report csv: malformed number '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::string run_csv(const TimeSeries<double>& series, int precision) {
    const std::size_t n_det = series.y.size();
    std::string out;
    Row row(precision);
    row << "step" << "t" << "r";
    for (std::size_t i = 0; i < n_det; ++i) row << "y_" + std::to_string(i);
    for (std::size_t i = 0; i < n_det; ++i) row << "P_" + std::to_string(i);
    row.end(out);
    for (std::size_t k = 0; k < series.samples(); ++k) {
        row << series.steps[k] << static_cast<double>(series.steps[k]) * series.dt << series.r[k];
        for (std::size_t i = 0; i < n_det; ++i) row << series.y[i][k];
        for (std::size_t i = 0; i < n_det; ++i) row << series.probability[i][k];
        row.end(out);
    }
    return out;
}

void emit_run_csv(const TimeSeries<double>& series, const RunOutcome<double>& outcome,
                  const std::filesystem::path& path, int precision) {
    if (series.empty()) throw std::invalid_argument("emit_run_csv: run has no recorded samples");
    if (series.steps.back() != outcome.step) {
        throw std::invalid_argument("emit_run_csv: series does not end at the terminal step");
    }
    write_text(path, run_csv(series, precision));
}

std::string outcome_csv(const RunOutcome<double>& outcome, int precision) {
    std::string out;
    Row row(precision);
    row << "kind" << "detector_index" << "side" << "step" << "t" << "r_final" << "norm_drift"
        << "max_abs_vdet" << "r_min" << "r_max";
    row.end(out);
    const auto& d = outcome.diagnostics;
    row << to_string(outcome.kind) << outcome.detector_index
        << (outcome.kind == OutcomeKind::absorbed ? (outcome.side == WallSide::left ? "left" : "right") : "")
        << outcome.step << outcome.time << outcome.realization.position << d.max_norm_drift
        << d.max_abs_detector_potential << d.r_min << d.r_max;
    row.end(out);
    return out;
}

std::string density_csv(const TimeSeries<double>& series, const Grid<double>& grid, int precision) {
    std::string out;
    Row row(precision);
    row << "step" << "t" << "x" << "rho";
    row.end(out);
    for (std::size_t k = 0; k < series.density_steps.size(); ++k) {
        const auto& rho = series.density_snapshots[k];
        for (Index j = 0; j < rho.size(); ++j) {
            row << series.density_steps[k] << static_cast<double>(series.density_steps[k]) * series.dt
                << grid.x(j) << rho[j];
            row.end(out);
        }
    }
    return out;
}

std::string report_csv(const EnsembleReport& report, int precision) {
    if (report.p0.size() != report.p.size() || report.centers.size() != report.p.size()) {
        throw std::invalid_argument("report_csv: report lacks centers or baseline");
    }
    std::string out;
    Row row(precision);
    row << "detector_index" << "x0" << "p_n" << "p_n0";
    row.end(out);
    for (std::size_t i = 0; i < report.p.size(); ++i) {
        row << static_cast<int>(i) << report.centers[i] << report.p[i] << report.p0[i];
        row.end(out);
    }
    row << "summary" << report.p_no_detection << report.p_absorbed << report.p_timeout;
    row.end(out);
    return out;
}

void emit_report_csv(const EnsembleReport& report, const std::filesystem::path& path, int precision) {
    write_text(path, report_csv(report, precision));
}

EnsembleReport parse_report_csv(std::string_view text) {
    EnsembleReport report;
    std::size_t start = 0;
    std::size_t line_no = 0;
    bool summary_seen = false;
    while (start < text.size()) {
        const auto end = text.find('\n', start);
        const std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
        start = end == std::string_view::npos ? text.size() : end + 1;
        ++line_no;
        if (line_no == 1) {
            if (line != "detector_index,x0,p_n,p_n0") throw std::runtime_error("report csv: unexpected header");
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 4) throw std::runtime_error("report csv: line " + std::to_string(line_no) + " needs 4 fields");
        if (summary_seen) throw std::runtime_error("report csv: rows after the summary row");
        if (f[0] == "summary") {
            report.p_no_detection = to_double(f[1]);
            report.p_absorbed = to_double(f[2]);
            report.p_timeout = to_double(f[3]);
            summary_seen = true;
            continue;
        }
        if (to_double(f[0]) != static_cast<double>(report.p.size())) {
            throw std::runtime_error("report csv: detector rows out of order");
        }
        report.centers.push_back(to_double(f[1]));
        report.p.push_back(to_double(f[2]));
        report.p0.push_back(to_double(f[3]));
    }
    if (!summary_seen) throw std::runtime_error("report csv: missing summary row");
    return report;
}

std::string scan_csv(const ScanResult& scan, int precision) {
    std::string out;
    Row row(precision);
    row << "node" << "r0" << "weight" << "outcome" << "detector_index" << "step" << "t";
    row.end(out);
    for (const auto& e : scan.entries) {
        row << static_cast<std::int64_t>(e.node) << e.r0 << e.weight << to_string(e.outcome.kind)
            << e.outcome.detector_index << e.outcome.step << e.outcome.time;
        row.end(out);
    }
    return out;
}

std::string nsweep_csv(std::span<const CollapseTimePoint> points, int precision) {
    std::string out;
    Row row(precision);
    row << "N" << "outcome" << "step" << "t";
    row.end(out);
    for (const auto& p : points) {
        row << p.dof_count << to_string(p.kind) << p.step << p.time;
        row.end(out);
    }
    return out;
}

std::string fit_csv(const CollapseScaling& scaling, int precision) {
    std::string out;
    Row row(precision);
    row << "units" << "slope" << "intercept" << "residual";
    row.end(out);
    row << "time" << scaling.time_units.slope << scaling.time_units.intercept << scaling.time_units.residual;
    row.end(out);
    row << "steps" << scaling.step_units.slope << scaling.step_units.intercept << scaling.step_units.residual;
    row.end(out);
    return out;
}

std::string baseline_csv(const DetectorArray<double>& dets, std::span<const double> p0, int precision) {
    std::string out;
    Row row(precision);
    row << "detector_index" << "x0" << "p_n0";
    row.end(out);
    for (std::size_t i = 0; i < dets.size(); ++i) {
        row << static_cast<int>(i) << dets[i].center << p0[i];
        row.end(out);
    }
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace bohm
