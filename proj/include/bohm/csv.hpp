#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "bohm/ensemble.hpp"

namespace bohm {

/// Shortest-form `%.<precision>g` rendering used by every writer.
std::string format_number(double value, int precision);

/// Time series of one run: step,t,r,y_0..y_{D-1},P_0..P_{D-1}.
std::string run_csv(const TimeSeries<double>& series, int precision = 12);
void emit_run_csv(const TimeSeries<double>& series, const RunOutcome<double>& outcome,
                  const std::filesystem::path& path, int precision = 12);

/// One row: kind,detector_index,side,step,t,r_final,norm_drift,max_abs_vdet,r_min,r_max.
std::string outcome_csv(const RunOutcome<double>& outcome, int precision = 12);

/// Long format density snapshots: step,t,x,rho.
std::string density_csv(const TimeSeries<double>& series, const Grid<double>& grid, int precision = 12);

/// detector_index,x0,p_n,p_n0 per detector, then
/// `summary,<p_no_detection>,<p_absorbed>,<p_timeout>`.
std::string report_csv(const EnsembleReport& report, int precision = 12);
void emit_report_csv(const EnsembleReport& report, const std::filesystem::path& path, int precision = 12);
EnsembleReport parse_report_csv(std::string_view text);

/// node,r0,weight,outcome,detector_index,step,t
std::string scan_csv(const ScanResult& scan, int precision = 12);

/// N,outcome,step,t
std::string nsweep_csv(std::span<const CollapseTimePoint> points, int precision = 12);

/// units,slope,intercept,residual with rows `time` and `steps`.
std::string fit_csv(const CollapseScaling& scaling, int precision = 12);

/// detector_index,x0,p_n0
std::string baseline_csv(const DetectorArray<double>& dets, std::span<const double> p0, int precision = 12);

/// Writes `content` to `path`, creating parent directories. Throws on I/O failure.
void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace bohm
