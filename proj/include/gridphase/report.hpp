#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridphase {

// One row of the per-slot series, per feeder.
struct SlotFeederRecord {
  int slot = 0;
  int feeder = 0;  // index into MetricsReport::feeder_ids
  double peak_vuf_percent = 0.0;
  double min_v_pu = 0.0;
  double max_v_pu = 0.0;
  double line_losses_kw = 0.0;
  double net_power_kw = 0.0;  // signed feeder-head active power
  int switches = 0;           // switch operations applied at this slot boundary
  bool converged = true;
};

// Long-format VUF sample for surface plots.
struct VufSurfaceRow {
  int slot = 0;
  int feeder = 0;
  int bus = 0;
  double vuf_percent = 0.0;
};

// Verbose per-phase voltage diagnostics, one row per slot/bus/phase.
struct VoltageRow {
  int slot = 0;
  int feeder = 0;
  int bus = 0;
  char phase = 'a';
  double v_mag = 0.0;
  double v_angle_deg = 0.0;
  double vuf_percent = 0.0;
};

struct MetricsReport {
  std::string scenario;
  std::string allocation;  // none | static | dynamic
  std::string selection;   // mb | haf | hybrid
  std::uint64_t seed = 0;
  int horizon_days = 0;
  int slots = 0;
  int switch_budget = 0;
  std::vector<std::string> feeder_ids;

  double peak_vuf_percent = 0.0;
  double mean_vuf_percent = 0.0;  // mean over slots of the per-slot network peak
  double min_v_pu = 0.0;
  double max_v_pu = 0.0;
  double line_losses_kwh = 0.0;
  double transformer_energy_kwh = 0.0;
  double peak_transformer_kw = 0.0;
  int switch_operations = 0;   // physical phase changes over the horizon
  int switches_installed = 0;  // dynamic switch devices deployed
  int unconverged_slots = 0;

  std::vector<SlotFeederRecord> series;
  std::vector<VufSurfaceRow> vuf_surface;
  std::vector<VoltageRow> voltage_rows;  // only filled in verbose runs

  // Dynamic runs: per-slot allocator optimum and the objective of keeping the
  // previous slot's allocation, summed over feeders.
  std::vector<double> allocator_objective;
  std::vector<double> keep_previous_objective;
};

enum class ReportFormat { Csv, Json, Both };

ReportFormat report_format_from_string(const std::string& text);

// Writes <name>_slots.csv, <name>_vuf_surface.csv and/or <name>_summary.json
// under out_dir and returns the written paths. Column order is fixed; see
// docs/formats.md.
std::vector<std::string> emit_report(const MetricsReport& report, ReportFormat format,
                                     const std::string& out_dir);

// Re-reads a summary written by emit_report. Series are CSV-only, so only the
// summary fields round-trip.
MetricsReport parse_summary_json(const std::string& path);

// Summary-field equality (exact, including doubles).
bool summary_equal(const MetricsReport& a, const MetricsReport& b);

struct ComparisonRow {
  std::string name;
  std::string allocation;
  std::string selection;
  int switch_budget = 0;
  bool is_baseline = false;
  double peak_vuf_percent = 0.0;
  double mean_vuf_percent = 0.0;
  double delta_peak_vuf = 0.0;   // vs baseline, negative is an improvement
  double delta_mean_vuf = 0.0;
  double delta_losses_kwh = 0.0;
  double delta_min_v_pu = 0.0;
  double delta_max_v_pu = 0.0;
  double transformer_energy_kwh = 0.0;
  double peak_transformer_kw = 0.0;
  int switch_operations = 0;
  int switches_installed = 0;
  bool exceeds_vuf_limit = false;
};

struct StrategyComparison {
  double vuf_limit_percent = 2.0;
  std::vector<ComparisonRow> rows;
};

std::vector<std::string> emit_comparison(const StrategyComparison& cmp, ReportFormat format,
                                         const std::string& out_dir,
                                         const std::string& name = "comparison");

std::string comparison_to_text(const StrategyComparison& cmp);

}  // namespace gridphase
