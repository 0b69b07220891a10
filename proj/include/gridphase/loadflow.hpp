#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridphase/grid_model.hpp"

namespace gridphase {

struct LoadflowOptions {
  double tolerance_pu = 1e-6;     // max voltage change between sweeps
  int max_iterations = 100;
  double collapse_floor_pu = 0.5; // below this magnitude the solve aborts as collapse
};

enum class LoadflowStatus { Converged, MaxIterationsExceeded, VoltageCollapse };

struct LoadflowResult {
  LoadflowStatus status = LoadflowStatus::Converged;
  bool converged = false;
  int iterations = 0;
  std::vector<std::array<Complex, 3>> bus_voltages_v;      // phase-to-neutral, per local bus
  std::vector<std::array<Complex, 3>> segment_currents_a;  // current into bus b from its parent
  double line_losses_kw = 0.0;
  Complex line_losses_kva{};            // complex series losses (kW + j kvar)
  std::array<Complex, 3> slack_power_kva{};  // per-phase complex power injected at the slack
  double total_load_kw = 0.0;           // sum of committed active power
  std::vector<double> mismatch_history_pu;
};

// Unbalanced radial load flow: currents are accumulated leaf-to-root from
// constant-power loads, voltages updated root-to-leaf, until the largest
// voltage change falls below tolerance.
LoadflowResult solve_feeder(const FeederModel& model, const PhaseAllocation& alloc,
                            const SlotFlows& flows, const LoadflowOptions& options = {});

// Voltage unbalance factor, percent: 100*|V2|/|V1| from the symmetrical
// components of the three phase-to-neutral phasors.
// Throws std::domain_error when the positive-sequence magnitude vanishes.
double compute_vuf_percent(const std::array<Complex, 3>& v);

struct VufProfile {
  std::vector<double> per_bus_percent;
  double max_percent = 0.0;
  int argmax_bus = 0;
};

// VUF at every bus of a converged result. Throws std::invalid_argument when
// the result did not converge.
VufProfile feeder_vuf_profile(const LoadflowResult& result);

struct VoltageExtremes {
  double min_pu = 0.0;
  double max_pu = 0.0;
};

VoltageExtremes voltage_extremes(const LoadflowResult& result,
                                 double nominal_v = kDefaultNominalVoltage);

// Per-slot transformer-level sample used by the horizon report.
struct SlotPowerSample {
  double line_losses_kw = 0.0;
  double net_transformer_kw = 0.0;  // signed net active power through the transformer
  bool converged = true;
};

struct LossesReport {
  double line_losses_kwh = 0.0;
  double transformer_energy_kwh = 0.0;  // sum of |net| per slot, import and export both transit
  double peak_transformer_kw = 0.0;
  int excluded_slots = 0;  // unconverged slots left out of the energies
};

LossesReport losses_report(const std::vector<SlotPowerSample>& slots,
                           double slot_hours = kSlotHours);

}  // namespace gridphase
