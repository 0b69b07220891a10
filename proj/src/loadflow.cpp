#include "gridphase/loadflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridphase {

namespace {

// Per-phase complex load of each bus, from the committed house flows.
// S = P + jQ with Q = P*tan(acos(pf)), everything in watts here.
std::vector<std::array<Complex, 3>> bus_loads_va(const FeederModel& model,
                                                 const PhaseAllocation& alloc,
                                                 const SlotFlows& flows) {
  std::vector<std::array<Complex, 3>> loads(model.buses.size(), {Complex{}, Complex{}, Complex{}});
  for (const auto& fh : model.houses) {
    if (fh.house < 0 || fh.house >= static_cast<int>(flows.per_house_kw.size())) {
      throw std::out_of_range("flows missing entry for household index " +
                              std::to_string(fh.house));
    }
    auto phase = alloc.phase_of(fh.house);
    if (!phase) {
      throw std::invalid_argument("allocation column invalid for household index " +
                                  std::to_string(fh.house));
    }
    double p_w = flows.per_house_kw[fh.house] * 1e3;
    double q_w = p_w * std::tan(std::acos(std::clamp(fh.power_factor, 1e-9, 1.0)));
    loads[fh.bus][static_cast<int>(*phase)] += Complex(p_w, q_w);
  }
  return loads;
}

}  // namespace

LoadflowResult solve_feeder(const FeederModel& model, const PhaseAllocation& alloc,
                            const SlotFlows& flows, const LoadflowOptions& options) {
  const int n = static_cast<int>(model.buses.size());
  LoadflowResult result;
  result.bus_voltages_v.assign(n, model.slack_voltage_v);  // flat start
  result.segment_currents_a.assign(n, {Complex{}, Complex{}, Complex{}});

  const auto loads = bus_loads_va(model, alloc, flows);
  for (const auto& bus_load : loads) {
    for (int i = 0; i < 3; ++i) result.total_load_kw += bus_load[i].real() * 1e-3;
  }

  auto& v = result.bus_voltages_v;
  std::vector<std::array<Complex, 3>> inj(n);  // subtree currents during the backward pass
  const double collapse_floor_v = options.collapse_floor_pu * model.nominal_voltage_v;

  // One backward pass: load currents from the given voltages, accumulated
  // leaf to root. Bus ordering guarantees children have larger indices.
  auto backward = [&]() {
    for (int b = 0; b < n; ++b) {
      for (int i = 0; i < 3; ++i) {
        const Complex s = loads[b][i];
        inj[b][i] = (s == Complex{}) ? Complex{} : std::conj(s / v[b][i]);
      }
    }
    for (int b = n - 1; b >= 1; --b) {
      for (int i = 0; i < 3; ++i) inj[model.buses[b].parent][i] += inj[b][i];
      result.segment_currents_a[b] = inj[b];
    }
  };

  bool collapsed = false;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    backward();

    double mismatch_v = 0.0;
    for (int b = 1; b < n; ++b) {
      const Bus& bus = model.buses[b];
      const auto& i_seg = result.segment_currents_a[b];
      const Complex i_neutral = i_seg[0] + i_seg[1] + i_seg[2];
      for (int i = 0; i < 3; ++i) {
        Complex next = v[bus.parent][i] - bus.to_parent.phase_ohm[i] * i_seg[i] -
                       bus.to_parent.neutral_ohm * i_neutral;
        mismatch_v = std::max(mismatch_v, std::abs(next - v[b][i]));
        v[b][i] = next;
        if (std::abs(next) < collapse_floor_v) collapsed = true;
      }
    }

    result.iterations = iter;
    result.mismatch_history_pu.push_back(mismatch_v / model.nominal_voltage_v);
    if (collapsed) {
      result.status = LoadflowStatus::VoltageCollapse;
      result.converged = false;
      return result;
    }
    if (result.mismatch_history_pu.back() < options.tolerance_pu) {
      result.converged = true;
      result.status = LoadflowStatus::Converged;
      break;
    }
  }
  if (!result.converged) {
    result.status = LoadflowStatus::MaxIterationsExceeded;
    return result;
  }

  // Final backward pass against the converged voltages, so reported currents,
  // losses and slack power are consistent with the committed powers.
  backward();

  std::array<Complex, 3> head{};  // current leaving the slack per phase
  for (int b = 1; b < n; ++b) {
    const Bus& bus = model.buses[b];
    const auto& i_seg = result.segment_currents_a[b];
    const Complex i_neutral = i_seg[0] + i_seg[1] + i_seg[2];
    for (int i = 0; i < 3; ++i) {
      result.line_losses_kva += bus.to_parent.phase_ohm[i] * std::norm(i_seg[i]) * 1e-3;
      if (bus.parent == 0) head[i] += i_seg[i];
    }
    result.line_losses_kva += bus.to_parent.neutral_ohm * std::norm(i_neutral) * 1e-3;
  }
  result.line_losses_kw = result.line_losses_kva.real();
  for (int i = 0; i < 3; ++i) {
    result.slack_power_kva[i] = model.slack_voltage_v[i] * std::conj(head[i]) * 1e-3;
  }
  return result;
}

double compute_vuf_percent(const std::array<Complex, 3>& v) {
  const Complex alpha = std::polar(1.0, 2.0 * M_PI / 3.0);
  const Complex v1 = (v[0] + alpha * v[1] + alpha * alpha * v[2]) / 3.0;
  const Complex v2 = (v[0] + alpha * alpha * v[1] + alpha * v[2]) / 3.0;
  const double scale = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2]), 1.0});
  if (std::abs(v1) <= 1e-9 * scale) {
    throw std::domain_error("voltage unbalance undefined: positive-sequence magnitude is zero");
  }
  return 100.0 * std::abs(v2) / std::abs(v1);
}

VufProfile feeder_vuf_profile(const LoadflowResult& result) {
  if (!result.converged) {
    throw std::invalid_argument("VUF profile requires a converged load flow result");
  }
  VufProfile profile;
  profile.per_bus_percent.reserve(result.bus_voltages_v.size());
  for (std::size_t b = 0; b < result.bus_voltages_v.size(); ++b) {
    double vuf = compute_vuf_percent(result.bus_voltages_v[b]);
    if (vuf > profile.max_percent) {
      profile.max_percent = vuf;
      profile.argmax_bus = static_cast<int>(b);
    }
    profile.per_bus_percent.push_back(vuf);
  }
  return profile;
}

VoltageExtremes voltage_extremes(const LoadflowResult& result, double nominal_v) {
  VoltageExtremes extremes{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& bus : result.bus_voltages_v) {
    for (int i = 0; i < 3; ++i) {
      double pu = std::abs(bus[i]) / nominal_v;
      extremes.min_pu = std::min(extremes.min_pu, pu);
      extremes.max_pu = std::max(extremes.max_pu, pu);
    }
  }
  return extremes;
}

LossesReport losses_report(const std::vector<SlotPowerSample>& slots, double slot_hours) {
  LossesReport report;
  for (const auto& slot : slots) {
    if (!slot.converged) {
      ++report.excluded_slots;
      continue;
    }
    report.line_losses_kwh += slot.line_losses_kw * slot_hours;
    report.transformer_energy_kwh += std::abs(slot.net_transformer_kw) * slot_hours;
    report.peak_transformer_kw = std::max(report.peak_transformer_kw,
                                          std::abs(slot.net_transformer_kw));
  }
  return report;
}

}  // namespace gridphase
