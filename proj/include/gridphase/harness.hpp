#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridphase/grid_model.hpp"
#include "gridphase/loadflow.hpp"
#include "gridphase/market.hpp"
#include "gridphase/report.hpp"
#include "gridphase/selection.hpp"

namespace gridphase {

enum class SelectionStrategy { MeanBased, Haf, Hybrid };
enum class AllocationStrategy { None, Static, Dynamic };

std::string to_string(SelectionStrategy s);
std::string to_string(AllocationStrategy s);
SelectionStrategy selection_from_string(const std::string& text);
AllocationStrategy allocation_from_string(const std::string& text);

enum class PlacementMode { FromNetworkFile, Seeded, File };
enum class VoltageProbe { FarthestLoadedBus, FeederAverage };

struct ScenarioConfig {
  std::string name = "scenario";
  std::string network_path;
  PlacementMode placement_mode = PlacementMode::FromNetworkFile;
  std::string placement_path;
  std::optional<double> pv_fraction;       // validated against the placement when set
  std::optional<double> battery_fraction;
  int switch_budget = 0;
  SelectionStrategy selection = SelectionStrategy::MeanBased;
  AllocationStrategy allocation = AllocationStrategy::None;
  int horizon_days = 6;
  std::uint64_t seed = 1;
  TouTariff tariff;
  BatteryParams battery;
  ProfileParams profiles;
  std::string load_profiles_csv;  // optional: replaces synthetic loads
  std::string pv_profile_csv;     // optional: replaces the synthetic PV curve
  VoltageProbe voltage_probe = VoltageProbe::FarthestLoadedBus;
  bool include_background_in_target = false;  // fold non-participant flows into the balance goal
  int max_switches_per_slot = 0;              // 0 = unlimited
  bool verbose_voltages = false;              // emit per-slot bus/phase voltage rows
  LoadflowOptions loadflow;
};

// Reads a scenario JSON (strict schema, see docs/formats.md). Relative paths
// inside the file resolve against the file's directory.
ScenarioConfig load_scenario(const std::string& path);

// Full pipeline: profiles -> battery schedules -> switching strategy ->
// per-slot load flows -> aggregated metrics. Deterministic for a fixed
// config and seed.
MetricsReport run_scenario(const ScenarioConfig& config);

// Runs every config and tabulates deltas against the single allocation=none
// baseline among them. Throws when horizons differ or the baseline is not
// exactly one config.
StrategyComparison compare_strategies(const std::vector<ScenarioConfig>& configs);

// Same tabulation from already computed reports.
StrategyComparison compare_reports(const std::vector<MetricsReport>& reports);

struct EconomicSummary {
  double losses_saved_mwh_per_year = 0.0;
  double value_eur_per_year = 0.0;
};

// Annualized value of the loss reduction of `treatment` vs `baseline`.
EconomicSummary economic_summary(const MetricsReport& baseline, const MetricsReport& treatment,
                                 double price_eur_per_mwh = 40.0);

inline double economic_value_eur(double mwh_per_year, double eur_per_mwh) {
  return mwh_per_year * eur_per_mwh;
}

// Exposed for tests: the context the selection heuristics receive, computed
// from a baseline (no switching) pass over the horizon.
SelectionContext build_selection_context(const NetworkModel& net,
                                         const std::vector<Profile>& net_flows,
                                         const ScenarioConfig& config);

// Applies the config's placement mode to a freshly loaded network roster.
void apply_der_placement(NetworkModel& net, const ScenarioConfig& config);

}  // namespace gridphase
