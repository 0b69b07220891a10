#include "gridphase/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gridphase/allocator.hpp"
#include "gridphase/network_io.hpp"
#include "gridphase/rng.hpp"

namespace gridphase {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw std::runtime_error(origin + ": " + what);
}

void check_fields(const json& obj, const std::set<std::string>& allowed,
                  const std::string& origin, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) {
      fail(origin, "unknown field \"" + it.key() + "\" in " + where);
    }
  }
}

std::string resolve_path(const std::filesystem::path& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p.string();
  return (base_dir / p).lexically_normal().string();
}

}  // namespace

std::string to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::MeanBased: return "mb";
    case SelectionStrategy::Haf: return "haf";
    case SelectionStrategy::Hybrid: return "hybrid";
  }
  return "?";
}

std::string to_string(AllocationStrategy s) {
  switch (s) {
    case AllocationStrategy::None: return "none";
    case AllocationStrategy::Static: return "static";
    case AllocationStrategy::Dynamic: return "dynamic";
  }
  return "?";
}

SelectionStrategy selection_from_string(const std::string& text) {
  if (text == "mb") return SelectionStrategy::MeanBased;
  if (text == "haf") return SelectionStrategy::Haf;
  if (text == "hybrid") return SelectionStrategy::Hybrid;
  throw std::invalid_argument("unknown selection strategy \"" + text + "\" (mb|haf|hybrid)");
}

AllocationStrategy allocation_from_string(const std::string& text) {
  if (text == "none") return AllocationStrategy::None;
  if (text == "static") return AllocationStrategy::Static;
  if (text == "dynamic") return AllocationStrategy::Dynamic;
  throw std::invalid_argument("unknown allocation strategy \"" + text +
                              "\" (none|static|dynamic)");
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(path, std::string("invalid JSON: ") + e.what());
  }
  check_fields(root,
               {"name", "network", "placement", "pv_fraction", "battery_fraction",
                "switch_budget", "selection", "allocation", "horizon_days", "seed", "tariff",
                "battery", "profiles", "load_profiles_csv", "pv_profile_csv", "voltage_probe",
                "include_background_in_target", "max_switches_per_slot", "verbose_voltages",
                "loadflow"},
               path, "scenario");

  const auto base_dir = std::filesystem::path(path).parent_path();
  ScenarioConfig cfg;
  if (root.contains("name")) cfg.name = root["name"].get<std::string>();
  if (!root.contains("network")) fail(path, "scenario needs a \"network\" path");
  cfg.network_path = resolve_path(base_dir, root["network"].get<std::string>());

  if (root.contains("placement")) {
    const auto& jp = root["placement"];
    check_fields(jp, {"mode", "path"}, path, "placement");
    const std::string mode = jp.at("mode").get<std::string>();
    if (mode == "network") {
      cfg.placement_mode = PlacementMode::FromNetworkFile;
    } else if (mode == "seeded") {
      cfg.placement_mode = PlacementMode::Seeded;
    } else if (mode == "file") {
      cfg.placement_mode = PlacementMode::File;
      if (!jp.contains("path")) fail(path, "placement mode \"file\" needs a path");
      cfg.placement_path = resolve_path(base_dir, jp["path"].get<std::string>());
    } else {
      fail(path, "unknown placement mode \"" + mode + "\" (network|seeded|file)");
    }
  }
  if (root.contains("pv_fraction")) cfg.pv_fraction = root["pv_fraction"].get<double>();
  if (root.contains("battery_fraction")) cfg.battery_fraction = root["battery_fraction"].get<double>();
  for (auto frac : {cfg.pv_fraction, cfg.battery_fraction}) {
    if (frac && (*frac < 0.0 || *frac > 1.0)) fail(path, "fractions must lie in [0, 1]");
  }
  if (root.contains("switch_budget")) cfg.switch_budget = root["switch_budget"].get<int>();
  if (cfg.switch_budget < 0) fail(path, "switch_budget must be non-negative");
  if (root.contains("selection")) cfg.selection = selection_from_string(root["selection"].get<std::string>());
  if (root.contains("allocation")) cfg.allocation = allocation_from_string(root["allocation"].get<std::string>());
  if (root.contains("horizon_days")) cfg.horizon_days = root["horizon_days"].get<int>();
  if (cfg.horizon_days < 0) fail(path, "horizon_days must be non-negative");
  if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();

  if (root.contains("tariff")) {
    const auto& jt = root["tariff"];
    check_fields(jt, {"low_cents_per_kwh", "high_cents_per_kwh", "high_start_hour", "high_end_hour"},
                 path, "tariff");
    if (jt.contains("low_cents_per_kwh")) cfg.tariff.low_cents_per_kwh = jt["low_cents_per_kwh"].get<double>();
    if (jt.contains("high_cents_per_kwh")) cfg.tariff.high_cents_per_kwh = jt["high_cents_per_kwh"].get<double>();
    if (jt.contains("high_start_hour")) cfg.tariff.high_start_hour = jt["high_start_hour"].get<int>();
    if (jt.contains("high_end_hour")) cfg.tariff.high_end_hour = jt["high_end_hour"].get<int>();
  }
  if (root.contains("battery")) {
    const auto& jb = root["battery"];
    check_fields(jb, {"capacity_kwh", "power_limit_kw", "initial_soc_kwh", "grid_charging"}, path,
                 "battery");
    if (jb.contains("capacity_kwh")) cfg.battery.capacity_kwh = jb["capacity_kwh"].get<double>();
    if (jb.contains("power_limit_kw")) cfg.battery.power_limit_kw = jb["power_limit_kw"].get<double>();
    if (jb.contains("initial_soc_kwh")) cfg.battery.initial_soc_kwh = jb["initial_soc_kwh"].get<double>();
    if (jb.contains("grid_charging")) cfg.battery.grid_charging = jb["grid_charging"].get<bool>();
  }
  if (root.contains("profiles")) {
    const auto& jp = root["profiles"];
    check_fields(jp,
                 {"base_min_kw", "base_max_kw", "morning_peak_min_kw", "morning_peak_max_kw",
                  "evening_peak_min_kw", "evening_peak_max_kw", "jitter_kw", "pv_kwh_per_day",
                  "pv_sunrise_hour", "pv_sunset_hour"},
                 path, "profiles");
    auto set = [&](const char* key, double& field) {
      if (jp.contains(key)) field = jp[key].get<double>();
    };
    set("base_min_kw", cfg.profiles.base_min_kw);
    set("base_max_kw", cfg.profiles.base_max_kw);
    set("morning_peak_min_kw", cfg.profiles.morning_peak_min_kw);
    set("morning_peak_max_kw", cfg.profiles.morning_peak_max_kw);
    set("evening_peak_min_kw", cfg.profiles.evening_peak_min_kw);
    set("evening_peak_max_kw", cfg.profiles.evening_peak_max_kw);
    set("jitter_kw", cfg.profiles.jitter_kw);
    set("pv_kwh_per_day", cfg.profiles.pv_kwh_per_day);
    set("pv_sunrise_hour", cfg.profiles.pv_sunrise_hour);
    set("pv_sunset_hour", cfg.profiles.pv_sunset_hour);
  }
  if (root.contains("load_profiles_csv")) {
    cfg.load_profiles_csv = resolve_path(base_dir, root["load_profiles_csv"].get<std::string>());
  }
  if (root.contains("pv_profile_csv")) {
    cfg.pv_profile_csv = resolve_path(base_dir, root["pv_profile_csv"].get<std::string>());
  }
  if (root.contains("voltage_probe")) {
    const std::string probe = root["voltage_probe"].get<std::string>();
    if (probe == "farthest_bus") cfg.voltage_probe = VoltageProbe::FarthestLoadedBus;
    else if (probe == "feeder_average") cfg.voltage_probe = VoltageProbe::FeederAverage;
    else fail(path, "unknown voltage_probe \"" + probe + "\" (farthest_bus|feeder_average)");
  }
  if (root.contains("include_background_in_target")) {
    cfg.include_background_in_target = root["include_background_in_target"].get<bool>();
  }
  if (root.contains("max_switches_per_slot")) {
    cfg.max_switches_per_slot = root["max_switches_per_slot"].get<int>();
  }
  if (root.contains("verbose_voltages")) {
    cfg.verbose_voltages = root["verbose_voltages"].get<bool>();
  }
  if (root.contains("loadflow")) {
    const auto& jl = root["loadflow"];
    check_fields(jl, {"tolerance_pu", "max_iterations", "collapse_floor_pu"}, path, "loadflow");
    if (jl.contains("tolerance_pu")) cfg.loadflow.tolerance_pu = jl["tolerance_pu"].get<double>();
    if (jl.contains("max_iterations")) cfg.loadflow.max_iterations = jl["max_iterations"].get<int>();
    if (jl.contains("collapse_floor_pu")) cfg.loadflow.collapse_floor_pu = jl["collapse_floor_pu"].get<double>();
  }
  return cfg;
}

void apply_der_placement(NetworkModel& net, const ScenarioConfig& cfg) {
  const int count = static_cast<int>(net.households.size());
  if (cfg.placement_mode == PlacementMode::Seeded) {
    for (auto& hh : net.households) {
      hh.has_pv = false;
      hh.has_battery = false;
      hh.market_participant = false;
      hh.switchable = false;
    }
    const int n_pv = static_cast<int>(std::lround(cfg.pv_fraction.value_or(0.0) * count));
    const int n_bat = static_cast<int>(std::lround(cfg.battery_fraction.value_or(0.0) * count));
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(mix_seed(cfg.seed, "der-placement"));
    for (int i = count - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_int(0, i)]);
    }
    // Batteries co-locate with PV as far as the counts allow.
    for (int i = 0; i < n_pv && i < count; ++i) net.households[order[i]].has_pv = true;
    for (int i = 0; i < n_bat && i < count; ++i) net.households[order[i]].has_battery = true;
    for (auto& hh : net.households) hh.market_participant = hh.has_pv || hh.has_battery;
  } else if (cfg.placement_mode == PlacementMode::File) {
    std::ifstream in(cfg.placement_path);
    if (!in) throw std::runtime_error("cannot open placement file " + cfg.placement_path);
    json root = json::parse(in);
    check_fields(root, {"pv", "battery", "market_participant", "switchable"}, cfg.placement_path,
                 "placement");
    for (auto& hh : net.households) {
      hh.has_pv = false;
      hh.has_battery = false;
      hh.market_participant = false;
      hh.switchable = false;
    }
    auto apply = [&](const char* key, auto setter) {
      if (!root.contains(key)) return;
      for (const auto& jid : root[key]) {
        const std::string id = jid.get<std::string>();
        int idx = net.household_index(id);
        if (idx < 0) {
          throw std::runtime_error(cfg.placement_path + ": unknown household id " + id);
        }
        setter(net.households[idx]);
      }
    };
    apply("pv", [](Household& hh) { hh.has_pv = true; });
    apply("battery", [](Household& hh) { hh.has_battery = true; });
    for (auto& hh : net.households) hh.market_participant = hh.has_pv || hh.has_battery;
    apply("market_participant", [](Household& hh) { hh.market_participant = true; });
    apply("switchable", [](Household& hh) { hh.switchable = true; });
    for (const auto& hh : net.households) {
      if (hh.switchable && !hh.market_participant) {
        throw std::runtime_error(cfg.placement_path + ": household " + hh.id +
                                 " switchable but not a market participant");
      }
    }
  }

  auto check_fraction = [&](const std::optional<double>& fraction, bool Household::*flag,
                            const char* what) {
    if (!fraction) return;
    int actual = 0;
    for (const auto& hh : net.households) {
      if (hh.*flag) ++actual;
    }
    const int expected = static_cast<int>(std::lround(*fraction * count));
    if (actual != expected) {
      throw std::runtime_error("scenario " + cfg.name + ": " + what + " count " +
                               std::to_string(actual) + " does not match fraction " +
                               std::to_string(*fraction) + " of " + std::to_string(count) +
                               " households (" + std::to_string(expected) + ")");
    }
  };
  check_fraction(cfg.pv_fraction, &Household::has_pv, "pv");
  check_fraction(cfg.battery_fraction, &Household::has_battery, "battery");
}

namespace {

// Scheduled net flow per household: participants run PV + battery through the
// tariff scheduler, everything else passes its load through (a PV house
// without battery still self-consumes).
std::vector<Profile> scheduled_net_flows(const NetworkModel& net,
                                         const std::vector<Profile>& loads, const Profile& pv,
                                         const ScenarioConfig& cfg) {
  std::vector<Profile> nets(net.households.size());
  const Profile empty;
  for (std::size_t h = 0; h < net.households.size(); ++h) {
    const Household& hh = net.households[h];
    BatteryParams bp = cfg.battery;
    if (!hh.has_battery) {
      bp.capacity_kwh = 0.0;
      bp.initial_soc_kwh = 0.0;
    }
    nets[h] = schedule_battery(loads[h], hh.has_pv ? pv : empty, bp, cfg.tariff).net_kw;
  }
  return nets;
}

std::vector<Profile> load_profiles_from_csv(const NetworkModel& net, const std::string& path,
                                            int slots) {
  auto [ids, profiles] = read_profiles_csv(path);
  std::vector<Profile> loads(net.households.size());
  std::vector<bool> seen(net.households.size(), false);
  for (std::size_t c = 0; c < ids.size(); ++c) {
    int idx = net.household_index(ids[c]);
    if (idx < 0) throw std::runtime_error(path + ": unknown household column " + ids[c]);
    if (profiles[c].slots() < slots) {
      throw std::runtime_error(path + ": column " + ids[c] + " has fewer rows than the horizon");
    }
    profiles[c].kw.resize(slots);
    loads[idx] = std::move(profiles[c]);
    seen[idx] = true;
  }
  for (std::size_t h = 0; h < seen.size(); ++h) {
    if (!seen[h]) throw std::runtime_error(path + ": no column for household " + net.households[h].id);
  }
  return loads;
}

struct FeederParticipants {
  std::vector<int> participants;      // global indices, ascending
  std::vector<int> non_participants;  // global indices, ascending
};

std::vector<FeederParticipants> split_participants(const NetworkModel& net) {
  std::vector<FeederParticipants> out(net.feeders.size());
  for (std::size_t f = 0; f < net.feeders.size(); ++f) {
    auto houses = net.feeder_households(static_cast<int>(f));
    std::sort(houses.begin(), houses.end());
    for (int h : houses) {
      if (net.households[h].market_participant) out[f].participants.push_back(h);
      else out[f].non_participants.push_back(h);
    }
  }
  return out;
}

}  // namespace

SelectionContext build_selection_context(const NetworkModel& net,
                                         const std::vector<Profile>& net_flows,
                                         const ScenarioConfig& cfg) {
  const int slots = cfg.horizon_days * kSlotsPerDay;
  SelectionContext ctx;
  ctx.budget = cfg.switch_budget;
  ctx.current = net.initial_allocation;
  ctx.households = net.households;
  ctx.long_run_avg_kw.assign(net.households.size(), 0.0);
  for (std::size_t h = 0; h < net.households.size(); ++h) {
    if (slots > 0) {
      double sum = 0.0;
      for (int s = 0; s < slots; ++s) sum += net_flows[h].kw[s];
      ctx.long_run_avg_kw[h] = sum / slots;
    }
  }
  if (slots == 0) return ctx;

  // Probe feeder: the one carrying the largest mean |flow|.
  int probe_feeder = 0;
  double best_load = -1.0;
  for (std::size_t f = 0; f < net.feeders.size(); ++f) {
    double total = 0.0;
    for (const auto& fh : net.feeders[f].houses) total += std::abs(ctx.long_run_avg_kw[fh.house]);
    if (total > best_load) {
      best_load = total;
      probe_feeder = static_cast<int>(f);
    }
  }
  const FeederModel& feeder = net.feeders[probe_feeder];
  int probe_bus = 0;
  double best_dist = -1.0;
  for (std::size_t b = 1; b < feeder.buses.size(); ++b) {
    if (!feeder.bus_has_load(static_cast<int>(b))) continue;
    const double d = feeder.electrical_distance_ohm(static_cast<int>(b));
    if (d > best_dist) {
      best_dist = d;
      probe_bus = static_cast<int>(b);
    }
  }

  std::array<double, 3> acc{0.0, 0.0, 0.0};
  int counted = 0;
  SlotFlows flows;
  flows.per_house_kw.resize(net.households.size());
  for (int s = 0; s < slots; ++s) {
    flows.slot_index = s;
    for (std::size_t h = 0; h < net.households.size(); ++h) flows.per_house_kw[h] = net_flows[h].kw[s];
    auto result = solve_feeder(feeder, net.initial_allocation, flows, cfg.loadflow);
    if (!result.converged) continue;
    ++counted;
    if (cfg.voltage_probe == VoltageProbe::FarthestLoadedBus) {
      for (int i = 0; i < 3; ++i) acc[i] += std::abs(result.bus_voltages_v[probe_bus][i]);
    } else {
      for (int i = 0; i < 3; ++i) {
        double mean = 0.0;
        for (const auto& bus : result.bus_voltages_v) mean += std::abs(bus[i]);
        acc[i] += mean / static_cast<double>(result.bus_voltages_v.size());
      }
    }
  }
  if (counted > 0) {
    for (int i = 0; i < 3; ++i) ctx.per_phase_avg_voltage_v[i] = acc[i] / counted;
  }
  return ctx;
}

MetricsReport run_scenario(const ScenarioConfig& cfg) {
  NetworkModel net = load_network(cfg.network_path);
  apply_der_placement(net, cfg);
  const int slots = cfg.horizon_days * kSlotsPerDay;
  const int feeders = static_cast<int>(net.feeders.size());

  MetricsReport report;
  report.scenario = cfg.name;
  report.allocation = to_string(cfg.allocation);
  report.selection = to_string(cfg.selection);
  report.seed = cfg.seed;
  report.horizon_days = cfg.horizon_days;
  report.slots = slots;
  report.switch_budget = cfg.switch_budget;
  for (const auto& feeder : net.feeders) report.feeder_ids.push_back(feeder.id);

  // Profiles and schedules.
  std::vector<Profile> loads;
  Profile pv;
  if (!cfg.load_profiles_csv.empty()) {
    loads = load_profiles_from_csv(net, cfg.load_profiles_csv, slots);
  }
  if (cfg.load_profiles_csv.empty() || cfg.pv_profile_csv.empty()) {
    auto generated = generate_profiles(net.households, cfg.horizon_days, cfg.profiles, cfg.seed);
    if (cfg.load_profiles_csv.empty()) loads = std::move(generated.load);
    pv = std::move(generated.pv);
  }
  if (!cfg.pv_profile_csv.empty()) {
    auto [ids, profiles] = read_profiles_csv(cfg.pv_profile_csv);
    if (profiles.empty() || profiles[0].slots() < slots) {
      throw std::runtime_error(cfg.pv_profile_csv + ": need one column covering the horizon");
    }
    profiles[0].kw.resize(slots);
    pv = std::move(profiles[0]);
  }
  const auto nets = scheduled_net_flows(net, loads, pv, cfg);

  std::vector<SlotFlows> flows(slots);
  for (int s = 0; s < slots; ++s) {
    flows[s].slot_index = s;
    flows[s].per_house_kw.resize(net.households.size());
    for (std::size_t h = 0; h < net.households.size(); ++h) {
      flows[s].per_house_kw[h] = nets[h].kw[s];
    }
  }

  const auto by_feeder = split_participants(net);

  // Allocation per slot according to the strategy.
  std::vector<PhaseAllocation> alloc(slots, net.initial_allocation);
  std::vector<std::vector<int>> slot_switches(slots, std::vector<int>(feeders, 0));

  if (cfg.allocation == AllocationStrategy::Static && slots > 0) {
    auto ctx = build_selection_context(net, nets, cfg);
    const auto moves = select_mean_based_moves(ctx);
    std::map<int, Phase> decisions;
    std::set<int> movable;
    for (const auto& move : moves) {
      decisions[move.house] = move.to;
      movable.insert(move.house);
    }
    const auto rebased = apply_phase_decisions(net.initial_allocation, decisions, movable);
    for (int s = 0; s < slots; ++s) alloc[s] = rebased;
    report.switch_operations = static_cast<int>(moves.size());
  } else if (cfg.allocation == AllocationStrategy::Dynamic && slots > 0) {
    auto ctx = build_selection_context(net, nets, cfg);
    std::vector<int> picks;
    switch (cfg.selection) {
      case SelectionStrategy::MeanBased: picks = select_mean_based(ctx); break;
      case SelectionStrategy::Haf: picks = select_haf(ctx); break;
      case SelectionStrategy::Hybrid: picks = select_hybrid(ctx); break;
    }
    std::set<int> switch_set(picks.begin(), picks.end());
    for (std::size_t h = 0; h < net.households.size(); ++h) {
      if (net.households[h].switchable) switch_set.insert(static_cast<int>(h));
    }
    report.switches_installed = static_cast<int>(switch_set.size());

    PhaseAllocation prev = net.initial_allocation;
    report.allocator_objective.assign(slots, 0.0);
    report.keep_previous_objective.assign(slots, 0.0);
    for (int s = 0; s < slots; ++s) {
      std::map<int, Phase> decisions;
      std::vector<int> per_feeder_changes(feeders, 0);
      for (int f = 0; f < feeders; ++f) {
        const auto& parts = by_feeder[f].participants;
        if (parts.empty()) continue;
        const auto commitments = commitments_for_slot(nets, s, parts);
        AllocationProblem problem;
        if (cfg.include_background_in_target) {
          const auto background =
              aggregate_phase_flows(prev, flows[s], by_feeder[f].non_participants);
          const double total = commitments.total_kw() + background[0] + background[1] + background[2];
          std::array<double, 3> target{};
          for (int i = 0; i < 3; ++i) target[i] = total / 3.0 - background[i];
          problem = build_problem(commitments, prev, switch_set, target);
        } else {
          problem = build_problem(commitments, prev, switch_set);
        }
        const auto solution = solve_branch_and_bound(problem);
        report.allocator_objective[s] += solution.objective;
        report.keep_previous_objective[s] += objective_value(problem, problem.current_phase);
        for (int i = 0; i < problem.participant_count(); ++i) {
          if (solution.assignment[i] != problem.current_phase[i]) {
            decisions[problem.houses[i]] = solution.assignment[i];
            ++per_feeder_changes[f];
          }
        }
      }
      if (cfg.max_switches_per_slot > 0 &&
          static_cast<int>(decisions.size()) > cfg.max_switches_per_slot) {
        // Rate cap engaged: hold the previous allocation for this slot.
        decisions.clear();
        std::fill(per_feeder_changes.begin(), per_feeder_changes.end(), 0);
      }
      alloc[s] = apply_phase_decisions(prev, decisions, switch_set);
      for (int f = 0; f < feeders; ++f) slot_switches[s][f] = per_feeder_changes[f];
      report.switch_operations += static_cast<int>(decisions.size());
      prev = alloc[s];
    }
  }

  // Metrics pass.
  std::vector<SlotPowerSample> transformer(slots);
  double vuf_peak_sum = 0.0;
  int vuf_slots = 0;
  bool have_extremes = false;
  double min_v = 0.0, max_v = 0.0;
  for (int s = 0; s < slots; ++s) {
    double slot_losses = 0.0;
    double slot_net = 0.0;
    double slot_peak_vuf = 0.0;
    bool slot_converged = true;
    for (int f = 0; f < feeders; ++f) {
      const auto result = solve_feeder(net.feeders[f], alloc[s], flows[s], cfg.loadflow);
      SlotFeederRecord rec;
      rec.slot = s;
      rec.feeder = f;
      rec.switches = slot_switches[s][f];
      rec.converged = result.converged;
      if (result.converged) {
        const auto profile = feeder_vuf_profile(result);
        const auto extremes = voltage_extremes(result, net.nominal_voltage_v);
        rec.peak_vuf_percent = profile.max_percent;
        rec.min_v_pu = extremes.min_pu;
        rec.max_v_pu = extremes.max_pu;
        rec.line_losses_kw = result.line_losses_kw;
        for (int i = 0; i < 3; ++i) rec.net_power_kw += result.slack_power_kva[i].real();
        slot_losses += rec.line_losses_kw;
        slot_net += rec.net_power_kw;
        slot_peak_vuf = std::max(slot_peak_vuf, rec.peak_vuf_percent);
        if (!have_extremes) {
          min_v = extremes.min_pu;
          max_v = extremes.max_pu;
          have_extremes = true;
        } else {
          min_v = std::min(min_v, extremes.min_pu);
          max_v = std::max(max_v, extremes.max_pu);
        }
        for (std::size_t b = 0; b < profile.per_bus_percent.size(); ++b) {
          report.vuf_surface.push_back(
              {s, f, static_cast<int>(b), profile.per_bus_percent[b]});
        }
        if (cfg.verbose_voltages) {
          for (std::size_t b = 0; b < result.bus_voltages_v.size(); ++b) {
            for (Phase p : kPhases) {
              const Complex v = result.bus_voltages_v[b][static_cast<int>(p)];
              report.voltage_rows.push_back({s, f, static_cast<int>(b), phase_label(p),
                                             std::abs(v), std::arg(v) * 180.0 / M_PI,
                                             profile.per_bus_percent[b]});
            }
          }
        }
      } else {
        slot_converged = false;
        std::fprintf(stderr, "warning: slot %d feeder %s did not converge (%s)\n", s,
                     net.feeders[f].id.c_str(),
                     result.status == LoadflowStatus::VoltageCollapse ? "voltage collapse"
                                                                      : "iteration limit");
      }
      report.series.push_back(rec);
    }
    transformer[s] = {slot_losses, slot_net, slot_converged};
    if (slot_converged) {
      report.peak_vuf_percent = std::max(report.peak_vuf_percent, slot_peak_vuf);
      vuf_peak_sum += slot_peak_vuf;
      ++vuf_slots;
    } else {
      ++report.unconverged_slots;
    }
  }

  const auto losses = losses_report(transformer);
  report.line_losses_kwh = losses.line_losses_kwh;
  report.transformer_energy_kwh = losses.transformer_energy_kwh;
  report.peak_transformer_kw = losses.peak_transformer_kw;
  report.mean_vuf_percent = vuf_slots > 0 ? vuf_peak_sum / vuf_slots : 0.0;
  report.min_v_pu = min_v;
  report.max_v_pu = max_v;
  return report;
}

StrategyComparison compare_reports(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("nothing to compare");
  int baseline = -1;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].horizon_days != reports[0].horizon_days || reports[i].slots != reports[0].slots) {
      throw std::invalid_argument("compared runs must share the same horizon");
    }
    if (reports[i].allocation == "none") {
      if (baseline >= 0) throw std::invalid_argument("more than one no-switching baseline");
      baseline = static_cast<int>(i);
    }
  }
  if (baseline < 0) throw std::invalid_argument("comparison needs one allocation=none baseline");

  StrategyComparison cmp;
  const MetricsReport& base = reports[baseline];
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const MetricsReport& r = reports[i];
    ComparisonRow row;
    row.name = r.scenario;
    row.allocation = r.allocation;
    row.selection = r.selection;
    row.switch_budget = r.switch_budget;
    row.is_baseline = static_cast<int>(i) == baseline;
    row.peak_vuf_percent = r.peak_vuf_percent;
    row.mean_vuf_percent = r.mean_vuf_percent;
    row.delta_peak_vuf = r.peak_vuf_percent - base.peak_vuf_percent;
    row.delta_mean_vuf = r.mean_vuf_percent - base.mean_vuf_percent;
    row.delta_losses_kwh = r.line_losses_kwh - base.line_losses_kwh;
    row.delta_min_v_pu = r.min_v_pu - base.min_v_pu;
    row.delta_max_v_pu = r.max_v_pu - base.max_v_pu;
    row.transformer_energy_kwh = r.transformer_energy_kwh;
    row.peak_transformer_kw = r.peak_transformer_kw;
    row.switch_operations = r.switch_operations;
    row.switches_installed = r.switches_installed;
    row.exceeds_vuf_limit = r.peak_vuf_percent > cmp.vuf_limit_percent;
    cmp.rows.push_back(std::move(row));
  }
  return cmp;
}

StrategyComparison compare_strategies(const std::vector<ScenarioConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("nothing to compare");
  for (const auto& cfg : configs) {
    if (cfg.horizon_days != configs[0].horizon_days) {
      throw std::invalid_argument("compared configs must share the same horizon");
    }
  }
  std::vector<MetricsReport> reports;
  reports.reserve(configs.size());
  for (const auto& cfg : configs) reports.push_back(run_scenario(cfg));
  return compare_reports(reports);
}

EconomicSummary economic_summary(const MetricsReport& baseline, const MetricsReport& treatment,
                                 double price_eur_per_mwh) {
  if (baseline.horizon_days != treatment.horizon_days) {
    throw std::invalid_argument("economic summary requires matching horizons");
  }
  EconomicSummary summary;
  if (baseline.horizon_days > 0) {
    const double saved_kwh = baseline.line_losses_kwh - treatment.line_losses_kwh;
    summary.losses_saved_mwh_per_year =
        saved_kwh / 1000.0 * (365.0 / static_cast<double>(baseline.horizon_days));
  }
  summary.value_eur_per_year = economic_value_eur(summary.losses_saved_mwh_per_year,
                                                  price_eur_per_mwh);
  return summary;
}

}  // namespace gridphase
