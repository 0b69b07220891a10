#include "gridphase/network_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridphase {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw std::runtime_error(origin + ": " + what);
}

// Strict field check: every present key must be in `allowed`.
void check_fields(const json& obj, const std::set<std::string>& allowed,
                  const std::string& origin, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) {
      fail(origin, "unknown field \"" + it.key() + "\" in " + where);
    }
  }
}

double get_number(const json& obj, const std::string& key, const std::string& origin,
                  const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    fail(origin, "missing or non-numeric \"" + key + "\" in " + where);
  }
  return obj[key].get<double>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& origin,
                       const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    fail(origin, "missing or non-string \"" + key + "\" in " + where);
  }
  return obj[key].get<std::string>();
}

bool get_bool_or(const json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  return obj[key].get<bool>();
}

std::array<Complex, 3> parse_phase_impedance(const json& seg, const std::string& origin,
                                             const std::string& where) {
  std::array<Complex, 3> z{};
  const bool per_phase = seg.contains("phase_resistance_ohm") || seg.contains("phase_reactance_ohm");
  if (per_phase) {
    if (!seg.contains("phase_resistance_ohm") || !seg.contains("phase_reactance_ohm")) {
      fail(origin, "per-phase impedance needs both phase_resistance_ohm and phase_reactance_ohm in " + where);
    }
    const auto& r = seg["phase_resistance_ohm"];
    const auto& x = seg["phase_reactance_ohm"];
    if (!r.is_array() || r.size() != 3 || !x.is_array() || x.size() != 3) {
      fail(origin, "phase impedance arrays must have 3 entries in " + where);
    }
    for (int i = 0; i < 3; ++i) z[i] = Complex(r[i].get<double>(), x[i].get<double>());
  } else {
    double r = get_number(seg, "resistance_ohm", origin, where);
    double x = get_number(seg, "reactance_ohm", origin, where);
    z.fill(Complex(r, x));
  }
  for (int i = 0; i < 3; ++i) {
    if (z[i].real() < 0.0) fail(origin, "negative resistance in " + where);
  }
  return z;
}

}  // namespace

NetworkModel parse_network(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(origin, "top level must be an object");
  check_fields(root, {"name", "nominal_voltage_v", "slack", "feeders", "households"}, origin,
               "network");

  NetworkModel net;
  net.name = root.contains("name") ? root["name"].get<std::string>() : "network";
  net.nominal_voltage_v =
      root.contains("nominal_voltage_v") ? root["nominal_voltage_v"].get<double>() : kDefaultNominalVoltage;
  if (net.nominal_voltage_v <= 0.0) fail(origin, "nominal_voltage_v must be positive");

  double slack_mag = net.nominal_voltage_v;
  if (root.contains("slack")) {
    const auto& slack = root["slack"];
    check_fields(slack, {"voltage_v"}, origin, "slack");
    if (slack.contains("voltage_v")) slack_mag = slack["voltage_v"].get<double>();
  }
  net.slack_voltage_v = direct_sequence_voltage(slack_mag);

  if (!root.contains("feeders") || !root["feeders"].is_array() || root["feeders"].empty()) {
    fail(origin, "network needs a non-empty \"feeders\" array");
  }

  std::map<std::string, std::pair<int, int>> bus_lookup;  // bus id -> (feeder, local index)
  for (const auto& jf : root["feeders"]) {
    check_fields(jf, {"id", "buses"}, origin, "feeder");
    FeederModel feeder;
    feeder.id = get_string(jf, "id", origin, "feeder");
    if (net.feeder_index(feeder.id) >= 0) fail(origin, "duplicate feeder id " + feeder.id);
    feeder.nominal_voltage_v = net.nominal_voltage_v;
    feeder.slack_voltage_v = net.slack_voltage_v;
    feeder.buses.push_back(Bus{"slack", -1, {}});

    if (!jf.contains("buses") || !jf["buses"].is_array()) {
      fail(origin, "feeder " + feeder.id + " needs a \"buses\" array");
    }
    std::map<std::string, int> local;  // id -> local index
    local["slack"] = 0;
    for (const auto& jb : jf["buses"]) {
      check_fields(jb, {"id", "parent", "segment"}, origin, "bus");
      Bus bus;
      bus.id = get_string(jb, "id", origin, "bus");
      if (local.contains(bus.id) || bus_lookup.contains(bus.id)) {
        fail(origin, "duplicate bus id " + bus.id);
      }
      std::string parent_id = get_string(jb, "parent", origin, "bus " + bus.id);
      auto pit = local.find(parent_id);
      if (pit == local.end()) {
        // Parents must be declared before children; a forward reference would
        // allow cycles, so it is rejected rather than resolved.
        fail(origin, "bus " + bus.id + " references unknown or later-declared parent " + parent_id);
      }
      bus.parent = pit->second;
      if (!jb.contains("segment") || !jb["segment"].is_object()) {
        fail(origin, "bus " + bus.id + " needs a \"segment\" object");
      }
      const auto& seg = jb["segment"];
      check_fields(seg,
                   {"resistance_ohm", "reactance_ohm", "phase_resistance_ohm",
                    "phase_reactance_ohm", "neutral_resistance_ohm", "neutral_reactance_ohm"},
                   origin, "segment of bus " + bus.id);
      bus.to_parent.phase_ohm = parse_phase_impedance(seg, origin, "segment of bus " + bus.id);
      double nr = seg.contains("neutral_resistance_ohm") ? seg["neutral_resistance_ohm"].get<double>() : 0.0;
      double nx = seg.contains("neutral_reactance_ohm") ? seg["neutral_reactance_ohm"].get<double>() : 0.0;
      if (nr < 0.0) fail(origin, "negative neutral resistance in segment of bus " + bus.id);
      bus.to_parent.neutral_ohm = Complex(nr, nx);

      int idx = static_cast<int>(feeder.buses.size());
      local[bus.id] = idx;
      feeder.buses.push_back(std::move(bus));
    }
    for (const auto& [id, idx] : local) {
      if (id != "slack") bus_lookup[id] = {static_cast<int>(net.feeders.size()), idx};
    }
    net.feeders.push_back(std::move(feeder));
  }

  if (!root.contains("households") || !root["households"].is_array()) {
    fail(origin, "network needs a \"households\" array");
  }
  std::vector<Phase> phases;
  for (const auto& jh : root["households"]) {
    check_fields(jh,
                 {"id", "feeder", "bus", "phase", "pv", "battery", "market_participant",
                  "switchable", "power_factor"},
                 origin, "household");
    Household hh;
    hh.id = get_string(jh, "id", origin, "household");
    if (net.household_index(hh.id) >= 0) fail(origin, "duplicate household id " + hh.id);
    hh.feeder_id = get_string(jh, "feeder", origin, "household " + hh.id);
    int feeder = net.feeder_index(hh.feeder_id);
    if (feeder < 0) fail(origin, "household " + hh.id + " references unknown feeder " + hh.feeder_id);
    std::string bus_id = get_string(jh, "bus", origin, "household " + hh.id);
    auto bit = bus_lookup.find(bus_id);
    if (bit == bus_lookup.end() || bit->second.first != feeder) {
      fail(origin, "household " + hh.id + " references unknown bus " + bus_id + " on feeder " +
                       hh.feeder_id);
    }
    hh.bus_index = bit->second.second;
    std::string phase_str = get_string(jh, "phase", origin, "household " + hh.id);
    auto phase = phase_str.size() == 1 ? phase_from_label(phase_str[0]) : std::nullopt;
    if (!phase) fail(origin, "household " + hh.id + " has invalid phase \"" + phase_str + "\"");
    hh.has_pv = get_bool_or(jh, "pv", false);
    hh.has_battery = get_bool_or(jh, "battery", false);
    hh.market_participant = get_bool_or(jh, "market_participant", hh.has_pv || hh.has_battery);
    hh.switchable = get_bool_or(jh, "switchable", false);
    if (hh.switchable && !hh.market_participant) {
      fail(origin, "household " + hh.id + " is switchable but not a market participant");
    }
    hh.power_factor = jh.contains("power_factor") ? jh["power_factor"].get<double>() : 1.0;
    if (hh.power_factor <= 0.0 || hh.power_factor > 1.0) {
      fail(origin, "household " + hh.id + " has power_factor outside (0, 1]");
    }

    int global = static_cast<int>(net.households.size());
    net.feeders[feeder].houses.push_back(FeederHouse{global, hh.bus_index, hh.power_factor});
    phases.push_back(*phase);
    net.households.push_back(std::move(hh));
  }
  net.initial_allocation = PhaseAllocation::from_phases(phases);
  return net;
}

NetworkModel load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_network(buffer.str(), path);
}

}  // namespace gridphase
