#include "gridphase/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gridphase/rng.hpp"

namespace gridphase {

double Profile::energy_kwh(double slot_hours) const {
  double e = 0.0;
  for (double p : kw) e += p * slot_hours;
  return e;
}

bool TouTariff::is_high_slot(int slot) const {
  const int hour = (slot % kSlotsPerDay) / 6;
  return hour >= high_start_hour && hour < high_end_hour;
}

double TouTariff::price_cents(int slot) const {
  return is_high_slot(slot) ? high_cents_per_kwh : low_cents_per_kwh;
}

namespace {

double bump(double x) { return std::exp(-x * x); }

// Daily residential shape at hour-of-day t for one household's drawn levels.
double load_shape(double t, double base, double morning, double evening) {
  return base + morning * bump((t - 7.75) / 1.5) + evening * bump((t - 19.5) / 2.0);
}

}  // namespace

GeneratedProfiles generate_profiles(const std::vector<Household>& households, int horizon_days,
                                    const ProfileParams& params, std::uint64_t seed) {
  const int slots = horizon_days * kSlotsPerDay;
  GeneratedProfiles out;
  out.load.resize(households.size());

  for (std::size_t h = 0; h < households.size(); ++h) {
    SplitMix64 rng(mix_seed(seed, households[h].id));
    const double base = rng.uniform(params.base_min_kw, params.base_max_kw);
    const double morning = rng.uniform(params.morning_peak_min_kw, params.morning_peak_max_kw);
    const double evening = rng.uniform(params.evening_peak_min_kw, params.evening_peak_max_kw);
    auto& profile = out.load[h].kw;
    profile.reserve(slots);
    for (int s = 0; s < slots; ++s) {
      const double t = ((s % kSlotsPerDay) + 0.5) / 6.0;  // hour of day at slot midpoint
      double kw = load_shape(t, base, morning, evening) +
                  rng.uniform(-params.jitter_kw, params.jitter_kw);
      profile.push_back(std::max(kw, 0.0));
    }
  }

  // Shared PV curve: sin^2 bell between sunrise and sunset, scaled so one day
  // integrates exactly to pv_kwh_per_day.
  std::vector<double> day(kSlotsPerDay, 0.0);
  double raw_energy = 0.0;
  for (int s = 0; s < kSlotsPerDay; ++s) {
    const double t = (s + 0.5) / 6.0;
    if (t > params.pv_sunrise_hour && t < params.pv_sunset_hour) {
      const double phase = M_PI * (t - params.pv_sunrise_hour) /
                           (params.pv_sunset_hour - params.pv_sunrise_hour);
      const double v = std::sin(phase);
      day[s] = v * v;
      raw_energy += day[s] * kSlotHours;
    }
  }
  const double scale = raw_energy > 0.0 ? params.pv_kwh_per_day / raw_energy : 0.0;
  out.pv.kw.reserve(slots);
  for (int s = 0; s < slots; ++s) out.pv.kw.push_back(day[s % kSlotsPerDay] * scale);
  return out;
}

HouseholdSchedule schedule_battery(const Profile& load, const Profile& pv,
                                   const BatteryParams& battery, const TouTariff& tariff,
                                   double slot_hours) {
  if (!pv.kw.empty() && pv.kw.size() != load.kw.size()) {
    throw std::invalid_argument("load and pv profiles differ in length");
  }
  const int slots = load.slots();
  HouseholdSchedule sched;
  sched.net_kw.kw.reserve(slots);
  sched.soc_kwh.reserve(slots + 1);

  BatteryState state{battery.capacity_kwh, battery.initial_soc_kwh, battery.power_limit_kw};
  state.soc_kwh = std::clamp(state.soc_kwh, 0.0, state.capacity_kwh);
  sched.soc_kwh.push_back(state.soc_kwh);

  for (int s = 0; s < slots; ++s) {
    const double demand = load.kw[s];
    const double production = pv.kw.empty() ? 0.0 : pv.kw[s];

    const double self = std::min(demand, production);
    double surplus = production - self;
    double residual = demand - self;

    // PV surplus into the battery, limited by power and free capacity.
    double charge = std::min({surplus, state.power_limit_kw,
                              (state.capacity_kwh - state.soc_kwh) / slot_hours});
    charge = std::max(charge, 0.0);
    state.soc_kwh += charge * slot_hours;
    surplus -= charge;

    double discharge = 0.0;
    if (tariff.is_high_slot(s) && residual > 0.0) {
      discharge = std::min({residual, state.power_limit_kw, state.soc_kwh / slot_hours});
      discharge = std::max(discharge, 0.0);
      state.soc_kwh -= discharge * slot_hours;
      residual -= discharge;
    } else if (battery.grid_charging && !tariff.is_high_slot(s)) {
      // Optional variant: top up from the grid during cheap hours.
      double grid_charge = std::min({state.power_limit_kw - charge,
                                     (state.capacity_kwh - state.soc_kwh) / slot_hours});
      grid_charge = std::max(grid_charge, 0.0);
      state.soc_kwh += grid_charge * slot_hours;
      residual += grid_charge;
    }

    sched.net_kw.kw.push_back(residual - surplus);
    sched.soc_kwh.push_back(state.soc_kwh);
  }
  return sched;
}

CommitmentSet commitments_for_slot(const std::vector<Profile>& net_flows, int slot,
                                   const std::vector<int>& participants) {
  CommitmentSet set;
  set.slot_index = slot;
  for (int house : participants) {
    if (house < 0 || house >= static_cast<int>(net_flows.size()) ||
        slot >= net_flows[house].slots()) {
      throw std::out_of_range("no scheduled flow for participant index " + std::to_string(house));
    }
    set.entries.push_back({house, net_flows[house].kw[slot]});
  }
  return set;
}

void write_profiles_csv(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<Profile>& profiles) {
  if (ids.size() != profiles.size()) {
    throw std::invalid_argument("ids and profiles differ in length");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profiles to " + path);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << (i == 0 ? "" : ",") << ids[i];
  }
  out << "\n";
  const int slots = profiles.empty() ? 0 : profiles[0].slots();
  char buf[40];
  for (int s = 0; s < slots; ++s) {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", profiles[i].kw.at(s));
      out << (i == 0 ? "" : ",") << buf;
    }
    out << "\n";
  }
}

std::pair<std::vector<std::string>, std::vector<Profile>> read_profiles_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profiles file " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty profiles file " + path);

  auto split = [](const std::string& text) {
    std::vector<std::string> cells;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };

  std::vector<std::string> ids = split(line);
  std::vector<Profile> profiles(ids.size());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != ids.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(ids.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) profiles[i].kw.push_back(std::stod(cells[i]));
  }
  return {std::move(ids), std::move(profiles)};
}

}  // namespace gridphase
