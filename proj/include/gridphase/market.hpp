#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridphase/allocator.hpp"
#include "gridphase/grid_model.hpp"

namespace gridphase {

// kW per 10-minute slot.
struct Profile {
  std::vector<double> kw;

  int slots() const { return static_cast<int>(kw.size()); }
  double energy_kwh(double slot_hours = kSlotHours) const;
};

// Two-level time-of-use price. Hours outside both windows fall back to the
// low level.
struct TouTariff {
  double low_cents_per_kwh = 15.0;
  double high_cents_per_kwh = 20.0;
  int high_start_hour = 17;  // inclusive
  int high_end_hour = 23;    // exclusive

  bool is_high_slot(int slot) const;
  double price_cents(int slot) const;
};

struct BatteryParams {
  double capacity_kwh = 6.0;
  double power_limit_kw = 3.0;
  double initial_soc_kwh = 0.0;
  bool grid_charging = false;  // off: battery charges from PV surplus only
};

struct BatteryState {
  double capacity_kwh = 6.0;
  double soc_kwh = 0.0;
  double power_limit_kw = 3.0;
};

// Synthetic residential profile shape knobs.
struct ProfileParams {
  double base_min_kw = 0.2;
  double base_max_kw = 0.5;
  double morning_peak_min_kw = 1.0;
  double morning_peak_max_kw = 2.0;
  double evening_peak_min_kw = 1.5;
  double evening_peak_max_kw = 3.0;
  double jitter_kw = 0.05;
  double pv_kwh_per_day = 22.0;  // one shared production curve for every PV house
  double pv_sunrise_hour = 6.0;
  double pv_sunset_hour = 20.0;
};

struct GeneratedProfiles {
  std::vector<Profile> load;  // per household, roster order
  Profile pv;                 // shared production curve, stored positive
};

// Reproducible synthetic load per household (morning and evening peaks over a
// base level) plus the shared PV bell curve, scaled so each day produces
// exactly pv_kwh_per_day.
GeneratedProfiles generate_profiles(const std::vector<Household>& households, int horizon_days,
                                    const ProfileParams& params, std::uint64_t seed);

struct HouseholdSchedule {
  Profile net_kw;                // positive import, negative export
  std::vector<double> soc_kwh;   // slot boundaries, size slots + 1
};

// Greedy self-consumption with TOU discharge, in slot order: PV serves the
// local load, surplus charges the battery, leftover is exported; during
// high-price slots the battery serves residual load; the rest is imported.
HouseholdSchedule schedule_battery(const Profile& load, const Profile& pv,
                                   const BatteryParams& battery, const TouTariff& tariff,
                                   double slot_hours = kSlotHours);

// Commitments of the given participants for one slot, from their scheduled
// net flows. Throws std::out_of_range for an unknown participant index.
CommitmentSet commitments_for_slot(const std::vector<Profile>& net_flows, int slot,
                                   const std::vector<int>& participants);

// CSV exchange: one column per household, one row per slot.
void write_profiles_csv(const std::string& path, const std::vector<std::string>& ids,
                        const std::vector<Profile>& profiles);
std::pair<std::vector<std::string>, std::vector<Profile>> read_profiles_csv(
    const std::string& path);

}  // namespace gridphase
