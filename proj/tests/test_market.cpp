#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "gridphase/market.hpp"
#include "gridphase/rng.hpp"

using namespace gridphase;

namespace {

std::vector<Household> roster(int n, int pv_count = 0, int battery_count = 0) {
  std::vector<Household> houses(n);
  for (int i = 0; i < n; ++i) {
    houses[i].id = "h" + std::to_string(i);
    houses[i].has_pv = i < pv_count;
    houses[i].has_battery = i < battery_count;
    houses[i].market_participant = houses[i].has_pv || houses[i].has_battery;
  }
  return houses;
}

}  // namespace

TEST_CASE("profile generation is reproducible per seed") {
  auto houses = roster(4, 2);
  ProfileParams params;
  auto a = generate_profiles(houses, 2, params, 42);
  auto b = generate_profiles(houses, 2, params, 42);
  auto c = generate_profiles(houses, 2, params, 43);
  for (std::size_t h = 0; h < houses.size(); ++h) {
    CHECK(a.load[h].kw == b.load[h].kw);
  }
  CHECK(a.pv.kw == b.pv.kw);
  CHECK(a.load[0].kw != c.load[0].kw);
}

TEST_CASE("PV curve is zero at night and integrates to the configured energy") {
  ProfileParams params;
  params.pv_kwh_per_day = 18.5;
  auto gen = generate_profiles(roster(1, 1), 3, params, 7);
  REQUIRE(gen.pv.slots() == 3 * kSlotsPerDay);
  // midnight and small hours
  for (int day = 0; day < 3; ++day) {
    for (int s = 0; s < 6; ++s) CHECK(gen.pv.kw[day * kSlotsPerDay + s] == 0.0);
  }
  for (int day = 0; day < 3; ++day) {
    double energy = 0.0;
    for (int s = 0; s < kSlotsPerDay; ++s) energy += gen.pv.kw[day * kSlotsPerDay + s] * kSlotHours;
    CHECK(std::abs(energy - params.pv_kwh_per_day) < 1e-6);
  }
}

TEST_CASE("loads are non-negative with residential peaks") {
  ProfileParams params;
  auto gen = generate_profiles(roster(6), 6, params, 11);
  for (const auto& profile : gen.load) {
    REQUIRE(profile.slots() == 6 * kSlotsPerDay);
    double peak = 0.0;
    for (double kw : profile.kw) {
      CHECK(kw >= 0.0);
      peak = std::max(peak, kw);
    }
    CHECK(peak >= params.evening_peak_min_kw * 0.5);
  }
}

TEST_CASE("tariff windows follow the two price levels") {
  TouTariff tariff;
  auto slot_at_hour = [](int hour) { return hour * 6; };
  CHECK(tariff.price_cents(slot_at_hour(0)) == 15.0);
  CHECK(tariff.price_cents(slot_at_hour(12)) == 15.0);
  CHECK(tariff.price_cents(slot_at_hour(16)) == 15.0);  // gap priced low
  CHECK(tariff.price_cents(slot_at_hour(17)) == 20.0);
  CHECK(tariff.price_cents(slot_at_hour(22)) == 20.0);
  CHECK(tariff.price_cents(slot_at_hour(23)) == 15.0);  // gap priced low
  // exactly two levels over a full day
  std::set<double> levels;
  for (int s = 0; s < kSlotsPerDay; ++s) levels.insert(tariff.price_cents(s));
  CHECK(levels == std::set<double>{15.0, 20.0});
}

TEST_CASE("no PV and no capacity passes the load through") {
  Profile load{{1.0, 2.0, 0.5, 0.0}};
  BatteryParams battery;
  battery.capacity_kwh = 0.0;
  auto sched = schedule_battery(load, Profile{}, battery, TouTariff{});
  CHECK(sched.net_kw.kw == load.kw);
  for (double soc : sched.soc_kwh) CHECK(soc == 0.0);
}

TEST_CASE("PV surplus charges the battery before exporting") {
  // 1 kW of pure surplus over six slots = 1 kWh into an empty 6 kWh battery
  Profile load{std::vector<double>(6, 0.0)};
  Profile pv{std::vector<double>(6, 1.0)};
  BatteryParams battery;  // 6 kWh, 3 kW, empty
  auto sched = schedule_battery(load, pv, battery, TouTariff{});
  for (double net : sched.net_kw.kw) CHECK(net == 0.0);  // nothing exported
  CHECK(sched.soc_kwh.back() == doctest::Approx(1.0));
}

TEST_CASE("full battery serves residual load in the high-price window") {
  const int slots = kSlotsPerDay;
  Profile load{std::vector<double>(slots, 0.0)};
  const int evening = 17 * 6;  // first high-price slot
  load.kw[evening] = 1.0;
  BatteryParams battery;
  battery.initial_soc_kwh = battery.capacity_kwh;
  auto sched = schedule_battery(load, Profile{}, battery, TouTariff{});
  CHECK(sched.net_kw.kw[evening] == 0.0);
  CHECK(sched.soc_kwh[evening + 1] ==
        doctest::Approx(battery.capacity_kwh - 1.0 * kSlotHours));
}

TEST_CASE("battery never charges from the grid by default") {
  Profile load{std::vector<double>(kSlotsPerDay, 0.8)};
  BatteryParams battery;  // empty, no PV
  auto sched = schedule_battery(load, Profile{}, battery, TouTariff{});
  for (double soc : sched.soc_kwh) CHECK(soc == 0.0);
  CHECK(sched.net_kw.kw == load.kw);

  BatteryParams charging = battery;
  charging.grid_charging = true;
  auto grid = schedule_battery(load, Profile{}, charging, TouTariff{});
  CHECK(grid.soc_kwh.back() > 0.0);  // the variant does draw from the grid
}

TEST_CASE("state of charge and energy stay consistent on random inputs") {
  SplitMix64 rng(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const int slots = 2 * kSlotsPerDay;
    Profile load, pv;
    for (int s = 0; s < slots; ++s) {
      load.kw.push_back(rng.uniform(0.0, 3.0));
      pv.kw.push_back(std::max(0.0, rng.uniform(-2.0, 4.0)));
    }
    BatteryParams battery;
    battery.initial_soc_kwh = rng.uniform(0.0, 6.0);
    auto sched = schedule_battery(load, pv, battery, TouTariff{});

    for (double soc : sched.soc_kwh) {
      CHECK(soc >= -1e-12);
      CHECK(soc <= battery.capacity_kwh + 1e-12);
    }
    // import - export == load - pv + delta soc
    const double net_energy = sched.net_kw.energy_kwh();
    const double delta_soc = sched.soc_kwh.back() - sched.soc_kwh.front();
    CHECK(net_energy ==
          doctest::Approx(load.energy_kwh() - pv.energy_kwh() + delta_soc).epsilon(1e-9));
  }
}

TEST_CASE("commitments carry signed scheduled flows") {
  std::vector<Profile> nets(3);
  nets[0].kw = {0.0, 1.0};
  nets[1].kw = {-2.5, 0.5};
  nets[2].kw = {1.5, 1.5};
  auto set = commitments_for_slot(nets, 0, {0, 1, 2});
  CHECK(set.slot_index == 0);
  REQUIRE(set.entries.size() == 3);
  CHECK(set.entries[0].power_kw == 0.0);
  CHECK(set.entries[1].power_kw == -2.5);  // exporter is negative
  CHECK(set.total_kw() == doctest::Approx(-1.0));
  CHECK_THROWS_AS(commitments_for_slot(nets, 0, {5}), std::out_of_range);
  CHECK_THROWS_AS(commitments_for_slot(nets, 9, {0}), std::out_of_range);
}

TEST_CASE("profiles CSV round-trips") {
  const auto dir = std::filesystem::temp_directory_path() / "gridphase_market_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "profiles.csv").string();

  std::vector<std::string> ids{"h1", "h2"};
  std::vector<Profile> profiles(2);
  SplitMix64 rng(1);
  for (int s = 0; s < 20; ++s) {
    profiles[0].kw.push_back(rng.uniform(-3.0, 3.0));
    profiles[1].kw.push_back(rng.uniform(0.0, 2.0));
  }
  write_profiles_csv(path, ids, profiles);
  auto [read_ids, read_profiles] = read_profiles_csv(path);
  CHECK(read_ids == ids);
  REQUIRE(read_profiles.size() == 2);
  CHECK(read_profiles[0].kw == profiles[0].kw);
  CHECK(read_profiles[1].kw == profiles[1].kw);
  std::filesystem::remove_all(dir);
}
