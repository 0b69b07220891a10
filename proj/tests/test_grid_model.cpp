#include <doctest.h>

#include <stdexcept>

#include "gridphase/grid_model.hpp"
#include "gridphase/network_io.hpp"
#include "gridphase/rng.hpp"
#include "test_helpers.hpp"

using namespace gridphase;

namespace {

std::vector<Household> roster(int n) {
  std::vector<Household> houses(n);
  for (int i = 0; i < n; ++i) {
    houses[i].id = "h" + std::to_string(i);
    houses[i].market_participant = true;
  }
  return houses;
}

}  // namespace

TEST_CASE("validate_allocation accepts one-phase-per-house matrices") {
  auto alloc = PhaseAllocation::from_phases({Phase::A, Phase::B, Phase::C, Phase::A});
  auto result = validate_allocation(alloc, roster(4));
  CHECK(result.ok);
  CHECK(result.violating_households.empty());
}

TEST_CASE("validate_allocation flags empty and doubled columns") {
  std::vector<std::array<bool, 3>> cols{
      {true, false, false}, {false, false, false}, {true, true, false}};
  auto alloc = PhaseAllocation::from_matrix(cols);
  auto result = validate_allocation(alloc, roster(3));
  CHECK_FALSE(result.ok);
  REQUIRE(result.violating_households.size() == 2);
  CHECK(result.violating_households[0] == "h1");
  CHECK(result.violating_households[1] == "h2");
}

TEST_CASE("validate_allocation rejects dimension mismatch") {
  auto alloc = PhaseAllocation::from_phases({Phase::A});
  CHECK_FALSE(validate_allocation(alloc, roster(2)).ok);
}

TEST_CASE("apply_phase_decisions with no decisions is the identity") {
  auto alloc = PhaseAllocation::from_phases({Phase::A, Phase::B});
  CHECK(apply_phase_decisions(alloc, {}, {0, 1}) == alloc);
}

TEST_CASE("apply_phase_decisions only touches the decided column") {
  auto alloc = PhaseAllocation::from_phases({Phase::A, Phase::A, Phase::C});
  auto moved = apply_phase_decisions(alloc, {{1, Phase::B}}, {0, 1});
  CHECK(moved.phase_of(0) == Phase::A);
  CHECK(moved.phase_of(1) == Phase::B);
  CHECK(moved.phase_of(2) == Phase::C);
  CHECK(validate_allocation(moved, roster(3)).ok);
}

TEST_CASE("apply_phase_decisions rejects non-switchable targets") {
  auto alloc = PhaseAllocation::from_phases({Phase::A, Phase::B});
  CHECK_THROWS_AS(apply_phase_decisions(alloc, {{1, Phase::A}}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_phase_decisions(alloc, {{7, Phase::A}}, {7}), std::invalid_argument);
}

TEST_CASE("apply_phase_decisions is idempotent for a fixed decision map") {
  auto alloc = PhaseAllocation::from_phases({Phase::A, Phase::B, Phase::C});
  std::map<int, Phase> decisions{{0, Phase::C}, {2, Phase::A}};
  std::set<int> switchable{0, 2};
  auto once = apply_phase_decisions(alloc, decisions, switchable);
  auto twice = apply_phase_decisions(once, decisions, switchable);
  CHECK(once == twice);
}

TEST_CASE("aggregate_phase_flows places signed sums on the right phases") {
  SlotFlows zero{0, {0.0, 0.0, 0.0}};
  auto alloc = PhaseAllocation::from_phases({Phase::A, Phase::B, Phase::C});
  CHECK(aggregate_phase_flows(alloc, zero, {0, 1, 2}) == std::array<double, 3>{0.0, 0.0, 0.0});

  SlotFlows direct{0, {2.0, 1.0, 1.0}};
  CHECK(aggregate_phase_flows(alloc, direct, {0, 1, 2}) == std::array<double, 3>{2.0, 1.0, 1.0});

  auto both_a = PhaseAllocation::from_phases({Phase::A, Phase::A});
  SlotFlows signed_flows{0, {2.0, -3.0}};
  CHECK(aggregate_phase_flows(both_a, signed_flows, {0, 1}) ==
        std::array<double, 3>{-1.0, 0.0, 0.0});
}

TEST_CASE("aggregate_phase_flows rejects subset members without flows") {
  auto alloc = PhaseAllocation::from_phases({Phase::A, Phase::B});
  SlotFlows flows{0, {1.0}};
  CHECK_THROWS_AS(aggregate_phase_flows(alloc, flows, {0, 1}), std::out_of_range);
}

TEST_CASE("aggregate partition property over random allocations") {
  SplitMix64 rng(1234);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.uniform_int(1, 20);
    std::vector<Phase> phases;
    SlotFlows flows{trial, {}};
    std::vector<int> all;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      phases.push_back(static_cast<Phase>(rng.uniform_int(0, 2)));
      flows.per_house_kw.push_back(rng.uniform(-5.0, 5.0));
      total += flows.per_house_kw.back();
      all.push_back(i);
    }
    auto sums = aggregate_phase_flows(PhaseAllocation::from_phases(phases), flows, all);
    CHECK(sums[0] + sums[1] + sums[2] == doctest::Approx(total).epsilon(1e-12));
  }
}

namespace {

const char* kTinyNetwork = R"({
  "name": "tiny",
  "nominal_voltage_v": 230.0,
  "slack": {"voltage_v": 230.0},
  "feeders": [
    {"id": "f1", "buses": [
      {"id": "b1", "parent": "slack",
       "segment": {"resistance_ohm": 0.1, "reactance_ohm": 0.05}},
      {"id": "b2", "parent": "b1",
       "segment": {"resistance_ohm": 0.2, "reactance_ohm": 0.1,
                   "neutral_resistance_ohm": 0.05, "neutral_reactance_ohm": 0.02}}
    ]}
  ],
  "households": [
    {"id": "h1", "feeder": "f1", "bus": "b1", "phase": "a", "pv": true, "battery": true},
    {"id": "h2", "feeder": "f1", "bus": "b2", "phase": "b", "market_participant": true},
    {"id": "h3", "feeder": "f1", "bus": "b2", "phase": "c", "power_factor": 0.95}
  ]
})";

}  // namespace

TEST_CASE("network loader builds the feeder tree and roster") {
  auto net = parse_network(kTinyNetwork);
  CHECK(net.name == "tiny");
  REQUIRE(net.feeders.size() == 1);
  const auto& feeder = net.feeders[0];
  REQUIRE(feeder.buses.size() == 3);  // slack + 2
  CHECK(feeder.buses[1].parent == 0);
  CHECK(feeder.buses[2].parent == 1);
  CHECK(feeder.buses[2].to_parent.neutral_ohm == Complex(0.05, 0.02));
  REQUIRE(net.households.size() == 3);
  CHECK(net.households[0].market_participant);  // pv implies participation
  CHECK(net.households[1].market_participant);
  CHECK_FALSE(net.households[2].market_participant);
  CHECK(net.households[2].power_factor == 0.95);
  CHECK(net.initial_allocation.phase_of(2) == Phase::C);
  CHECK(feeder.electrical_distance_ohm(2) ==
        doctest::Approx(std::abs(Complex(0.1, 0.05)) + std::abs(Complex(0.2, 0.1))));
  auto validation = validate_allocation(net.initial_allocation, net.households);
  CHECK(validation.ok);
}

TEST_CASE("network loader rejects malformed input") {
  // unknown field
  CHECK_THROWS_AS(parse_network(R"({"name":"x","mystery":1,"feeders":[],"households":[]})"),
                  std::runtime_error);
  // forward parent reference (would allow cycles)
  CHECK_THROWS_AS(parse_network(R"({
    "feeders": [{"id": "f1", "buses": [
      {"id": "b1", "parent": "b2", "segment": {"resistance_ohm": 0.1, "reactance_ohm": 0.0}},
      {"id": "b2", "parent": "b1", "segment": {"resistance_ohm": 0.1, "reactance_ohm": 0.0}}
    ]}],
    "households": []})"),
                  std::runtime_error);
  // switchable non-participant
  CHECK_THROWS_AS(parse_network(R"({
    "feeders": [{"id": "f1", "buses": [
      {"id": "b1", "parent": "slack", "segment": {"resistance_ohm": 0.1, "reactance_ohm": 0.0}}
    ]}],
    "households": [{"id": "h1", "feeder": "f1", "bus": "b1", "phase": "a", "switchable": true}]})"),
                  std::runtime_error);
  // negative resistance
  CHECK_THROWS_AS(parse_network(R"({
    "feeders": [{"id": "f1", "buses": [
      {"id": "b1", "parent": "slack", "segment": {"resistance_ohm": -0.1, "reactance_ohm": 0.0}}
    ]}],
    "households": []})"),
                  std::runtime_error);
  // duplicate household ids
  CHECK_THROWS_AS(parse_network(R"({
    "feeders": [{"id": "f1", "buses": [
      {"id": "b1", "parent": "slack", "segment": {"resistance_ohm": 0.1, "reactance_ohm": 0.0}}
    ]}],
    "households": [
      {"id": "h1", "feeder": "f1", "bus": "b1", "phase": "a"},
      {"id": "h1", "feeder": "f1", "bus": "b1", "phase": "b"}
    ]})"),
                  std::runtime_error);
}
