#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gridphase {

using Complex = std::complex<double>;

inline constexpr int kSlotsPerDay = 144;        // 10-minute slots
inline constexpr double kSlotHours = 1.0 / 6.0;
inline constexpr double kDefaultNominalVoltage = 230.0;

enum class Phase : int { A = 0, B = 1, C = 2 };

inline constexpr std::array<Phase, 3> kPhases{Phase::A, Phase::B, Phase::C};

char phase_label(Phase p);
std::optional<Phase> phase_from_label(char label);

// Single-phase customer attached to one bus of one feeder.
struct Household {
  std::string id;
  std::string feeder_id;
  int bus_index = 0;  // local bus index on its feeder
  bool has_pv = false;
  bool has_battery = false;
  bool market_participant = false;
  bool switchable = false;     // dynamic phase switch installed
  double power_factor = 1.0;   // of the net flow, lagging
};

// Boolean 3xH adjacency of households to phases. Columns are households in
// roster order. A well-formed column has exactly one bit set, but the type
// allows malformed columns so validation has something to reject.
class PhaseAllocation {
 public:
  PhaseAllocation() = default;

  static PhaseAllocation from_phases(const std::vector<Phase>& labels);
  static PhaseAllocation from_matrix(std::vector<std::array<bool, 3>> columns);

  int house_count() const { return static_cast<int>(columns_.size()); }
  bool connected(Phase p, int house) const { return columns_.at(house)[static_cast<int>(p)]; }
  const std::array<bool, 3>& column(int house) const { return columns_.at(house); }

  // nullopt when the column does not have exactly one bit set
  std::optional<Phase> phase_of(int house) const;

  bool operator==(const PhaseAllocation&) const = default;

 private:
  explicit PhaseAllocation(std::vector<std::array<bool, 3>> cols) : columns_(std::move(cols)) {}
  std::vector<std::array<bool, 3>> columns_;
};

// Series impedance of a line segment: per-phase self impedance plus a shared
// neutral-return impedance that couples the phases.
struct SegmentImpedance {
  std::array<Complex, 3> phase_ohm{};
  Complex neutral_ohm{};
};

struct Bus {
  std::string id;
  int parent = -1;             // local index of upstream bus; -1 only for the slack
  SegmentImpedance to_parent;  // segment connecting this bus to its parent
};

// Household attachment as seen by the feeder: global roster index plus the
// local bus it hangs from.
struct FeederHouse {
  int house = 0;  // index into the network roster / allocation column
  int bus = 0;    // local bus index
  double power_factor = 1.0;
};

// One radial feeder. buses[0] is the slack (transformer LV busbar) and every
// parent index is smaller than its child's, so sweeps can run over the array.
struct FeederModel {
  std::string id;
  std::vector<Bus> buses;
  std::array<Complex, 3> slack_voltage_v{};
  double nominal_voltage_v = kDefaultNominalVoltage;
  std::vector<FeederHouse> houses;

  // Sum of mean per-phase |Z| along the path to the slack.
  double electrical_distance_ohm(int bus) const;
  bool bus_has_load(int bus) const;
};

// Whole LV network: one transformer busbar feeding one or more radial feeders.
struct NetworkModel {
  std::string name;
  double nominal_voltage_v = kDefaultNominalVoltage;
  std::array<Complex, 3> slack_voltage_v{};
  std::vector<FeederModel> feeders;
  std::vector<Household> households;  // roster order defines allocation columns
  PhaseAllocation initial_allocation;

  int household_index(const std::string& id) const;  // -1 when unknown
  int feeder_index(const std::string& id) const;
  std::vector<int> feeder_households(int feeder) const;  // global indices, ascending
};

// Direct-sequence slack phasors: magnitude at 0 deg, -120 deg, +120 deg.
std::array<Complex, 3> direct_sequence_voltage(double magnitude_v);

// Net power per household for one slot. Positive = consumption from the grid,
// negative = injection.
struct SlotFlows {
  int slot_index = 0;
  std::vector<double> per_house_kw;
};

struct AllocationValidation {
  bool ok = true;
  std::vector<std::string> violating_households;
};

// Checks that every column assigns exactly one phase.
AllocationValidation validate_allocation(const PhaseAllocation& alloc,
                                         const std::vector<Household>& households);

// Re-assigns the decided households, leaving every other column untouched.
// Throws std::invalid_argument when a decision targets a household outside
// the switchable set or the indices are inconsistent.
PhaseAllocation apply_phase_decisions(const PhaseAllocation& current,
                                      const std::map<int, Phase>& decisions,
                                      const std::set<int>& switchable);

// Signed per-phase sums of the subset's flows, in kW.
// Throws std::out_of_range when a subset member has no flow entry.
std::array<double, 3> aggregate_phase_flows(const PhaseAllocation& alloc, const SlotFlows& flows,
                                            const std::vector<int>& subset);

}  // namespace gridphase
