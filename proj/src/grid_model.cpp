#include "gridphase/grid_model.hpp"

#include <cmath>
#include <stdexcept>

namespace gridphase {

char phase_label(Phase p) {
  switch (p) {
    case Phase::A: return 'a';
    case Phase::B: return 'b';
    case Phase::C: return 'c';
  }
  return '?';
}

std::optional<Phase> phase_from_label(char label) {
  switch (label) {
    case 'a': case 'A': return Phase::A;
    case 'b': case 'B': return Phase::B;
    case 'c': case 'C': return Phase::C;
    default: return std::nullopt;
  }
}

PhaseAllocation PhaseAllocation::from_phases(const std::vector<Phase>& labels) {
  std::vector<std::array<bool, 3>> cols(labels.size(), {false, false, false});
  for (std::size_t h = 0; h < labels.size(); ++h) {
    cols[h][static_cast<int>(labels[h])] = true;
  }
  return PhaseAllocation(std::move(cols));
}

PhaseAllocation PhaseAllocation::from_matrix(std::vector<std::array<bool, 3>> columns) {
  return PhaseAllocation(std::move(columns));
}

std::optional<Phase> PhaseAllocation::phase_of(int house) const {
  const auto& col = columns_.at(house);
  int count = 0;
  Phase found = Phase::A;
  for (Phase p : kPhases) {
    if (col[static_cast<int>(p)]) {
      ++count;
      found = p;
    }
  }
  if (count != 1) return std::nullopt;
  return found;
}

double FeederModel::electrical_distance_ohm(int bus) const {
  double dist = 0.0;
  int b = bus;
  while (b > 0) {
    const auto& z = buses[b].to_parent.phase_ohm;
    dist += (std::abs(z[0]) + std::abs(z[1]) + std::abs(z[2])) / 3.0;
    b = buses[b].parent;
  }
  return dist;
}

bool FeederModel::bus_has_load(int bus) const {
  for (const auto& fh : houses) {
    if (fh.bus == bus) return true;
  }
  return false;
}

int NetworkModel::household_index(const std::string& id) const {
  for (std::size_t i = 0; i < households.size(); ++i) {
    if (households[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int NetworkModel::feeder_index(const std::string& id) const {
  for (std::size_t i = 0; i < feeders.size(); ++i) {
    if (feeders[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> NetworkModel::feeder_households(int feeder) const {
  std::vector<int> out;
  for (const auto& fh : feeders.at(feeder).houses) out.push_back(fh.house);
  return out;
}

std::array<Complex, 3> direct_sequence_voltage(double magnitude_v) {
  const double rad = 2.0 * M_PI / 3.0;
  return {Complex(magnitude_v, 0.0), magnitude_v * std::polar(1.0, -rad),
          magnitude_v * std::polar(1.0, rad)};
}

AllocationValidation validate_allocation(const PhaseAllocation& alloc,
                                         const std::vector<Household>& households) {
  AllocationValidation result;
  if (alloc.house_count() != static_cast<int>(households.size())) {
    result.ok = false;
    result.violating_households.push_back("<dimension mismatch>");
    return result;
  }
  for (std::size_t h = 0; h < households.size(); ++h) {
    if (!alloc.phase_of(static_cast<int>(h)).has_value()) {
      result.ok = false;
      result.violating_households.push_back(households[h].id);
    }
  }
  return result;
}

PhaseAllocation apply_phase_decisions(const PhaseAllocation& current,
                                      const std::map<int, Phase>& decisions,
                                      const std::set<int>& switchable) {
  std::vector<std::array<bool, 3>> cols;
  cols.reserve(current.house_count());
  for (int h = 0; h < current.house_count(); ++h) cols.push_back(current.column(h));
  for (const auto& [house, phase] : decisions) {
    if (house < 0 || house >= current.house_count()) {
      throw std::invalid_argument("phase decision for unknown household index " +
                                  std::to_string(house));
    }
    if (!switchable.contains(house)) {
      throw std::invalid_argument("phase decision targets non-switchable household index " +
                                  std::to_string(house));
    }
    cols[house] = {false, false, false};
    cols[house][static_cast<int>(phase)] = true;
  }
  return PhaseAllocation::from_matrix(std::move(cols));
}

std::array<double, 3> aggregate_phase_flows(const PhaseAllocation& alloc, const SlotFlows& flows,
                                            const std::vector<int>& subset) {
  std::array<double, 3> sums{0.0, 0.0, 0.0};
  for (int house : subset) {
    if (house < 0 || house >= static_cast<int>(flows.per_house_kw.size())) {
      throw std::out_of_range("no flow entry for household index " + std::to_string(house));
    }
    const auto& col = alloc.column(house);
    for (Phase p : kPhases) {
      if (col[static_cast<int>(p)]) sums[static_cast<int>(p)] += flows.per_house_kw[house];
    }
  }
  return sums;
}

}  // namespace gridphase
