#pragma once

#include <array>
#include <vector>

#include "gridphase/grid_model.hpp"

namespace gridphase {

// Horizon statistics the switch-placement heuristics work from. The averages
// must come from the same horizon and network the run evaluates.
struct SelectionContext {
  std::vector<double> long_run_avg_kw;             // signed mean net flow per household
  std::array<double, 3> per_phase_avg_voltage_v{}; // horizon mean |V| per phase at the probe bus
  PhaseAllocation current;
  std::vector<Household> households;
  int budget = 0;  // k
};

struct MeanBasedMove {
  int house = 0;
  Phase to = Phase::A;
};

// Greedy static rebalancing: repeatedly applies the single (house, phase)
// move that shrinks the spread (max - min) of per-phase average participant
// flows the most, stopping after k picks or when no move strictly improves.
std::vector<MeanBasedMove> select_mean_based_moves(const SelectionContext& ctx);
std::vector<int> select_mean_based(const SelectionContext& ctx);

// Highest average flow: pool of PV houses on the highest-voltage phase plus
// non-PV participants off that phase, ranked by |average flow| descending
// (lowest-voltage-phase members win ties), first k.
std::vector<int> select_haf(const SelectionContext& ctx);

// Mean-based pre-selection with budget max(2k, k+2), filtered and ranked by
// the HAF rule, first k.
std::vector<int> select_hybrid(const SelectionContext& ctx);

}  // namespace gridphase
