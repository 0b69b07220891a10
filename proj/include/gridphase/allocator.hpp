#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "gridphase/grid_model.hpp"

namespace gridphase {

// Signed committed power of one market participant for one slot.
struct CommitmentEntry {
  int house = 0;  // index into the allocation columns
  double power_kw = 0.0;
};

// Commitments of the M participants of one feeder for one slot.
struct CommitmentSet {
  int slot_index = 0;
  std::vector<CommitmentEntry> entries;

  double total_kw() const;
};

// Per-slot allocation problem:
//
//   min over x in B^{3M}   || e_bar - P^T x ||^2
//
// with x = [x_a, x_b, x_c] stacking the per-phase membership of the M
// participants, P the 3Mx3 block diagonal built from the commitment vector
// p, e_bar the balanced per-phase target, one phase per house, and fixed
// houses pinned to their current phase. The equivalent quadratic form uses
// Q = P P^T and f = -2 P e_bar, so that
//   x^T Q x + f^T x + e_bar . e_bar  ==  || e_bar - P^T x ||^2.
struct AllocationProblem {
  std::vector<int> houses;            // global index per participant slot
  std::vector<double> commitments_kw; // p, participant order
  std::array<double, 3> target_kw{};  // e_bar
  std::vector<Phase> current_phase;   // x0 as labels, participant order
  std::vector<bool> switchable;       // mask, participant order

  // Materialized quadratic reformulation.
  std::vector<double> q;   // 3M x 3M, row major
  std::vector<double> f;   // 3M
  std::vector<double> x0;  // current allocation with zeros on switchable slots

  int participant_count() const { return static_cast<int>(commitments_kw.size()); }
  double e_total() const;
  double e_mean() const { return e_total() / 3.0; }

  // The 3Mx3 block-diagonal matrix P itself, row r = (phase u, participant i).
  std::vector<std::array<double, 3>> p_matrix() const;

  // Constraint check: one phase per house, fixed houses unchanged.
  bool is_feasible(const std::vector<Phase>& assignment) const;
};

struct AllocationSolution {
  std::vector<Phase> assignment;  // participant order
  double objective = 0.0;         // || e_bar - P^T x ||^2
  int switches_from_current = 0;
  bool optimal = false;
  long nodes_explored = 0;
};

struct SolveOptions {
  // Phase preference used for lexicographic tie-breaking and branching order.
  std::array<Phase, 3> phase_order{Phase::A, Phase::B, Phase::C};
  int exhaustive_cap = 12;  // max switchable houses for full enumeration
};

// Builds the per-slot problem from the commitments, the current allocation
// and the switch-equipped houses. Throws std::invalid_argument when a
// committed house has no valid allocation column.
AllocationProblem build_problem(const CommitmentSet& commitments, const PhaseAllocation& current,
                                const std::set<int>& switchable_houses);

// Variant with an explicit per-phase target (used when background flows of
// non-participants are folded into the balance goal).
AllocationProblem build_problem(const CommitmentSet& commitments, const PhaseAllocation& current,
                                const std::set<int>& switchable_houses,
                                const std::array<double, 3>& target_kw);

// Exact least-squares value of a feasible assignment; throws
// std::invalid_argument for infeasible input.
double objective_value(const AllocationProblem& problem, const std::vector<Phase>& assignment);

// Helpers for the quadratic reformulation, used by verification code.
std::vector<double> assignment_to_x(const AllocationProblem& problem,
                                    const std::vector<Phase>& assignment);
double quadratic_form_value(const AllocationProblem& problem, const std::vector<double>& x);
double direct_objective_from_x(const AllocationProblem& problem, const std::vector<double>& x);

// Global optimum by enumerating all 3^E assignments of the switchable houses.
// Ties break on fewest switches from the current allocation, then on the
// lexicographically smallest assignment in phase_order. Throws when E exceeds
// the cap.
AllocationSolution solve_exhaustive(const AllocationProblem& problem, const SolveOptions& = {});

// Same optimum and same tie-breaking, via depth-first branch and bound over
// houses in descending |commitment| order.
//
// Bound: with partial per-phase sums s_i and the unassigned commitments split
// into positive total Pos and negative total Neg, any completion lands phase
// i in [s_i + Neg, s_i + Pos]. The per-phase distance from target_i to that
// interval is a deviation no completion can avoid, so the sum of squared
// clamped distances is an admissible lower bound (it drops the coupling that
// every house lands on exactly one phase).
AllocationSolution solve_branch_and_bound(const AllocationProblem& problem,
                                          const SolveOptions& = {});

// Serialization of problem instances for regression corpora. The JSON object
// carries commitments, current phases, the switchable mask and optionally an
// expected objective.
std::string problem_to_json(const AllocationProblem& problem);
struct AllocatorCase {
  std::string name;
  AllocationProblem problem;
  bool has_expected = false;
  double expected_objective = 0.0;
};
std::vector<AllocatorCase> load_allocator_cases(const std::string& path);

}  // namespace gridphase
