#include "gridphase/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridphase {

namespace {

// Canonical objective evaluation. Both solvers and objective_value go through
// this exact routine, so equal optima compare equal bit-for-bit and
// tie-breaking stays consistent between them. The three squared deviations
// are added in sorted order, which makes the floating-point value invariant
// under phase relabeling.
double canonical_objective(const AllocationProblem& pb, const std::vector<Phase>& assignment) {
  std::array<double, 3> sums{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < pb.commitments_kw.size(); ++i) {
    sums[static_cast<int>(assignment[i])] += pb.commitments_kw[i];
  }
  std::array<double, 3> sq;
  for (int u = 0; u < 3; ++u) {
    const double d = pb.target_kw[u] - sums[u];
    sq[u] = d * d;
  }
  std::sort(sq.begin(), sq.end());
  return sq[0] + sq[1] + sq[2];
}

int switch_count(const AllocationProblem& pb, const std::vector<Phase>& assignment) {
  int count = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != pb.current_phase[i]) ++count;
  }
  return count;
}

struct Incumbent {
  bool valid = false;
  double objective = 0.0;
  int switches = 0;
  std::vector<Phase> assignment;
};

// (objective, switches, lexicographic in phase_order) comparison.
bool improves(const Incumbent& best, double obj, int switches, const std::vector<Phase>& a,
              const std::array<int, 3>& phase_rank) {
  if (!best.valid) return true;
  if (obj != best.objective) return obj < best.objective;
  if (switches != best.switches) return switches < best.switches;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int ra = phase_rank[static_cast<int>(a[i])];
    const int rb = phase_rank[static_cast<int>(best.assignment[i])];
    if (ra != rb) return ra < rb;
  }
  return false;
}

std::array<int, 3> rank_of(const std::array<Phase, 3>& order) {
  std::array<int, 3> rank{};
  for (int r = 0; r < 3; ++r) rank[static_cast<int>(order[r])] = r;
  return rank;
}

void consider(Incumbent& best, const AllocationProblem& pb, const std::vector<Phase>& a,
              const std::array<int, 3>& rank) {
  const double obj = canonical_objective(pb, a);
  const int switches = switch_count(pb, a);
  if (improves(best, obj, switches, a, rank)) {
    best.valid = true;
    best.objective = obj;
    best.switches = switches;
    best.assignment = a;
  }
}

AllocationSolution to_solution(const Incumbent& best, long nodes) {
  AllocationSolution sol;
  sol.assignment = best.assignment;
  sol.objective = best.objective;
  sol.switches_from_current = best.switches;
  sol.optimal = true;
  sol.nodes_explored = nodes;
  return sol;
}

}  // namespace

double CommitmentSet::total_kw() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.power_kw;
  return total;
}

double AllocationProblem::e_total() const {
  return std::accumulate(commitments_kw.begin(), commitments_kw.end(), 0.0);
}

std::vector<std::array<double, 3>> AllocationProblem::p_matrix() const {
  const int m = participant_count();
  std::vector<std::array<double, 3>> p(3 * m, {0.0, 0.0, 0.0});
  for (int u = 0; u < 3; ++u) {
    for (int i = 0; i < m; ++i) p[u * m + i][u] = commitments_kw[i];
  }
  return p;
}

bool AllocationProblem::is_feasible(const std::vector<Phase>& assignment) const {
  if (assignment.size() != current_phase.size()) return false;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (!switchable[i] && assignment[i] != current_phase[i]) return false;
  }
  return true;
}

AllocationProblem build_problem(const CommitmentSet& commitments, const PhaseAllocation& current,
                                const std::set<int>& switchable_houses) {
  double e = commitments.total_kw();
  return build_problem(commitments, current, switchable_houses,
                       {e / 3.0, e / 3.0, e / 3.0});
}

AllocationProblem build_problem(const CommitmentSet& commitments, const PhaseAllocation& current,
                                const std::set<int>& switchable_houses,
                                const std::array<double, 3>& target_kw) {
  if (commitments.entries.empty()) {
    throw std::invalid_argument("cannot build allocation problem from empty commitments");
  }
  AllocationProblem pb;
  pb.target_kw = target_kw;
  for (const auto& entry : commitments.entries) {
    if (entry.house < 0 || entry.house >= current.house_count()) {
      throw std::invalid_argument("committed household index " + std::to_string(entry.house) +
                                  " absent from allocation");
    }
    auto phase = current.phase_of(entry.house);
    if (!phase) {
      throw std::invalid_argument("committed household index " + std::to_string(entry.house) +
                                  " has an invalid allocation column");
    }
    pb.houses.push_back(entry.house);
    pb.commitments_kw.push_back(entry.power_kw);
    pb.current_phase.push_back(*phase);
    pb.switchable.push_back(switchable_houses.contains(entry.house));
  }

  const int m = pb.participant_count();
  const int dim = 3 * m;
  pb.q.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  pb.f.assign(dim, 0.0);
  pb.x0.assign(dim, 0.0);
  for (int u = 0; u < 3; ++u) {
    for (int i = 0; i < m; ++i) {
      const int row = u * m + i;
      for (int j = 0; j < m; ++j) {
        pb.q[static_cast<std::size_t>(row) * dim + u * m + j] =
            pb.commitments_kw[i] * pb.commitments_kw[j];
      }
      pb.f[row] = -2.0 * pb.commitments_kw[i] * pb.target_kw[u];
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!pb.switchable[i]) pb.x0[static_cast<int>(pb.current_phase[i]) * m + i] = 1.0;
  }
  return pb;
}

double objective_value(const AllocationProblem& problem, const std::vector<Phase>& assignment) {
  if (!problem.is_feasible(assignment)) {
    throw std::invalid_argument("assignment violates the allocation constraints");
  }
  return canonical_objective(problem, assignment);
}

std::vector<double> assignment_to_x(const AllocationProblem& problem,
                                    const std::vector<Phase>& assignment) {
  const int m = problem.participant_count();
  std::vector<double> x(3 * m, 0.0);
  for (int i = 0; i < m; ++i) x[static_cast<int>(assignment[i]) * m + i] = 1.0;
  return x;
}

double quadratic_form_value(const AllocationProblem& problem, const std::vector<double>& x) {
  const int dim = 3 * problem.participant_count();
  if (static_cast<int>(x.size()) != dim) {
    throw std::invalid_argument("x has wrong dimension for quadratic form");
  }
  double value = 0.0;
  for (int r = 0; r < dim; ++r) {
    if (x[r] == 0.0) continue;
    double row = 0.0;
    for (int c = 0; c < dim; ++c) row += problem.q[static_cast<std::size_t>(r) * dim + c] * x[c];
    value += x[r] * row + problem.f[r] * x[r];
  }
  return value;
}

double direct_objective_from_x(const AllocationProblem& problem, const std::vector<double>& x) {
  const int dim = 3 * problem.participant_count();
  if (static_cast<int>(x.size()) != dim) {
    throw std::invalid_argument("x has wrong dimension");
  }
  const auto p = problem.p_matrix();
  std::array<double, 3> flows{0.0, 0.0, 0.0};  // P^T x
  for (int r = 0; r < dim; ++r) {
    if (x[r] == 0.0) continue;
    for (int u = 0; u < 3; ++u) flows[u] += p[r][u] * x[r];
  }
  double obj = 0.0;
  for (int u = 0; u < 3; ++u) {
    const double d = problem.target_kw[u] - flows[u];
    obj += d * d;
  }
  return obj;
}

AllocationSolution solve_exhaustive(const AllocationProblem& problem, const SolveOptions& opts) {
  std::vector<int> free_pos;
  for (int i = 0; i < problem.participant_count(); ++i) {
    if (problem.switchable[i]) free_pos.push_back(i);
  }
  const int e = static_cast<int>(free_pos.size());
  if (e > opts.exhaustive_cap) {
    throw std::invalid_argument("exhaustive solve capped at " +
                                std::to_string(opts.exhaustive_cap) + " switchable houses, got " +
                                std::to_string(e));
  }
  const auto rank = rank_of(opts.phase_order);
  Incumbent best;
  std::vector<Phase> assignment = problem.current_phase;
  long total = 1;
  for (int i = 0; i < e; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    long rest = code;
    // first switchable house is the most significant digit -> lexicographic order
    for (int d = e - 1; d >= 0; --d) {
      assignment[free_pos[d]] = opts.phase_order[rest % 3];
      rest /= 3;
    }
    consider(best, problem, assignment, rank);
  }
  return to_solution(best, total);
}

namespace {

struct BnbState {
  const AllocationProblem* pb = nullptr;
  std::array<int, 3> rank{};
  std::array<Phase, 3> order{};
  std::vector<int> pos;         // switchable positions, descending |commitment|
  std::vector<double> pos_rem;  // sum of positive commitments from depth d on
  std::vector<double> neg_rem;  // sum of negative commitments from depth d on
  std::vector<Phase> assignment;
  Incumbent best;
  long nodes = 0;
  bool done = false;  // set once nothing can beat the incumbent
};

double admissible_bound(const BnbState& st, const std::array<double, 3>& sums, int depth) {
  double bound = 0.0;
  for (int u = 0; u < 3; ++u) {
    const double lo = sums[u] + st.neg_rem[depth];
    const double hi = sums[u] + st.pos_rem[depth];
    const double t = st.pb->target_kw[u];
    double d = 0.0;
    if (t < lo) d = lo - t;
    else if (t > hi) d = t - hi;
    bound += d * d;
  }
  return bound;
}

void bnb_recurse(BnbState& st, const std::array<double, 3>& sums, int depth) {
  if (st.done) return;
  ++st.nodes;
  const int e = static_cast<int>(st.pos.size());
  if (depth == e) {
    consider(st.best, *st.pb, st.assignment, st.rank);
    if (st.best.objective == 0.0 && st.best.switches == 0) st.done = true;
    return;
  }
  // Guard keeps floating-point noise in the bound from pruning a subtree that
  // ties the incumbent and could win on the tie-break.
  const double guard = 1e-9 * (1.0 + std::abs(st.best.objective));
  if (st.best.valid && admissible_bound(st, sums, depth) > st.best.objective + guard) return;
  const int house = st.pos[depth];
  for (Phase p : st.order) {
    st.assignment[house] = p;
    auto next = sums;
    next[static_cast<int>(p)] += st.pb->commitments_kw[house];
    bnb_recurse(st, next, depth + 1);
    if (st.done) break;
  }
  st.assignment[house] = st.pb->current_phase[house];
}

}  // namespace

AllocationSolution solve_branch_and_bound(const AllocationProblem& problem,
                                          const SolveOptions& opts) {
  BnbState st;
  st.pb = &problem;
  st.rank = rank_of(opts.phase_order);
  st.order = opts.phase_order;
  for (int i = 0; i < problem.participant_count(); ++i) {
    if (problem.switchable[i]) st.pos.push_back(i);
  }
  std::sort(st.pos.begin(), st.pos.end(), [&](int a, int b) {
    const double ma = std::abs(problem.commitments_kw[a]);
    const double mb = std::abs(problem.commitments_kw[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  const int e = static_cast<int>(st.pos.size());
  st.pos_rem.assign(e + 1, 0.0);
  st.neg_rem.assign(e + 1, 0.0);
  for (int d = e - 1; d >= 0; --d) {
    const double p = problem.commitments_kw[st.pos[d]];
    st.pos_rem[d] = st.pos_rem[d + 1] + std::max(p, 0.0);
    st.neg_rem[d] = st.neg_rem[d + 1] + std::min(p, 0.0);
  }
  st.assignment = problem.current_phase;

  // The current allocation is always feasible; seed the incumbent with it so
  // the solution can never be worse than keeping x0.
  consider(st.best, problem, st.assignment, st.rank);
  if (st.best.objective == 0.0 && st.best.switches == 0) return to_solution(st.best, 1);

  std::array<double, 3> base{0.0, 0.0, 0.0};
  for (int i = 0; i < problem.participant_count(); ++i) {
    if (!problem.switchable[i]) {
      base[static_cast<int>(problem.current_phase[i])] += problem.commitments_kw[i];
    }
  }
  bnb_recurse(st, base, 0);
  return to_solution(st.best, st.nodes);
}

std::string problem_to_json(const AllocationProblem& problem) {
  nlohmann::json j;
  j["houses"] = problem.houses;
  j["commitments_kw"] = problem.commitments_kw;
  std::string phases;
  for (Phase p : problem.current_phase) phases.push_back(phase_label(p));
  j["current_phases"] = phases;
  std::vector<int> switchable;
  for (int i = 0; i < problem.participant_count(); ++i) {
    if (problem.switchable[i]) switchable.push_back(i);
  }
  j["switchable"] = switchable;
  j["target_kw"] = problem.target_kw;
  return j.dump(2);
}

std::vector<AllocatorCase> load_allocator_cases(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open allocator case file " + path);
  nlohmann::json root = nlohmann::json::parse(in);
  std::vector<AllocatorCase> cases;
  for (const auto& jc : root.at("cases")) {
    AllocatorCase c;
    c.name = jc.at("name").get<std::string>();
    const auto commitments = jc.at("commitments_kw").get<std::vector<double>>();
    const std::string phases = jc.at("current_phases").get<std::string>();
    if (phases.size() != commitments.size()) {
      throw std::runtime_error("case " + c.name + ": phases and commitments differ in length");
    }
    std::vector<Phase> labels;
    for (char ch : phases) {
      auto p = phase_from_label(ch);
      if (!p) throw std::runtime_error("case " + c.name + ": bad phase label");
      labels.push_back(*p);
    }
    CommitmentSet set;
    std::set<int> switchable;
    for (std::size_t i = 0; i < commitments.size(); ++i) {
      set.entries.push_back({static_cast<int>(i), commitments[i]});
    }
    for (int idx : jc.at("switchable").get<std::vector<int>>()) switchable.insert(idx);
    c.problem = build_problem(set, PhaseAllocation::from_phases(labels), switchable);
    if (jc.contains("expected_objective")) {
      c.has_expected = true;
      c.expected_objective = jc["expected_objective"].get<double>();
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace gridphase
