#include "gridphase/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridphase {

namespace {

double spread(const std::array<double, 3>& sums) {
  return *std::max_element(sums.begin(), sums.end()) -
         *std::min_element(sums.begin(), sums.end());
}

// Phase with the highest / lowest horizon-average voltage; ties resolve to
// the lower phase index.
int argmax_phase(const std::array<double, 3>& v) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

int argmin_phase(const std::array<double, 3>& v) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

void check_ctx(const SelectionContext& ctx) {
  if (ctx.long_run_avg_kw.size() != ctx.households.size() ||
      ctx.current.house_count() != static_cast<int>(ctx.households.size())) {
    throw std::invalid_argument("selection context sizes do not match the roster");
  }
  if (ctx.budget < 0) throw std::invalid_argument("selection budget must be non-negative");
}

// HAF pool membership and ranking tier. Tier 0: PV on the highest-voltage
// phase. Tier 1: non-PV participant on the lowest-voltage phase. Tier 2:
// non-PV participant on the middle phase. -1: not in the pool.
int haf_tier(const SelectionContext& ctx, int house, int vmax, int vmin) {
  const Household& hh = ctx.households[house];
  if (!hh.market_participant) return -1;
  auto phase = ctx.current.phase_of(house);
  if (!phase) return -1;
  const int p = static_cast<int>(*phase);
  if (hh.has_pv) return p == vmax ? 0 : -1;
  if (p == vmax) return -1;
  return p == vmin ? 1 : 2;
}

// |average flow| descending, then tier, then id.
void haf_sort(std::vector<int>& pool, const SelectionContext& ctx, int vmax, int vmin) {
  std::sort(pool.begin(), pool.end(), [&](int a, int b) {
    const double ma = std::abs(ctx.long_run_avg_kw[a]);
    const double mb = std::abs(ctx.long_run_avg_kw[b]);
    if (ma != mb) return ma > mb;
    const int ta = haf_tier(ctx, a, vmax, vmin);
    const int tb = haf_tier(ctx, b, vmax, vmin);
    if (ta != tb) return ta < tb;
    return ctx.households[a].id < ctx.households[b].id;
  });
}

std::vector<MeanBasedMove> mean_based_moves(const SelectionContext& ctx, int budget) {
  std::vector<int> participants;
  for (std::size_t h = 0; h < ctx.households.size(); ++h) {
    if (ctx.households[h].market_participant) participants.push_back(static_cast<int>(h));
  }
  std::vector<int> phase_of(ctx.households.size(), -1);
  std::array<double, 3> sums{0.0, 0.0, 0.0};
  for (int h : participants) {
    auto p = ctx.current.phase_of(h);
    if (!p) throw std::invalid_argument("selection requires a valid current allocation");
    phase_of[h] = static_cast<int>(*p);
    sums[phase_of[h]] += ctx.long_run_avg_kw[h];
  }

  std::vector<MeanBasedMove> moves;
  std::vector<bool> picked(ctx.households.size(), false);
  while (static_cast<int>(moves.size()) < budget) {
    const double current_spread = spread(sums);
    bool found = false;
    int best_house = -1;
    int best_phase = -1;
    double best_spread = current_spread;
    for (int h : participants) {
      if (picked[h]) continue;
      for (int to = 0; to < 3; ++to) {
        if (to == phase_of[h]) continue;
        auto trial = sums;
        trial[phase_of[h]] -= ctx.long_run_avg_kw[h];
        trial[to] += ctx.long_run_avg_kw[h];
        const double s = spread(trial);
        if (s >= current_spread) continue;  // only strict improvements
        // ties: smallest household id, then first phase in a-b-c order
        const bool better =
            !found || s < best_spread ||
            (s == best_spread && ctx.households[h].id < ctx.households[best_house].id);
        if (better) {
          found = true;
          best_house = h;
          best_phase = to;
          best_spread = s;
        }
      }
    }
    if (!found) break;
    sums[phase_of[best_house]] -= ctx.long_run_avg_kw[best_house];
    sums[best_phase] += ctx.long_run_avg_kw[best_house];
    phase_of[best_house] = best_phase;
    picked[best_house] = true;
    moves.push_back({best_house, static_cast<Phase>(best_phase)});
  }
  return moves;
}

}  // namespace

std::vector<MeanBasedMove> select_mean_based_moves(const SelectionContext& ctx) {
  check_ctx(ctx);
  return mean_based_moves(ctx, ctx.budget);
}

std::vector<int> select_mean_based(const SelectionContext& ctx) {
  std::vector<int> houses;
  for (const auto& move : select_mean_based_moves(ctx)) houses.push_back(move.house);
  return houses;
}

std::vector<int> select_haf(const SelectionContext& ctx) {
  check_ctx(ctx);
  const int vmax = argmax_phase(ctx.per_phase_avg_voltage_v);
  const int vmin = argmin_phase(ctx.per_phase_avg_voltage_v);
  std::vector<int> pool;
  for (std::size_t h = 0; h < ctx.households.size(); ++h) {
    if (haf_tier(ctx, static_cast<int>(h), vmax, vmin) >= 0) pool.push_back(static_cast<int>(h));
  }
  haf_sort(pool, ctx, vmax, vmin);
  if (static_cast<int>(pool.size()) > ctx.budget) pool.resize(ctx.budget);
  return pool;
}

std::vector<int> select_hybrid(const SelectionContext& ctx) {
  check_ctx(ctx);
  if (ctx.budget == 0) return {};
  const int pre_budget = std::max(2 * ctx.budget, ctx.budget + 2);
  const auto pre = mean_based_moves(ctx, pre_budget);
  const int vmax = argmax_phase(ctx.per_phase_avg_voltage_v);
  const int vmin = argmin_phase(ctx.per_phase_avg_voltage_v);
  std::vector<int> pool;
  for (const auto& move : pre) {
    if (haf_tier(ctx, move.house, vmax, vmin) >= 0) pool.push_back(move.house);
  }
  haf_sort(pool, ctx, vmax, vmin);
  if (static_cast<int>(pool.size()) > ctx.budget) pool.resize(ctx.budget);
  return pool;
}

}  // namespace gridphase
