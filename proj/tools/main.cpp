#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridphase/harness.hpp"
#include "gridphase/network_io.hpp"

#ifndef GRIDPHASE_DATA_DIR
#define GRIDPHASE_DATA_DIR "data"
#endif

namespace {

using namespace gridphase;

int cmd_run(const std::string& config_path, std::uint64_t seed, bool seed_set,
            const std::string& out_dir, const std::string& format, bool allow_nonconverged,
            bool verbose) {
  ScenarioConfig cfg = load_scenario(config_path);
  if (seed_set) cfg.seed = seed;
  if (verbose) cfg.verbose_voltages = true;
  MetricsReport report = run_scenario(cfg);
  auto written = emit_report(report, report_format_from_string(format), out_dir);
  std::printf("scenario %s (%s/%s, k=%d, seed=%llu)\n", report.scenario.c_str(),
              report.allocation.c_str(), report.selection.c_str(), report.switch_budget,
              static_cast<unsigned long long>(report.seed));
  std::printf("  peak VUF %.4f %%   mean VUF %.4f %%   V in [%.4f, %.4f] pu\n",
              report.peak_vuf_percent, report.mean_vuf_percent, report.min_v_pu, report.max_v_pu);
  std::printf("  losses %.3f kWh   transformer %.3f kWh (peak %.3f kW)\n", report.line_losses_kwh,
              report.transformer_energy_kwh, report.peak_transformer_kw);
  std::printf("  switch operations %d   switches installed %d   unconverged slots %d\n",
              report.switch_operations, report.switches_installed, report.unconverged_slots);
  for (const auto& path : written) std::printf("  wrote %s\n", path.c_str());
  if (report.unconverged_slots > 0 && !allow_nonconverged) {
    std::fprintf(stderr, "error: %d slots did not converge (pass --allow-nonconverged to ignore)\n",
                 report.unconverged_slots);
    return 2;
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths, const std::string& out_dir,
                const std::string& format, double price_eur_per_mwh, bool allow_nonconverged) {
  std::vector<ScenarioConfig> configs;
  for (const auto& path : config_paths) configs.push_back(load_scenario(path));
  std::vector<MetricsReport> reports;
  for (const auto& cfg : configs) reports.push_back(run_scenario(cfg));
  StrategyComparison cmp = compare_reports(reports);
  auto written = emit_comparison(cmp, report_format_from_string(format), out_dir);
  std::fputs(comparison_to_text(cmp).c_str(), stdout);

  int baseline = -1;
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    if (cmp.rows[i].is_baseline) baseline = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (static_cast<int>(i) == baseline) continue;
    auto eco = economic_summary(reports[baseline], reports[i], price_eur_per_mwh);
    std::printf("%s vs baseline: %.4f MWh/year saved, %.2f EUR/year at %.0f EUR/MWh\n",
                reports[i].scenario.c_str(), eco.losses_saved_mwh_per_year,
                eco.value_eur_per_year, price_eur_per_mwh);
  }
  for (const auto& path : written) std::printf("wrote %s\n", path.c_str());

  int unconverged = 0;
  for (const auto& r : reports) unconverged += r.unconverged_slots;
  if (unconverged > 0 && !allow_nonconverged) {
    std::fprintf(stderr, "error: %d slots did not converge (pass --allow-nonconverged to ignore)\n",
                 unconverged);
    return 2;
  }
  return 0;
}

int cmd_presets(const std::string& data_dir) {
  const std::vector<std::string> names{"scenario_a", "scenario_b", "scenario_c", "scenario_d",
                                       "impact33"};
  std::printf("%-12s %-8s %-7s %3s %5s %5s  %s\n", "preset", "alloc", "select", "k", "pv", "batt",
              "config");
  bool any = false;
  for (const auto& name : names) {
    const auto path = std::filesystem::path(data_dir) / "presets" / (name + ".json");
    if (!std::filesystem::exists(path)) continue;
    any = true;
    try {
      ScenarioConfig cfg = load_scenario(path.string());
      auto frac = [](const std::optional<double>& f) {
        char buf[8];
        if (f) std::snprintf(buf, sizeof(buf), "%5.2f", *f);
        else std::snprintf(buf, sizeof(buf), "%5s", "-");
        return std::string(buf);
      };
      std::printf("%-12s %-8s %-7s %3d %s %s  %s\n", name.c_str(),
                  to_string(cfg.allocation).c_str(), to_string(cfg.selection).c_str(),
                  cfg.switch_budget, frac(cfg.pv_fraction).c_str(),
                  frac(cfg.battery_fraction).c_str(), path.string().c_str());
    } catch (const std::exception& e) {
      std::printf("%-12s (invalid: %s)\n", name.c_str(), e.what());
    }
  }
  if (!any) {
    std::fprintf(stderr, "no presets found under %s/presets\n", data_dir.c_str());
    return 1;
  }
  return 0;
}

int cmd_validate(const std::string& network_path) {
  try {
    NetworkModel net = load_network(network_path);
    int buses = 0;
    for (const auto& feeder : net.feeders) buses += static_cast<int>(feeder.buses.size()) - 1;
    int participants = 0, pv = 0, battery = 0;
    for (const auto& hh : net.households) {
      participants += hh.market_participant ? 1 : 0;
      pv += hh.has_pv ? 1 : 0;
      battery += hh.has_battery ? 1 : 0;
    }
    std::printf("%s: OK\n", network_path.c_str());
    std::printf("  %zu feeders, %d buses, %zu households (%d participants, %d pv, %d battery)\n",
                net.feeders.size(), buses, net.households.size(), participants, pv, battery);
    auto validation = validate_allocation(net.initial_allocation, net.households);
    std::printf("  initial allocation: %s\n", validation.ok ? "valid" : "INVALID");
    return validation.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: INVALID\n  %s\n", network_path.c_str(), e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridphase - LV feeder simulator for market-driven dynamic phase switching"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", format = "both";
  std::uint64_t seed = 0;
  bool allow_nonconverged = false;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "Run one scenario and emit its reports");
  run->add_option("--config", config_path, "Scenario config JSON")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory (default: out)");
  run->add_option("--format", format, "csv|json|both (default: both)");
  run->add_flag("--verbose", verbose, "Also emit per-slot bus/phase voltage rows");
  run->add_flag("--allow-nonconverged", allow_nonconverged,
                "Exit 0 even when slots fail to converge");

  std::vector<std::string> config_paths;
  double price = 40.0;
  auto* cmp = app.add_subcommand("compare", "Run several configs and compare against the "
                                            "no-switching baseline");
  cmp->add_option("--configs", config_paths, "Scenario config JSONs (exactly one allocation=none)")
      ->required()
      ->expected(-2);
  cmp->add_option("--out", out_dir, "Output directory (default: out)");
  cmp->add_option("--format", format, "csv|json|both (default: both)");
  cmp->add_option("--price-eur-mwh", price, "Electricity price for the loss valuation");
  cmp->add_flag("--allow-nonconverged", allow_nonconverged,
                "Exit 0 even when slots fail to converge");

  std::string data_dir = GRIDPHASE_DATA_DIR;
  auto* presets = app.add_subcommand("presets", "List the shipped preset scenarios");
  presets->add_option("--data-dir", data_dir, "Data directory holding presets/");

  std::string network_path;
  auto* validate = app.add_subcommand("validate", "Check a network file against the schema");
  validate->add_option("--network", network_path, "Network JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(config_path, seed, seed_opt->count() > 0, out_dir, format,
                     allow_nonconverged, verbose);
    }
    if (cmp->parsed()) {
      return cmd_compare(config_paths, out_dir, format, price, allow_nonconverged);
    }
    if (presets->parsed()) return cmd_presets(data_dir);
    if (validate->parsed()) return cmd_validate(network_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
