#include "gridphase/report.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridphase {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string sanitize(const std::string& name) {
  std::string out = name.empty() ? std::string("report") : name;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report file " + path);
  return out;
}

json summary_json(const MetricsReport& r) {
  json j;
  j["scenario"] = r.scenario;
  j["allocation"] = r.allocation;
  j["selection"] = r.selection;
  j["seed"] = r.seed;
  j["horizon_days"] = r.horizon_days;
  j["slots"] = r.slots;
  j["switch_budget"] = r.switch_budget;
  j["feeders"] = r.feeder_ids;
  j["peak_vuf_percent"] = r.peak_vuf_percent;
  j["mean_vuf_percent"] = r.mean_vuf_percent;
  j["min_v_pu"] = r.min_v_pu;
  j["max_v_pu"] = r.max_v_pu;
  j["line_losses_kwh"] = r.line_losses_kwh;
  j["transformer_energy_kwh"] = r.transformer_energy_kwh;
  j["peak_transformer_kw"] = r.peak_transformer_kw;
  j["switch_operations"] = r.switch_operations;
  j["switches_installed"] = r.switches_installed;
  j["unconverged_slots"] = r.unconverged_slots;
  return j;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  if (text == "both") return ReportFormat::Both;
  throw std::invalid_argument("unknown report format \"" + text + "\" (csv|json|both)");
}

std::vector<std::string> emit_report(const MetricsReport& report, ReportFormat format,
                                     const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string stem = (std::filesystem::path(out_dir) / sanitize(report.scenario)).string();
  std::vector<std::string> written;

  if (format == ReportFormat::Csv || format == ReportFormat::Both) {
    {
      auto out = open_out(stem + "_slots.csv");
      out << "slot,feeder,peak_vuf_percent,min_v_pu,max_v_pu,line_losses_kw,switches,converged\n";
      for (const auto& rec : report.series) {
        out << rec.slot << ',' << report.feeder_ids.at(rec.feeder) << ','
            << fmt(rec.peak_vuf_percent) << ',' << fmt(rec.min_v_pu) << ',' << fmt(rec.max_v_pu)
            << ',' << fmt(rec.line_losses_kw) << ',' << rec.switches << ','
            << (rec.converged ? 1 : 0) << "\n";
      }
      written.push_back(stem + "_slots.csv");
    }
    {
      auto out = open_out(stem + "_vuf_surface.csv");
      out << "slot,feeder,bus,vuf_percent\n";
      for (const auto& row : report.vuf_surface) {
        out << row.slot << ',' << report.feeder_ids.at(row.feeder) << ',' << row.bus << ','
            << fmt(row.vuf_percent) << "\n";
      }
      written.push_back(stem + "_vuf_surface.csv");
    }
    if (!report.voltage_rows.empty()) {
      auto out = open_out(stem + "_voltages.csv");
      out << "slot,feeder,bus,phase,v_mag,v_angle_deg,vuf_percent\n";
      for (const auto& row : report.voltage_rows) {
        out << row.slot << ',' << report.feeder_ids.at(row.feeder) << ',' << row.bus << ','
            << row.phase << ',' << fmt(row.v_mag) << ',' << fmt(row.v_angle_deg) << ','
            << fmt(row.vuf_percent) << "\n";
      }
      written.push_back(stem + "_voltages.csv");
    }
  }
  if (format == ReportFormat::Json || format == ReportFormat::Both) {
    auto out = open_out(stem + "_summary.json");
    out << summary_json(report).dump(2) << "\n";
    written.push_back(stem + "_summary.json");
  }
  return written;
}

MetricsReport parse_summary_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open summary " + path);
  json j = json::parse(in);
  MetricsReport r;
  r.scenario = j.at("scenario").get<std::string>();
  r.allocation = j.at("allocation").get<std::string>();
  r.selection = j.at("selection").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.horizon_days = j.at("horizon_days").get<int>();
  r.slots = j.at("slots").get<int>();
  r.switch_budget = j.at("switch_budget").get<int>();
  r.feeder_ids = j.at("feeders").get<std::vector<std::string>>();
  r.peak_vuf_percent = j.at("peak_vuf_percent").get<double>();
  r.mean_vuf_percent = j.at("mean_vuf_percent").get<double>();
  r.min_v_pu = j.at("min_v_pu").get<double>();
  r.max_v_pu = j.at("max_v_pu").get<double>();
  r.line_losses_kwh = j.at("line_losses_kwh").get<double>();
  r.transformer_energy_kwh = j.at("transformer_energy_kwh").get<double>();
  r.peak_transformer_kw = j.at("peak_transformer_kw").get<double>();
  r.switch_operations = j.at("switch_operations").get<int>();
  r.switches_installed = j.at("switches_installed").get<int>();
  r.unconverged_slots = j.at("unconverged_slots").get<int>();
  return r;
}

bool summary_equal(const MetricsReport& a, const MetricsReport& b) {
  return summary_json(a) == summary_json(b);
}

std::vector<std::string> emit_comparison(const StrategyComparison& cmp, ReportFormat format,
                                         const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  const std::string stem = (std::filesystem::path(out_dir) / sanitize(name)).string();
  std::vector<std::string> written;

  if (format == ReportFormat::Csv || format == ReportFormat::Both) {
    auto out = open_out(stem + ".csv");
    out << "name,allocation,selection,switch_budget,baseline,peak_vuf_percent,mean_vuf_percent,"
           "delta_peak_vuf,delta_mean_vuf,delta_losses_kwh,delta_min_v_pu,delta_max_v_pu,"
           "transformer_energy_kwh,peak_transformer_kw,switch_operations,switches_installed,"
           "exceeds_vuf_limit\n";
    for (const auto& row : cmp.rows) {
      out << row.name << ',' << row.allocation << ',' << row.selection << ',' << row.switch_budget
          << ',' << (row.is_baseline ? 1 : 0) << ',' << fmt(row.peak_vuf_percent) << ','
          << fmt(row.mean_vuf_percent) << ',' << fmt(row.delta_peak_vuf) << ','
          << fmt(row.delta_mean_vuf) << ',' << fmt(row.delta_losses_kwh) << ','
          << fmt(row.delta_min_v_pu) << ',' << fmt(row.delta_max_v_pu) << ','
          << fmt(row.transformer_energy_kwh) << ',' << fmt(row.peak_transformer_kw) << ','
          << row.switch_operations << ',' << row.switches_installed << ','
          << (row.exceeds_vuf_limit ? 1 : 0) << "\n";
    }
    written.push_back(stem + ".csv");
  }
  if (format == ReportFormat::Json || format == ReportFormat::Both) {
    json j;
    j["vuf_limit_percent"] = cmp.vuf_limit_percent;
    j["rows"] = json::array();
    for (const auto& row : cmp.rows) {
      json r;
      r["name"] = row.name;
      r["allocation"] = row.allocation;
      r["selection"] = row.selection;
      r["switch_budget"] = row.switch_budget;
      r["baseline"] = row.is_baseline;
      r["peak_vuf_percent"] = row.peak_vuf_percent;
      r["mean_vuf_percent"] = row.mean_vuf_percent;
      r["delta_peak_vuf"] = row.delta_peak_vuf;
      r["delta_mean_vuf"] = row.delta_mean_vuf;
      r["delta_losses_kwh"] = row.delta_losses_kwh;
      r["delta_min_v_pu"] = row.delta_min_v_pu;
      r["delta_max_v_pu"] = row.delta_max_v_pu;
      r["transformer_energy_kwh"] = row.transformer_energy_kwh;
      r["peak_transformer_kw"] = row.peak_transformer_kw;
      r["switch_operations"] = row.switch_operations;
      r["switches_installed"] = row.switches_installed;
      r["exceeds_vuf_limit"] = row.exceeds_vuf_limit;
      j["rows"].push_back(std::move(r));
    }
    auto out = open_out(stem + ".json");
    out << j.dump(2) << "\n";
    written.push_back(stem + ".json");
  }
  return written;
}

std::string comparison_to_text(const StrategyComparison& cmp) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %-8s %-7s %3s  %9s %9s %10s %9s %5s %5s %s\n", "name",
                "alloc", "select", "k", "peakVUF%", "dPeak", "dLoss_kWh", "dMeanVUF", "ops",
                "inst", "flag");
  out << line;
  for (const auto& row : cmp.rows) {
    std::snprintf(line, sizeof(line), "%-24s %-8s %-7s %3d  %9.4f %9.4f %10.3f %9.4f %5d %5d %s\n",
                  row.name.c_str(), row.allocation.c_str(), row.selection.c_str(),
                  row.switch_budget, row.peak_vuf_percent, row.delta_peak_vuf,
                  row.delta_losses_kwh, row.delta_mean_vuf, row.switch_operations,
                  row.switches_installed,
                  row.exceeds_vuf_limit ? ">2% VUF" : (row.is_baseline ? "base" : ""));
    out << line;
  }
  return out.str();
}

}  // namespace gridphase
