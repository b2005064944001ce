#include "mcf/report.hpp"

#include "json_util.hpp"
#include "mcf/trajectory_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace mcf {

namespace fs = std::filesystem;

namespace {

Json fit_json(const BlowupFit& f) {
  return {{"quantity", to_string(f.quantity)}, {"T_est", f.T_est},     {"p_est", f.p_est},
          {"C_est", f.C_est},                  {"t_lo", f.t_lo},       {"t_hi", f.t_hi},
          {"residual_rms", f.residual_rms},    {"points", f.points}};
}

Json rescale_entry_json(const RescaleEntry& e) {
  return {{"level", e.level},
          {"snapshot", e.snapshot},
          {"step", e.step},
          {"t", e.t},
          {"Q", e.Q},
          {"running_max", e.running_max},
          {"anchor", e.anchor},
          {"anchor_II", e.anchor_II},
          {"normalization_residual", std::abs(e.anchor_II - 1.0)},
          {"history_max", e.history_max},
          {"H_residual", e.H_residual},
          {"scaling_residual", e.scaling_residual}};
}

Json record_json(const CheckRecord& r) {
  return {{"check_id", r.check_id},
          {"scenario_id", r.scenario_id},
          {"worst_margin", r.worst_margin},
          {"worst_location", r.worst_location},
          {"pass", r.pass},
          {"tolerance", r.tolerance},
          {"informational", r.informational},
          {"note", r.note}};
}

std::string fmt(const Json& v) {
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

int reached_levels(const Trajectory& traj) {
  int level = 0;
  for (;;) {
    const bool found = std::any_of(traj.snapshots.begin(), traj.snapshots.end(),
                                   [&](const Snapshot& s) { return s.crossing_level == level + 1; });
    if (!found) return level;
    ++level;
  }
}

Analysis analyze_trajectory(const Trajectory& traj, int rescale_levels) {
  Analysis a;
  a.scenario_id = traj.scenario_id;
  a.stop_reason = traj.stop_reason;
  a.steps = traj.steps;
  a.final_time = traj.final_time();
  a.Q0 = traj.Q0;
  a.growth = blowup_monitor(traj);
  if (traj.stop_reason != StopReason::SingularStop) {
    a.fit_note = "flow stopped without a singularity";
    a.rescale_note = a.fit_note;
    return a;
  }
  try {
    a.fit = estimate_singular_time(traj, Quantity::II);
    a.classification = classify_type(*a.fit);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData && e.kind() != ErrorKind::FitDiverged) throw;
    a.fit_note = e.what();
  }
  const int levels = std::min(rescale_levels, reached_levels(traj));
  if (levels < 1) {
    a.rescale_note = "no crossing level reached";
  } else {
    a.rescale = parabolic_rescale(traj, levels).entries;
    if (levels < rescale_levels) {
      a.rescale_note = "only " + std::to_string(levels) + " of " + std::to_string(rescale_levels) + " levels reached";
    }
  }
  return a;
}

std::string analysis_json(const Analysis& a) {
  Json j;
  j["scenario_id"] = a.scenario_id;
  j["stop_reason"] = to_string(a.stop_reason);
  j["steps"] = a.steps;
  j["final_time"] = a.final_time;
  j["Q0"] = a.Q0;
  if (a.fit) {
    j["T_est"] = a.fit->T_est;
    j["p_est"] = a.fit->p_est;
    j["C_est"] = a.fit->C_est;
    j["classification"] = to_string(*a.classification);
    j["fit"] = fit_json(*a.fit);
  } else {
    j["T_est"] = nullptr;
    j["p_est"] = nullptr;
    j["C_est"] = nullptr;
    j["classification"] = "None";
    j["fit"] = nullptr;
  }
  j["fit_note"] = a.fit_note;
  Json growth = Json::array();
  for (const GrowthRow& g : a.growth) {
    growth.push_back({{"quantity", to_string(g.quantity)},
                      {"verdict", to_string(g.verdict)},
                      {"growth", g.growth},
                      {"exponent", g.exponent},
                      {"fit", g.fit.points > 0 ? fit_json(g.fit) : Json(nullptr)},
                      {"note", g.note}});
  }
  j["growth_table"] = growth;
  Json rescale = Json::array();
  for (const RescaleEntry& e : a.rescale) rescale.push_back(rescale_entry_json(e));
  j["rescale"] = rescale;
  j["rescale_note"] = a.rescale_note;
  return dump_json(j);
}

std::string verification_json(const std::vector<CheckRecord>& records) {
  Json arr = Json::array();
  for (const CheckRecord& r : records) arr.push_back(record_json(r));
  return dump_json(arr);
}

std::string rescale_json(const RescaleSequence& seq) {
  Json j;
  j["scenario_id"] = seq.scenario_id;
  Json entries = Json::array();
  for (const RescaleEntry& e : seq.entries) {
    Json row = rescale_entry_json(e);
    char name[32];
    std::snprintf(name, sizeof name, "rescaled/level_%02d.csv", e.level);
    row["file"] = name;
    entries.push_back(row);
  }
  j["levels"] = entries;
  return dump_json(j);
}

std::string summary_text(const std::string& dir) {
  const fs::path base(dir);
  std::string out;
  bool any = false;
  auto load = [&](const char* name) -> Json {
    const fs::path p = base / name;
    if (!fs::exists(p)) return Json(nullptr);
    any = true;
    try {
      return Json::parse(read_text_file(p.string()));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::IoError, p.string() + ": " + e.what());
    }
  };
  const Json analysis = load("analysis.json");
  const Json verification = load("verification.json");
  const Json rescale = load("rescale.json");
  if (!any) throw Error(ErrorKind::IoError, "no analysis.json, verification.json or rescale.json in " + dir);

  if (!analysis.is_null()) {
    out += "analysis " + fmt(analysis.value("scenario_id", Json("?"))) + "\n";
    out += "  stop " + fmt(analysis["stop_reason"]) + " after " + fmt(analysis["steps"]) + " steps, t = " +
           fmt(analysis["final_time"]) + "\n";
    out += "  T_est " + fmt(analysis["T_est"]) + "  p_est " + fmt(analysis["p_est"]) + "  C_est " +
           fmt(analysis["C_est"]) + "  class " + fmt(analysis["classification"]) + "\n";
    for (const Json& g : analysis["growth_table"]) {
      out += "  max|" + fmt(g["quantity"]) + "|  " + fmt(g["verdict"]) + "  growth " + fmt(g["growth"]) +
             "  exponent " + fmt(g["exponent"]) + "\n";
    }
    for (const Json& e : analysis["rescale"]) {
      out += "  level " + fmt(e["level"]) + "  |II_j| " + fmt(e["anchor_II"]) + "  scaling " +
             fmt(e["scaling_residual"]) + "\n";
    }
  }
  if (!verification.is_null()) {
    int pass = 0, fail = 0, info = 0;
    std::string failed;
    for (const Json& r : verification) {
      if (r["informational"].get<bool>()) {
        ++info;
      } else if (r["pass"].get<bool>()) {
        ++pass;
      } else {
        ++fail;
        failed += "  FAIL " + fmt(r["check_id"]) + " margin " + fmt(r["worst_margin"]) + " at " +
                  fmt(r["worst_location"]) + "\n";
      }
    }
    out += "verification: " + std::to_string(pass) + " pass, " + std::to_string(fail) + " fail, " +
           std::to_string(info) + " informational\n" + failed;
  }
  if (!rescale.is_null()) {
    out += "rescale: " + std::to_string(rescale["levels"].size()) + " levels\n";
  }
  return out;
}

}  // namespace mcf
