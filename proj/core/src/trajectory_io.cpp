#include "mcf/trajectory_io.hpp"

#include "json_util.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mcf {

namespace fs = std::filesystem;

namespace {

void dump_into(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + Json(it.key()).dump() + ": ";
      dump_into(it.value(), indent + 2, out);
    }
    out += "\n" + close + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    // Arrays of scalars stay on one line.
    bool flat = true;
    for (const Json& v : j) flat = flat && !v.is_structured();
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        dump_into(j[i], indent + 2, out);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      dump_into(j[i], indent + 2, out);
    }
    out += "\n" + close + "]";
  } else if (j.is_number_float()) {
    const double v = j.get<double>();
    out += std::isfinite(v) ? format_double(v) : "null";
  } else {
    out += j.dump();
  }
}

[[noreturn]] void corrupt(const std::string& dir, const std::string& what) {
  throw Error(ErrorKind::IoError, "corrupted trajectory in " + dir + ": " + what);
}

std::string snapshot_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshots/snap_%05zu.csv", i);
  return buf;
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::Periodic;
  if (s == "one_sided") return Boundary::OneSided;
  if (s == "axis_reflect") return Boundary::AxisReflect;
  throw Error(ErrorKind::IoError, "unknown boundary '" + s + "'");
}

const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::Periodic:
      return "periodic";
    case Boundary::OneSided:
      return "one_sided";
    case Boundary::AxisReflect:
      return "axis_reflect";
  }
  return "periodic";
}

const char* kDiagColumns[] = {"step",     "t",       "dt",      "max_II",         "max_H", "max_A",
                              "volume",   "max_dtg", "int_dtg", "running_max_II", "epoch"};

Json diag_row(const DiagnosticRow& d) {
  return Json::array({d.step, d.t, d.dt, d.max_II, d.max_H, d.max_A, d.volume, d.max_dtg, d.int_dtg,
                      d.running_max_II, d.epoch});
}

}  // namespace

std::string dump_json(const Json& j) {
  std::string out;
  dump_into(j, 0, out);
  out += "\n";
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_snapshot_csv(const Snapshot& snap, std::ostream& out) {
  const SampledImmersion& imm = snap.imm;
  const int gd = imm.grid_dimension();
  const int dim = imm.stored_dim();
  if (imm.kind == ImmersionKind::RotationalProfile) {
    out << "u,x,rho";
  } else {
    out << (gd == 1 ? "u" : "u0,u1");
    for (int c = 0; c < dim; ++c) out << ",x" << c;
  }
  out << ",II2,H2,A2,R\n";
  for (int i = 0; i < imm.dims[0]; ++i) {
    for (int j = 0; j < imm.dims[1]; ++j) {
      const int s = imm.index(i, j);
      const auto us = static_cast<std::size_t>(s);
      out << format_double(imm.param(0, i));
      if (gd == 2) out << ',' << format_double(imm.param(1, j));
      for (int c = 0; c < dim; ++c) out << ',' << format_double(imm.positions(s, c));
      out << ',' << format_double(snap.geom.norm_II_sq[us]) << ',' << format_double(snap.geom.norm_H_sq[us]) << ','
          << format_double(snap.geom.norm_A_sq[us]) << ',' << format_double(snap.geom.scalar_R[us]) << '\n';
    }
  }
}

void write_diagnostics_csv(const Trajectory& traj, std::ostream& out) {
  for (std::size_t c = 0; c < std::size(kDiagColumns); ++c) out << (c ? "," : "") << kDiagColumns[c];
  out << '\n';
  for (const DiagnosticRow& d : traj.diagnostics) {
    out << d.step << ',' << format_double(d.t) << ',' << format_double(d.dt) << ',' << format_double(d.max_II) << ','
        << format_double(d.max_H) << ',' << format_double(d.max_A) << ',' << format_double(d.volume) << ','
        << format_double(d.max_dtg) << ',' << format_double(d.int_dtg) << ',' << format_double(d.running_max_II)
        << ',' << d.epoch << '\n';
  }
}

void write_trajectory(const Trajectory& traj, const ScenarioSpec& spec, const std::string& dir) {
  if (traj.snapshots.empty()) throw Error(ErrorKind::InvalidArgument, "trajectory has no snapshots");
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "snapshots", ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());

  const SampledImmersion& imm = traj.snapshots.front().imm;
  Json index;
  index["format"] = "mcf-trajectory";
  index["version"] = 1;
  index["scenario_id"] = traj.scenario_id;
  index["scenario"] = scenario_to_text(spec);
  index["stop_reason"] = to_string(traj.stop_reason);
  index["Q0"] = traj.Q0;
  index["stop_Q"] = traj.stop_Q;
  index["steps"] = traj.steps;
  index["volume_increase_events"] = traj.volume_increase_events;
  index["immersion"] = {
      {"kind", to_string(imm.kind)},
      {"m", imm.m},
      {"n", imm.n},
      {"stored_dim", imm.stored_dim()},
      {"dims", {imm.dims[0], imm.dims[1]}},
      {"boundary", {boundary_name(imm.boundary[0]), boundary_name(imm.boundary[1])}},
      {"origin", {imm.origin[0], imm.origin[1]}},
      {"spacing", {imm.spacing[0], imm.spacing[1]}},
  };
  Json snaps = Json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Snapshot& s = traj.snapshots[i];
    snaps.push_back({{"file", snapshot_name(i)},
                     {"step", s.step},
                     {"t", s.t},
                     {"epoch", s.epoch},
                     {"partner_of", s.partner_of},
                     {"crossing_level", s.crossing_level},
                     {"running_max_II", s.running_max_II}});
    std::ostringstream csv;
    write_snapshot_csv(s, csv);
    write_text_file((fs::path(dir) / snapshot_name(i)).string(), csv.str());
  }
  index["snapshots"] = std::move(snaps);
  Json cols = Json::array();
  for (const char* c : kDiagColumns) cols.push_back(c);
  Json rows = Json::array();
  for (const DiagnosticRow& d : traj.diagnostics) rows.push_back(diag_row(d));
  index["diagnostics"] = {{"columns", cols}, {"rows", rows}};
  write_text_file((fs::path(dir) / "index.json").string(), dump_json(index));

  std::ostringstream diag;
  write_diagnostics_csv(traj, diag);
  write_text_file((fs::path(dir) / "diagnostics.csv").string(), diag.str());
}

StoredTrajectory read_trajectory(const std::string& dir) {
  const fs::path index_path = fs::path(dir) / "index.json";
  if (!fs::exists(index_path)) throw Error(ErrorKind::IoError, "no index.json in " + dir);
  StoredTrajectory out;
  Trajectory& traj = out.traj;
  SampledImmersion proto;
  Json index;
  try {
    index = Json::parse(read_text_file(index_path.string()));
    if (index.at("format").get<std::string>() != "mcf-trajectory") corrupt(dir, "unexpected format tag");
    if (index.at("version").get<int>() != 1) corrupt(dir, "unsupported version");
    out.spec = parse_scenario(index.at("scenario").get<std::string>(), index_path.string() + " (scenario)");
    traj.scenario_id = index.at("scenario_id").get<std::string>();
    traj.stop_reason = stop_reason_from_string(index.at("stop_reason").get<std::string>());
    traj.Q0 = index.at("Q0").get<double>();
    traj.stop_Q = index.at("stop_Q").get<double>();
    traj.steps = index.at("steps").get<long>();
    traj.volume_increase_events = index.at("volume_increase_events").get<long>();

    const Json& im = index.at("immersion");
    proto.kind = immersion_kind_from_string(im.at("kind").get<std::string>());
    proto.m = im.at("m").get<int>();
    proto.n = im.at("n").get<int>();
    for (std::size_t d = 0; d < 2; ++d) {
      proto.dims[d] = im.at("dims").at(d).get<int>();
      proto.boundary[d] = boundary_from_string(im.at("boundary").at(d).get<std::string>());
      proto.origin[d] = im.at("origin").at(d).get<double>();
      proto.spacing[d] = im.at("spacing").at(d).get<double>();
    }
    const int stored = im.at("stored_dim").get<int>();
    if (proto.dims[0] <= 0 || proto.dims[1] <= 0 || stored <= 0 || stored > kMaxAmbient) corrupt(dir, "bad immersion shape");
    proto.positions.resize(proto.sample_count(), stored);

    const Json& rows = index.at("diagnostics").at("rows");
    for (const Json& r : rows) {
      if (r.size() != std::size(kDiagColumns)) corrupt(dir, "diagnostics row has wrong width");
      DiagnosticRow d;
      d.step = r.at(0).get<long>();
      d.t = r.at(1).get<double>();
      d.dt = r.at(2).get<double>();
      d.max_II = r.at(3).get<double>();
      d.max_H = r.at(4).get<double>();
      d.max_A = r.at(5).get<double>();
      d.volume = r.at(6).get<double>();
      d.max_dtg = r.at(7).get<double>();
      d.int_dtg = r.at(8).get<double>();
      d.running_max_II = r.at(9).get<double>();
      d.epoch = r.at(10).get<int>();
      traj.diagnostics.push_back(d);
    }

    for (const Json& s : index.at("snapshots")) {
      Snapshot snap;
      snap.step = s.at("step").get<long>();
      snap.t = s.at("t").get<double>();
      snap.epoch = s.at("epoch").get<int>();
      snap.partner_of = s.at("partner_of").get<int>();
      snap.crossing_level = s.at("crossing_level").get<int>();
      snap.running_max_II = s.at("running_max_II").get<double>();
      snap.imm = proto;
      const std::string file = s.at("file").get<std::string>();
      const fs::path path = fs::path(dir) / file;
      std::istringstream csv(read_text_file(path.string()));
      std::string line;
      std::getline(csv, line);
      const int gd = proto.grid_dimension();
      for (int k = 0; k < proto.sample_count(); ++k) {
        if (!std::getline(csv, line)) corrupt(dir, file + " is truncated");
        const char* p = line.c_str();
        char* end = nullptr;
        for (int c = 0; c < gd; ++c) {
          std::strtod(p, &end);
          if (end == p || *end != ',') corrupt(dir, file + " line " + std::to_string(k + 2));
          p = end + 1;
        }
        for (int c = 0; c < stored; ++c) {
          snap.imm.positions(k, c) = std::strtod(p, &end);
          if (end == p || *end != ',') corrupt(dir, file + " line " + std::to_string(k + 2));
          p = end + 1;
        }
      }
      snap.geom = compute_geometry(snap.imm);
      traj.snapshots.push_back(std::move(snap));
    }
  } catch (const nlohmann::json::exception& e) {
    corrupt(dir, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::IoError) throw;
    corrupt(dir, e.what());
  }
  if (traj.snapshots.empty()) corrupt(dir, "no snapshots");
  return out;
}

}  // namespace mcf
