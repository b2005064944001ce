#include "mcf/scenario.hpp"

#include "mcf/graph.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace mcf {

namespace {

struct ShapeName {
  ShapeType type;
  const char* name;
};

constexpr ShapeName kShapeNames[] = {
    {ShapeType::Circle, "circle"},     {ShapeType::Ellipse, "ellipse"},   {ShapeType::SpaceCurve, "space_curve"},
    {ShapeType::Sphere, "sphere"},     {ShapeType::Dumbbell, "dumbbell"}, {ShapeType::Graph, "graph"},
};

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

[[noreturn]] void parse_fail(const std::string& origin, const YAML::Node& node, const std::string& what) {
  throw Error(ErrorKind::ParseError, origin + ":" + std::to_string(line_of(node)) + ": " + what);
}

// Rejects keys outside the allowed set and non-map sections.
void expect_keys(const std::string& origin, const YAML::Node& node, const std::string& section,
                 const std::set<std::string>& allowed) {
  if (!node.IsMap()) parse_fail(origin, node, "section '" + section + "' must be a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      const std::string field = section.empty() ? key : section + "." + key;
      parse_fail(origin, kv.first, "unknown key '" + field + "'");
    }
  }
}

template <typename T>
void read(const std::string& origin, const YAML::Node& parent, const char* key, const std::string& section, T& out) {
  const YAML::Node node = parent[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    const std::string field = section.empty() ? std::string(key) : section + "." + key;
    parse_fail(origin, node, "bad value for '" + field + "'");
  }
}

ShapeType shape_from_string(const std::string& origin, const YAML::Node& node) {
  const std::string name = node.as<std::string>();
  for (const ShapeName& s : kShapeNames) {
    if (name == s.name) return s.type;
  }
  parse_fail(origin, node, "unknown shape type '" + name + "'");
}

}  // namespace

const char* to_string(ShapeType type) {
  for (const ShapeName& s : kShapeNames) {
    if (s.type == type) return s.name;
  }
  return "unknown";
}

void ScenarioSpec::validate() const {
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };
  need(schema == 1, "schema must be 1");
  need(!name.empty(), "name must not be empty");
  const bool graph = shape.type == ShapeType::Graph;
  need(samples >= 8, "grid.samples must be >= 8");
  switch (shape.type) {
    case ShapeType::Circle:
    case ShapeType::Sphere:
      need(shape.r0 > 0.0, "shape.r0 must be > 0");
      break;
    case ShapeType::Ellipse:
      need(shape.a > 0.0, "shape.a must be > 0");
      need(shape.b > 0.0, "shape.b must be > 0");
      break;
    case ShapeType::SpaceCurve:
      need(shape.preset == "trefoil" || shape.preset == "tilted-circle",
           "shape.preset must be trefoil or tilted-circle");
      need(shape.scale > 0.0, "shape.scale must be > 0");
      break;
    case ShapeType::Dumbbell:
      need(shape.bell_r > 0.0, "shape.bell_r must be > 0");
      need(shape.neck_r > 0.0, "shape.neck_r must be > 0");
      need(shape.neck_len > 0.0, "shape.neck_len must be > 0");
      need(shape.neck_r < 0.5 * shape.bell_r, "shape.neck_r must be < bell_r / 2");
      break;
    case ShapeType::Graph:
      need(shape.preset == "random" || shape.preset == "paraboloid" || shape.preset == "flat",
           "shape.preset must be random, paraboloid or flat");
      need(shape.r > 0.0, "shape.r must be > 0");
      need(shape.m == 1 || shape.m == 2, "shape.m must be 1 or 2");
      need(shape.n >= 1 && shape.m + shape.n <= kMaxAmbient, "shape.n out of range");
      need(shape.degree >= 2 && shape.degree <= 6, "shape.degree must be in [2, 6]");
      break;
  }
  need(dt_safety > 0.0 && dt_safety <= 0.5, "flow.dt_safety must be in (0, 0.5]");
  need(stop_Q >= 0.0, "flow.stop_Q must be >= 0");
  need(stop_Q > 0.0 || stop_factor > 1.0, "flow.stop_factor must be > 1");
  need(max_steps > 0, "flow.max_steps must be > 0");
  need(snapshot_stride > 0, "flow.snapshot_stride must be > 0");
  need(crossing_levels >= 0 && crossing_levels <= 40, "flow.crossing_levels must be in [0, 40]");
  if (reparametrize.mode == ReparamMode::ArcLengthEveryK) {
    need(!graph, "flow.reparametrize is not available for graphs");
    need(reparametrize.every > 0, "flow.reparametrize.every must be > 0");
    need(reparametrize.curvature_weight >= 0.0, "flow.reparametrize.curvature_weight must be >= 0");
  }
  need(analysis.rescale_levels >= 1, "analysis.rescale_levels must be >= 1");
  for (double r : analysis.volume_radii) need(r > 0.0, "analysis.volume_radii must be > 0");
  need(analysis.graph_radius_anchors >= 1, "analysis.graph_radius_anchors must be >= 1");
  need(analysis.alpha > 0.0, "analysis.alpha must be > 0");
  need(analysis.ball_pairs >= 0, "analysis.ball_pairs must be >= 0");
  need(analysis.injectivity_anchors >= 1, "analysis.injectivity_anchors must be >= 1");
  if (bad.empty()) return;
  std::string msg = "scenario '" + name + "':";
  for (const std::string& b : bad) msg += " " + b + ";";
  msg.pop_back();
  throw Error(ErrorKind::ValidationError, msg);
}

ScenarioSpec parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::ParseError, origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || !root.IsMap()) throw Error(ErrorKind::ParseError, origin + ": expected a mapping at top level");
  expect_keys(origin, root, "", {"schema", "name", "seed", "output", "shape", "grid", "flow", "analysis"});

  ScenarioSpec spec;
  if (!root["schema"]) throw Error(ErrorKind::ParseError, origin + ": missing key 'schema'");
  read(origin, root, "schema", "", spec.schema);
  if (spec.schema != 1) parse_fail(origin, root["schema"], "unsupported schema " + std::to_string(spec.schema));
  read(origin, root, "name", "", spec.name);
  read(origin, root, "seed", "", spec.seed);
  read(origin, root, "output", "", spec.output);

  const YAML::Node shape = root["shape"];
  if (!shape) throw Error(ErrorKind::ParseError, origin + ": missing section 'shape'");
  expect_keys(origin, shape, "shape",
              {"type", "r0", "a", "b", "preset", "scale", "bell_r", "neck_r", "neck_len", "r", "m", "n", "degree"});
  if (!shape["type"]) parse_fail(origin, shape, "missing key 'shape.type'");
  spec.shape.type = shape_from_string(origin, shape["type"]);
  read(origin, shape, "r0", "shape", spec.shape.r0);
  read(origin, shape, "a", "shape", spec.shape.a);
  read(origin, shape, "b", "shape", spec.shape.b);
  read(origin, shape, "preset", "shape", spec.shape.preset);
  read(origin, shape, "scale", "shape", spec.shape.scale);
  read(origin, shape, "bell_r", "shape", spec.shape.bell_r);
  read(origin, shape, "neck_r", "shape", spec.shape.neck_r);
  read(origin, shape, "neck_len", "shape", spec.shape.neck_len);
  read(origin, shape, "r", "shape", spec.shape.r);
  read(origin, shape, "m", "shape", spec.shape.m);
  read(origin, shape, "n", "shape", spec.shape.n);
  read(origin, shape, "degree", "shape", spec.shape.degree);

  if (const YAML::Node grid = root["grid"]) {
    expect_keys(origin, grid, "grid", {"samples"});
    read(origin, grid, "samples", "grid", spec.samples);
  }
  if (!root["grid"] || !root["grid"]["samples"]) throw Error(ErrorKind::ParseError, origin + ": missing key 'grid.samples'");

  if (const YAML::Node flow = root["flow"]) {
    expect_keys(origin, flow, "flow",
                {"dt_safety", "stop_Q", "stop_factor", "max_steps", "snapshot_stride", "crossing_levels",
                 "reparametrize"});
    read(origin, flow, "dt_safety", "flow", spec.dt_safety);
    read(origin, flow, "stop_Q", "flow", spec.stop_Q);
    read(origin, flow, "stop_factor", "flow", spec.stop_factor);
    read(origin, flow, "max_steps", "flow", spec.max_steps);
    read(origin, flow, "snapshot_stride", "flow", spec.snapshot_stride);
    read(origin, flow, "crossing_levels", "flow", spec.crossing_levels);
    if (const YAML::Node rp = flow["reparametrize"]) {
      if (rp.IsScalar()) {
        if (rp.as<std::string>() != "off") parse_fail(origin, rp, "flow.reparametrize must be 'off' or a mapping");
      } else {
        expect_keys(origin, rp, "flow.reparametrize", {"every", "curvature_weight"});
        spec.reparametrize.mode = ReparamMode::ArcLengthEveryK;
        read(origin, rp, "every", "flow.reparametrize", spec.reparametrize.every);
        read(origin, rp, "curvature_weight", "flow.reparametrize", spec.reparametrize.curvature_weight);
      }
    }
  }

  if (const YAML::Node an = root["analysis"]) {
    expect_keys(origin, an, "analysis",
                {"rescale_levels", "volume_radii", "graph_radius_anchors", "alpha", "ball_pairs",
                 "injectivity_anchors"});
    read(origin, an, "rescale_levels", "analysis", spec.analysis.rescale_levels);
    read(origin, an, "volume_radii", "analysis", spec.analysis.volume_radii);
    read(origin, an, "graph_radius_anchors", "analysis", spec.analysis.graph_radius_anchors);
    read(origin, an, "alpha", "analysis", spec.analysis.alpha);
    read(origin, an, "ball_pairs", "analysis", spec.analysis.ball_pairs);
    read(origin, an, "injectivity_anchors", "analysis", spec.analysis.injectivity_anchors);
  }

  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

std::string scenario_to_text(const ScenarioSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema" << YAML::Value << spec.schema;
  out << YAML::Key << "name" << YAML::Value << spec.name;
  out << YAML::Key << "seed" << YAML::Value << spec.seed;
  if (!spec.output.empty()) out << YAML::Key << "output" << YAML::Value << spec.output;
  out << YAML::Key << "shape" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << to_string(spec.shape.type);
  const ShapeSpec& s = spec.shape;
  switch (s.type) {
    case ShapeType::Circle:
    case ShapeType::Sphere:
      out << YAML::Key << "r0" << YAML::Value << s.r0;
      break;
    case ShapeType::Ellipse:
      out << YAML::Key << "a" << YAML::Value << s.a << YAML::Key << "b" << YAML::Value << s.b;
      break;
    case ShapeType::SpaceCurve:
      out << YAML::Key << "preset" << YAML::Value << s.preset << YAML::Key << "scale" << YAML::Value << s.scale;
      break;
    case ShapeType::Dumbbell:
      out << YAML::Key << "bell_r" << YAML::Value << s.bell_r << YAML::Key << "neck_r" << YAML::Value << s.neck_r
          << YAML::Key << "neck_len" << YAML::Value << s.neck_len;
      break;
    case ShapeType::Graph:
      out << YAML::Key << "preset" << YAML::Value << s.preset << YAML::Key << "r" << YAML::Value << s.r
          << YAML::Key << "m" << YAML::Value << s.m << YAML::Key << "n" << YAML::Value << s.n << YAML::Key
          << "degree" << YAML::Value << s.degree;
      break;
  }
  out << YAML::EndMap;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "samples" << YAML::Value << spec.samples
      << YAML::EndMap;
  out << YAML::Key << "flow" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt_safety" << YAML::Value << spec.dt_safety;
  out << YAML::Key << "stop_Q" << YAML::Value << spec.stop_Q;
  out << YAML::Key << "stop_factor" << YAML::Value << spec.stop_factor;
  out << YAML::Key << "max_steps" << YAML::Value << spec.max_steps;
  out << YAML::Key << "snapshot_stride" << YAML::Value << spec.snapshot_stride;
  out << YAML::Key << "crossing_levels" << YAML::Value << spec.crossing_levels;
  out << YAML::Key << "reparametrize" << YAML::Value;
  if (spec.reparametrize.mode == ReparamMode::Off) {
    out << "off";
  } else {
    out << YAML::BeginMap << YAML::Key << "every" << YAML::Value << spec.reparametrize.every << YAML::Key
        << "curvature_weight" << YAML::Value << spec.reparametrize.curvature_weight << YAML::EndMap;
  }
  out << YAML::EndMap;
  const AnalysisSpec& a = spec.analysis;
  out << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rescale_levels" << YAML::Value << a.rescale_levels;
  out << YAML::Key << "volume_radii" << YAML::Value << YAML::Flow << a.volume_radii;
  out << YAML::Key << "graph_radius_anchors" << YAML::Value << a.graph_radius_anchors;
  out << YAML::Key << "alpha" << YAML::Value << a.alpha;
  out << YAML::Key << "ball_pairs" << YAML::Value << a.ball_pairs;
  out << YAML::Key << "injectivity_anchors" << YAML::Value << a.injectivity_anchors;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

SampledImmersion build_initial(const ScenarioSpec& spec) {
  const ShapeSpec& s = spec.shape;
  switch (s.type) {
    case ShapeType::Circle:
      return shapes::circle(s.r0, spec.samples);
    case ShapeType::Ellipse:
      return shapes::ellipse(s.a, s.b, spec.samples);
    case ShapeType::SpaceCurve:
      return shapes::space_curve(s.preset, spec.samples, s.scale);
    case ShapeType::Sphere:
      return shapes::sphere(s.r0, spec.samples);
    case ShapeType::Dumbbell:
      return shapes::dumbbell(s.bell_r, s.neck_r, s.neck_len, spec.samples);
    case ShapeType::Graph: {
      if (s.preset == "random") {
        const PolynomialMap psi = PolynomialMap::random(s.m, s.n, s.degree, spec.seed);
        return shapes::graph(s.m, s.n, s.r, spec.samples, [&](const Eigen::VectorXd& x) { return psi.value(x); });
      }
      const bool flat = s.preset == "flat";
      return shapes::graph(s.m, s.n, s.r, spec.samples, [&](const Eigen::VectorXd& x) {
        AmbientVec v = AmbientVec::Zero(s.n);
        if (!flat) v(0) = 0.5 * x.squaredNorm();
        return v;
      });
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown shape");
}

FlowConfig make_flow_config(const ScenarioSpec& spec) {
  FlowConfig cfg;
  cfg.scenario_id = spec.name;
  cfg.initial = build_initial(spec);
  cfg.dt_safety = spec.dt_safety;
  cfg.stop_Q = spec.stop_Q;
  cfg.stop_factor = spec.stop_factor;
  cfg.max_steps = spec.max_steps;
  cfg.snapshot_stride = spec.snapshot_stride;
  cfg.reparametrize = spec.reparametrize;
  cfg.crossing_levels = spec.crossing_levels;
  cfg.validate();
  return cfg;
}

}  // namespace mcf
