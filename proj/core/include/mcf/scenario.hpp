#pragma once

#include "mcf/flow.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mcf {

enum class ShapeType { Circle, Ellipse, SpaceCurve, Sphere, Dumbbell, Graph };

const char* to_string(ShapeType type);

struct ShapeSpec {
  ShapeType type = ShapeType::Circle;
  double r0 = 1.0;
  double a = 1.0;
  double b = 1.0;
  /// SpaceCurve: trefoil | tilted-circle. Graph: random | paraboloid | flat.
  std::string preset;
  double scale = 1.0;
  double bell_r = 1.0;
  double neck_r = 0.2;
  double neck_len = 1.0;
  /// Graph disc half-width.
  double r = 1.0;
  int m = 2;
  int n = 1;
  int degree = 3;
};

struct AnalysisSpec {
  int rescale_levels = 6;
  std::vector<double> volume_radii{0.1, 0.2, 0.3};
  int graph_radius_anchors = 16;
  double alpha = 1.0;
  int ball_pairs = 10;
  int injectivity_anchors = 16;
};

struct ScenarioSpec {
  int schema = 1;
  std::string name;
  ShapeSpec shape;
  /// Samples per closed direction (curves, profiles) or per side (graphs).
  int samples = 0;
  double dt_safety = 0.25;
  double stop_Q = 0.0;
  double stop_factor = 200.0;
  long max_steps = 2'000'000;
  long snapshot_stride = 5000;
  Reparametrization reparametrize;
  int crossing_levels = 10;
  AnalysisSpec analysis;
  std::string output;
  std::uint64_t seed = 0;

  /// Throws ValidationError listing every violated invariant.
  void validate() const;
};

/// Parses schema v1 text. Unknown keys raise ParseError naming the key and line.
ScenarioSpec parse_scenario(const std::string& text, const std::string& origin = "<string>");
ScenarioSpec load_scenario(const std::string& path);

/// Schema v1 text that parses back to an equal spec.
std::string scenario_to_text(const ScenarioSpec& spec);

SampledImmersion build_initial(const ScenarioSpec& spec);
FlowConfig make_flow_config(const ScenarioSpec& spec);

}  // namespace mcf
