#include "mcf/pipeline.hpp"

#include "mcf/evolution.hpp"
#include "mcf/graph.hpp"
#include "mcf/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

namespace mcf {

namespace fs = std::filesystem;

namespace {

// Keeps the worst record per check id; a group passes only if every member passes.
class RecordSet {
 public:
  explicit RecordSet(const std::set<std::string>& filter) : filter_(filter) {}

  bool wants(const std::string& id) const { return filter_.empty() || filter_.count(id) > 0; }

  void add(const CheckRecord& r) {
    if (!wants(r.check_id)) return;
    for (CheckRecord& old : records_) {
      if (old.check_id != r.check_id) continue;
      const bool pass = old.pass && r.pass;
      if (r.worst_margin < old.worst_margin) old = r;
      old.pass = pass;
      return;
    }
    records_.push_back(r);
  }

  std::vector<CheckRecord> take() {
    std::stable_sort(records_.begin(), records_.end(),
                     [](const CheckRecord& a, const CheckRecord& b) { return a.check_id < b.check_id; });
    return std::move(records_);
  }

 private:
  const std::set<std::string>& filter_;
  std::vector<CheckRecord> records_;
};

std::string snap_loc(int i, const Snapshot& s) {
  return "snapshot " + std::to_string(i) + " step " + std::to_string(s.step);
}

std::string with_loc(const std::string& where, const std::string& inner) {
  return inner.empty() ? where : where + ", " + inner;
}

double ratio_margin(double bound, double value) {
  if (bound > 0.0) return (bound - value) / bound;
  return value > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
}

// Intrinsic length scale used for ball radii.
double ball_radius(const Snapshot& s, const ScenarioSpec& spec) {
  switch (s.imm.kind) {
    case ImmersionKind::ClosedCurve:
      return total_volume(s.imm, s.geom) / 8.0;
    case ImmersionKind::RotationalProfile: {
      double len = s.imm.positions(0, 1) + s.imm.positions(s.imm.sample_count() - 1, 1);
      for (int k = 0; k + 1 < s.imm.sample_count(); ++k) {
        len += (s.imm.positions.row(k + 1) - s.imm.positions.row(k)).norm();
      }
      return len / 4.0;
    }
    case ImmersionKind::DiscGraph:
      return 0.5 * spec.shape.r;
  }
  return 1.0;
}

std::vector<int> spread_anchors(const SampledImmersion& imm, int count) {
  const int band = imm.pole_band();
  const int lo = band;
  const int hi = imm.sample_count() - 1 - band;
  std::vector<int> out;
  if (imm.kind == ImmersionKind::DiscGraph) {
    // Interior nodes of the middle half of the square.
    const int nx = imm.dims[0];
    const int ny = imm.dims[1];
    const int side = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))));
    for (int a = 0; a < side && static_cast<int>(out.size()) < count; ++a) {
      for (int b = 0; b < side && static_cast<int>(out.size()) < count; ++b) {
        const int i = nx / 4 + (nx / 2) * a / std::max(side - 1, 1);
        const int j = imm.m == 1 ? 0 : ny / 4 + (ny / 2) * b / std::max(side - 1, 1);
        out.push_back(imm.index(std::min(i, nx - 1), std::min(j, ny - 1)));
        if (imm.m == 1) break;
      }
    }
  } else {
    for (int a = 0; a < count; ++a) out.push_back(count == 1 ? (lo + hi) / 2 : lo + (hi - lo) * a / (count - 1));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void evolution_checks(const Trajectory& traj, const Tolerances& tol, RecordSet& set) {
  const std::string& id = traj.scenario_id;
  const SampledImmersion& first = traj.snapshots.front().imm;
  const bool plane_curve = (first.kind == ImmersionKind::ClosedCurve && first.stored_dim() == 2) ||
                           (first.kind == ImmersionKind::DiscGraph && first.m == 1 && first.n == 1);
  bool any = false;
  for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
    const Snapshot& b = traj.snapshots[j];
    if (b.partner_of < 0) continue;
    const Snapshot& a = traj.snapshots[static_cast<std::size_t>(b.partner_of)];
    if (a.epoch != b.epoch) continue;
    any = true;
    const double q = parabolic_curvature_scale(a.imm, a.geom);
    const std::string where = snap_loc(b.partner_of, a);
    auto record = [&](const char* check, const EvolutionResidual& r, double scale) {
      const double bound = consistency_bound(r, scale, tol.consistency_factor);
      CheckRecord rec = make_record(check, id, ratio_margin(bound, r.residual),
                                    with_loc(where, "sample " + std::to_string(r.worst_sample)), 0.0);
      rec.note = "relative slack of residual <= factor (dt + ds^2) L^k, L the parabolic curvature scale";
      set.add(rec);
    };
    if (set.wants("metric_evolution")) record("metric_evolution", check_metric_evolution(a, b), std::pow(q, 4));
    if (set.wants("volume_evolution") || set.wants("volume_monotone")) {
      const EvolutionResidual r = check_volume_evolution(a, b);
      record("volume_evolution", r, std::pow(q, 4));
      set.add(make_record("volume_monotone", id, r.volume_nonincreasing ? 0.0 : -1.0, where, 0.0));
    }
    if (plane_curve && set.wants("curvature_evolution")) {
      record("curvature_evolution", check_curvature_evolution_curve(a, b), std::pow(q, 5));
    }
  }
  if (any) {
    CheckRecord rec = make_record("volume_monotone", id, -static_cast<double>(traj.volume_increase_events),
                                  "all steps", 0.0);
    rec.note = "volume increase events within an epoch";
    set.add(rec);
  }
}

void ball_checks(const StoredTrajectory& st, const Tolerances& tol, RecordSet& set) {
  const Trajectory& traj = st.traj;
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const int j = comparable_successor(traj, static_cast<int>(i));
    if (j < 0) continue;
    if (metric_deviation(traj.snapshots[i].geom.g, traj.snapshots[static_cast<std::size_t>(j)].geom.g) >= 0.5) continue;
    pairs.emplace_back(static_cast<int>(i), j);
  }
  const int want = st.spec.analysis.ball_pairs;
  if (pairs.empty() || want == 0) return;
  std::vector<std::pair<int, int>> chosen;
  const int n = static_cast<int>(pairs.size());
  const int take = std::min(want, n);
  for (int k = 0; k < take; ++k) chosen.push_back(pairs[static_cast<std::size_t>(take == 1 ? 0 : k * (n - 1) / (take - 1))]);
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  (void)tol;
  for (const auto& [i, j] : chosen) {
    const Snapshot& a = traj.snapshots[static_cast<std::size_t>(i)];
    const Snapshot& b = traj.snapshots[static_cast<std::size_t>(j)];
    const double eps = metric_deviation(a.geom.g, b.geom.g);
    const int p = summarize(a.imm, a.geom).II.sample;
    BallInclusionResult res = ball_inclusion_check(a.imm, a.geom.g, b.geom.g, eps, p, ball_radius(a, st.spec),
                                                   traj.scenario_id);
    res.record.worst_location = with_loc("snapshots " + std::to_string(i) + "/" + std::to_string(j),
                                         res.record.worst_location);
    res.record.note = std::to_string(chosen.size()) + " metric pairs";
    set.add(res.record);
  }
}

void integrated_check(const StoredTrajectory& st, const Tolerances& tol, RecordSet& set) {
  const Trajectory& traj = st.traj;
  if (traj.stop_reason != StopReason::SingularStop) return;
  BlowupFit fit;
  try {
    fit = estimate_singular_time(traj, Quantity::II);
  } catch (const Error&) {
    return;
  }
  if (!(fit.p_est > 1.0)) return;
  const Snapshot& s0 = traj.snapshots.front();
  const double H0 = summarize(s0.imm, s0.geom).H.value;
  int best = -1;
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i) {
    const Snapshot& s = traj.snapshots[i];
    if (s.epoch != s0.epoch || !(s.t < fit.T_est)) continue;
    if (summarize(s.imm, s.geom).H.value > 2.0 * H0) continue;
    if (best < 0 || s.t > traj.snapshots[static_cast<std::size_t>(best)].t) best = static_cast<int>(i);
  }
  if (best < 0) return;
  IntegratedEstimateInput in;
  in.T = fit.T_est;
  in.p = fit.p_est;
  in.t0 = s0.t;
  in.t1 = traj.snapshots[static_cast<std::size_t>(best)].t;
  try {
    IntegratedEstimateResult res = integrated_estimate_check(traj, in, traj.scenario_id, tol.inequality);
    res.record.note = "window [" + format_double(in.t0) + ", " + format_double(in.t1) + "], K " +
                      format_double(res.K);
    set.add(res.record);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::PreconditionUnsatisfied) throw;
    CheckRecord rec = make_record("integrated_estimate", traj.scenario_id, 0.0, "window", tol.inequality);
    rec.informational = true;
    rec.note = e.what();
    set.add(rec);
  }
}

void rescale_checks(const StoredTrajectory& st, const Tolerances& tol, RecordSet& set) {
  const Trajectory& traj = st.traj;
  if (traj.stop_reason != StopReason::SingularStop) return;
  const int levels = std::min(st.spec.analysis.rescale_levels, reached_levels(traj));
  if (levels < 1) return;
  const bool want_vg = set.wants("volume_growth") && traj.snapshots.front().imm.kind != ImmersionKind::DiscGraph;
  if (!set.wants("rescale_normalization") && !set.wants("rescale_scaling") && !want_vg) return;
  const RescaleSequence seq = parabolic_rescale(traj, levels);
  for (const RescaleEntry& e : seq.entries) {
    const std::string where = "level " + std::to_string(e.level) + " anchor " + std::to_string(e.anchor);
    const double norm = std::max(std::abs(e.anchor_II - 1.0), e.history_max - 1.0);
    set.add(make_record("rescale_normalization", traj.scenario_id, -norm, where, 1e-6));
    set.add(make_record("rescale_scaling", traj.scenario_id, -e.scaling_residual, where, 1e-10));
  }
  if (want_vg) {
    const RescaleEntry& deepest = seq.entries.back();
    VolumeGrowthResult res = volume_growth_check(deepest.imm, deepest.geom, deepest.anchor, st.spec.analysis.volume_radii,
                                                 traj.scenario_id, tol.discrete);
    res.record.worst_location = with_loc("level " + std::to_string(deepest.level), res.record.worst_location);
    set.add(res.record);
  }
}

}  // namespace

Stage stage_from_string(const std::string& name) {
  if (name == "simulate") return Stage::Simulate;
  if (name == "analyze") return Stage::Analyze;
  if (name == "verify") return Stage::Verify;
  if (name == "rescale") return Stage::Rescale;
  throw Error(ErrorKind::InvalidArgument, "unknown stage '" + name + "'");
}

const std::vector<std::string>& known_check_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v{"trace_A",          "A_cauchy_schwarz",     "A_le_H_II",           "h_symmetry",
                               "A_zero_iff_H_zero", "A_cauchy_schwarz_codim", "metric_evolution",  "volume_evolution",
                               "volume_monotone",  "curvature_evolution",  "displacement",        "metric_equivalence",
                               "ball_inclusion",   "injectivity_bound",    "graph_radius",        "hessian_bound",
                               "eigen_bound",      "integrated_estimate",  "volume_growth",       "rescale_normalization",
                               "rescale_scaling"};
    std::sort(v.begin(), v.end());
    return v;
  }();
  return ids;
}

std::vector<CheckRecord> run_checks(const StoredTrajectory& stored, const Tolerances& tol,
                                    const std::set<std::string>& filter) {
  for (const std::string& id : filter) {
    if (!std::binary_search(known_check_ids().begin(), known_check_ids().end(), id)) {
      throw Error(ErrorKind::InvalidArgument, "unknown check id '" + id + "'");
    }
  }
  const Trajectory& traj = stored.traj;
  const ScenarioSpec& spec = stored.spec;
  const std::string& id = traj.scenario_id;
  RecordSet set(filter);
  const SampledImmersion& first = traj.snapshots.front().imm;
  const bool graph = first.kind == ImmersionKind::DiscGraph;

  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    for (const CheckRecord& r : identity_checks(traj.snapshots[i].geom, id, tol, snap_loc(static_cast<int>(i), traj.snapshots[i]))) {
      set.add(r);
    }
  }

  evolution_checks(traj, tol, set);

  if (set.wants("displacement")) {
    const DisplacementResult d = displacement_bound(traj);
    set.add(make_record("displacement", id, d.worst_margin,
                        "snapshot " + std::to_string(d.worst_snapshot) + " sample " + std::to_string(d.worst_sample),
                        tol.inequality));
  }
  if (set.wants("metric_equivalence")) set.add(metric_equivalence_check(traj, tol.inequality));
  if (set.wants("ball_inclusion")) ball_checks(stored, tol, set);

  // Shape estimates on the initial and the final state.
  std::vector<int> ends{0};
  if (traj.snapshots.size() > 1) ends.push_back(static_cast<int>(traj.snapshots.size()) - 1);
  for (int e : ends) {
    const Snapshot& s = traj.snapshots[static_cast<std::size_t>(e)];
    const std::string where = snap_loc(e, s);
    if (!graph && set.wants("injectivity_bound")) {
      InjectivityOptions opts;
      opts.anchors = spec.analysis.injectivity_anchors;
      InjectivityResult r = injectivity_bound_check(s.imm, s.geom, id, tol.discrete, opts);
      r.record.worst_location = with_loc(where, r.record.worst_location);
      set.add(r.record);
    }
    if (set.wants("graph_radius")) {
      GraphRadiusOptions opts;
      opts.find_failure_radius = false;
      for (int q : spread_anchors(s.imm, spec.analysis.graph_radius_anchors)) {
        GraphRadiusResult r = graph_radius_check(s.imm, s.geom, q, spec.analysis.alpha, id, opts);
        r.record.worst_location = with_loc(where, r.record.worst_location);
        set.add(r.record);
      }
    }
    if (graph && (set.wants("hessian_bound") || set.wants("eigen_bound"))) {
      const GraphData data = graph_data_from_immersion(s.imm, spec.shape.r);
      CheckRecord h = hessian_bound_check(data, id, tol.inequality);
      h.worst_location = with_loc(where, h.worst_location);
      set.add(h);
      CheckRecord g = eigen_bound_check(data, id, tol.inequality);
      g.worst_location = with_loc(where, g.worst_location);
      set.add(g);
    }
  }

  if (set.wants("integrated_estimate")) integrated_check(stored, tol, set);
  rescale_checks(stored, tol, set);
  return set.take();
}

bool all_pass(const std::vector<CheckRecord>& records) {
  return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass || r.informational; });
}

std::string default_out_dir(const ScenarioSpec& spec) {
  return spec.output.empty() ? (fs::path("out") / spec.name).string() : spec.output;
}

int simulate_stage(const ScenarioSpec& spec, const std::string& out_dir) {
  const Trajectory traj = run(make_flow_config(spec));
  write_trajectory(traj, spec, out_dir);
  return kExitPass;
}

int analyze_stage(const std::string& traj_dir, const std::string& out_dir) {
  const StoredTrajectory st = read_trajectory(traj_dir);
  const Analysis a = analyze_trajectory(st.traj, st.spec.analysis.rescale_levels);
  write_text_file((fs::path(out_dir) / "analysis.json").string(), analysis_json(a));
  return kExitPass;
}

int verify_stage(const std::string& traj_dir, const std::string& out_dir, ToleranceProfile profile,
                 const std::set<std::string>& checks) {
  const StoredTrajectory st = read_trajectory(traj_dir);
  const std::vector<CheckRecord> records = run_checks(st, tolerances(profile), checks);
  write_text_file((fs::path(out_dir) / "verification.json").string(), verification_json(records));
  return all_pass(records) ? kExitPass : kExitCheckFailure;
}

int rescale_stage(const std::string& traj_dir, const std::string& out_dir, int levels) {
  const StoredTrajectory st = read_trajectory(traj_dir);
  if (st.traj.stop_reason != StopReason::SingularStop) {
    throw Error(ErrorKind::InsufficientData, "rescaling needs a trajectory that stopped at a singularity");
  }
  const RescaleSequence seq = parabolic_rescale(st.traj, levels);
  bool ok = true;
  for (const RescaleEntry& e : seq.entries) {
    Snapshot s;
    s.step = e.step;
    s.t = 0.0;
    s.imm = e.imm;
    s.geom = e.geom;
    std::ostringstream csv;
    write_snapshot_csv(s, csv);
    char name[32];
    std::snprintf(name, sizeof name, "rescaled/level_%02d.csv", e.level);
    write_text_file((fs::path(out_dir) / name).string(), csv.str());
    ok = ok && std::abs(e.anchor_II - 1.0) <= 1e-6 && e.history_max <= 1.0 + 1e-6 && e.scaling_residual <= 1e-10;
  }
  write_text_file((fs::path(out_dir) / "rescale.json").string(), rescale_json(seq));
  return ok ? kExitPass : kExitCheckFailure;
}

std::string report_stage(const std::string& dir) {
  const std::string text = summary_text(dir);
  write_text_file((fs::path(dir) / "summary.txt").string(), text);
  return text;
}

int run_pipeline(const ScenarioSpec& spec, const std::set<Stage>& stages, const PipelineOptions& options) {
  const std::string dir = options.out_dir.empty() ? default_out_dir(spec) : options.out_dir;
  int code = kExitPass;
  if (stages.count(Stage::Simulate)) code = std::max(code, simulate_stage(spec, dir));
  if (!fs::exists(fs::path(dir) / "index.json")) {
    throw Error(ErrorKind::IoError, "no trajectory in " + dir + "; run the simulate stage first");
  }
  if (stages.count(Stage::Analyze)) code = std::max(code, analyze_stage(dir, dir));
  if (stages.count(Stage::Verify)) code = std::max(code, verify_stage(dir, dir, options.profile, options.checks));
  // Rescaling only applies to runs that stopped at a singularity; skip it in batch runs.
  if (stages.count(Stage::Rescale) && read_trajectory(dir).traj.stop_reason == StopReason::SingularStop) {
    const int levels = options.rescale_levels > 0 ? options.rescale_levels : spec.analysis.rescale_levels;
    code = std::max(code, rescale_stage(dir, dir, levels));
  }
  return code;
}

}  // namespace mcf
