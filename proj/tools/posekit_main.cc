// Copyright 2026 The posekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// posekit: fit bins, encode/decode token streams, project trajectories,
// build geometric priors, validate records, emit training streams and
// evaluate 3D grounding.
//
// Machine-readable results go to stdout (JSON with --json); human summaries
// go to stderr.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "cli_util.h"
#include "json.hpp"
#include "posekit/error.h"
#include "posekit/eval3d.h"
#include "posekit/geometry.h"
#include "posekit/ingest.h"
#include "posekit/priors.h"
#include "posekit/quantizer.h"
#include "posekit/raster_io.h"
#include "posekit/records.h"
#include "posekit/vocab_grammar.h"

namespace posekit::cli {
namespace {

using nlohmann::json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string quantizers;
  std::string vocab_config;
  bool skip_on_error = false;
  int jobs = 1;
  bool json = false;
};

struct Session {
  QuantizerSet quantizers;
  Vocab vocab;
};

Session LoadSession(const GlobalOptions& g) {
  if (g.quantizers.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no bin tables: pass --quantizers or set POSEKIT_QUANTIZERS");
  }
  QuantizerSet q = LoadQuantizers(g.quantizers);
  const VocabConfig config = g.vocab_config.empty()
                                 ? VocabConfig::FromQuantizers(q)
                                 : LoadVocabConfig(g.vocab_config);
  Vocab v = BuildVocab(config);
  if (!v.CompatibleWith(q)) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocab config family sizes do not match the bin tables");
  }
  return {std::move(q), std::move(v)};
}

// Writes to `path`, or stdout when empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// fit-bins

struct FitBinsArgs {
  std::string input;
  std::string out;
  std::uint32_t bins = kDefaultBins;
};

int RunFitBins(const GlobalOptions& g, const FitBinsArgs& a) {
  const auto records = ReadRecords(a.input, g.skip_on_error);
  FitSamples samples;
  auto add_translation = [&](const Se3Pose& p) {
    samples.trans_xy.push_back(p.translation().x());
    samples.trans_xy.push_back(p.translation().y());
    samples.trans_z.push_back(p.translation().z());
  };
  for (const NumberedRecord& nr : records) {
    if (const auto* scene = std::get_if<SceneRecord>(&nr.record)) {
      for (const Annotation& ann : scene->annotations) {
        add_translation(ann.pose);
        if (ann.size) {
          for (int i = 0; i < 3; ++i) samples.size.push_back((*ann.size)[i]);
        }
      }
      continue;
    }
    const auto& traj = std::get<TrajectoryRecord>(nr.record);
    for (const CameraView& view : traj.views) {
      for (const ArmStream& arm : ProjectRecord(traj, view.view_id)) {
        for (const Se3Pose& p : arm.poses) add_translation(p);
      }
    }
  }
  const QuantizerSet q = FitQuantizerSet(samples, a.bins);
  SaveQuantizers(q, a.out);

  const std::pair<TokenFamily, const std::vector<double>*> fitted[] = {
      {TokenFamily::kTransXy, &samples.trans_xy},
      {TokenFamily::kTransZ, &samples.trans_z},
      {TokenFamily::kSize, &samples.size}};
  json families = json::array();
  std::cerr << "fitted " << a.bins << " bins per family from "
            << records.size() << " records -> " << a.out << '\n';
  for (const auto& [family, values] : fitted) {
    const Occupancy o = MeasureOccupancy(q.table(family), *values);
    std::cerr << std::fixed << std::setprecision(4) << "  "
              << FamilyName(family) << ": samples=" << o.samples
              << " occupancy=[" << o.min_count << ", " << o.max_count
              << "] expected=" << o.expected
              << " entropy_ratio=" << o.entropy_ratio << '\n';
    families.push_back({{"family", FamilyName(family)},
                        {"samples", o.samples},
                        {"min_count", o.min_count},
                        {"max_count", o.max_count},
                        {"expected", o.expected},
                        {"entropy_bits", o.entropy_bits},
                        {"entropy_ratio", o.entropy_ratio}});
  }
  if (g.json) {
    std::cout << json{{"bins", a.bins},
                      {"out", a.out},
                      {"version", q.version()},
                      {"families", families}}
                     .dump()
              << '\n';
  }
  return kExitOk;
}

// encode / emit

struct EmitArgs {
  std::string input;
  std::string out;
  std::string format = "binary";
  std::optional<std::string> view;
  int horizon = kDefaultHorizon;
  double dt = kDefaultDt;
  int patch = 14;
  std::string mask_policy;
};

int RunEmit(const GlobalOptions& g, const EmitArgs& a, bool include_priors) {
  const Session s = LoadSession(g);
  EmitOptions options;
  options.mask_policy = ParseMaskPolicy(a.mask_policy, g.seed);
  options.patch_size = a.patch;
  options.include_priors = include_priors;
  options.view_id = a.view;
  options.horizon = a.horizon;
  options.dt = a.dt;
  options.skip_on_error = g.skip_on_error;
  options.jobs = g.jobs;
  options.base_dir = std::filesystem::path(a.input).parent_path();

  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + a.input);
  DirectorySink sink(a.out, TokenFormatFromName(a.format));
  const EmitStats stats =
      EmitTrainingStream(in, s.vocab, s.quantizers, options, sink);
  sink.Flush();

  for (const EmitFailure& f : stats.failures) {
    std::cerr << "skipped line " << f.line << " ('" << f.record_id
              << "'): " << f.message << '\n';
  }
  std::cerr << "wrote " << stats.emitted << " examples to " << a.out;
  if (stats.skipped > 0) std::cerr << " (" << stats.skipped << " skipped)";
  std::cerr << '\n';
  if (g.json) {
    json failures = json::array();
    for (const EmitFailure& f : stats.failures) {
      failures.push_back({{"ordinal", f.ordinal},
                          {"line", f.line},
                          {"record_id", f.record_id},
                          {"message", f.message}});
    }
    std::cout << json{{"emitted", stats.emitted},
                      {"skipped", stats.skipped},
                      {"vocab_size", s.vocab.size()},
                      {"failures", failures}}
                     .dump()
              << '\n';
  }
  return kExitOk;
}

// decode

struct DecodeArgs {
  std::string input;
  std::string out;
  std::string format;
};

int RunDecode(const GlobalOptions& g, const DecodeArgs& a) {
  const Session s = LoadSession(g);
  const TokenFormat format = a.format.empty() ? TokenFormatForPath(a.input)
                                              : TokenFormatFromName(a.format);
  const std::string data = ReadFile(a.input);
  std::vector<SequenceItem> items;
  try {
    const std::vector<TokenId> ids = ParseTokens(data, format);
    items = ParseSequence(ids, s.vocab, s.quantizers);
  } catch (const Error& e) {
    if (e.position()) {
      std::cerr << "token offset " << *e.position();
      if (format == TokenFormat::kBinary) {
        std::cerr << " (byte offset " << *e.position() * 4 << ")";
      }
      std::cerr << '\n';
    }
    throw;
  }
  Output out(a.out);
  for (const SequenceItem& item : items) {
    out.stream() << ItemToJson(item).dump() << '\n';
  }
  std::cerr << "decoded " << items.size() << " items\n";
  return kExitOk;
}

// project

struct ProjectArgs {
  std::string input;
  std::string out;
  std::optional<std::string> view;
  int horizon = kDefaultHorizon;
  double dt = kDefaultDt;
  std::optional<double> t0;
};

int RunProject(const GlobalOptions& g, const ProjectArgs& a) {
  const auto records = ReadRecords(a.input, g.skip_on_error);
  Output out(a.out);
  std::size_t streams = 0;
  for (const NumberedRecord& nr : records) {
    const auto* traj = std::get_if<TrajectoryRecord>(&nr.record);
    if (traj == nullptr) {
      const Error e(ErrorCode::kSchemaError,
                    "line " + std::to_string(nr.line) +
                        ": project needs trajectory records",
                    nr.line);
      if (!g.skip_on_error) throw e;
      std::cerr << "skipped " << e.what() << '\n';
      continue;
    }
    std::vector<std::string> views;
    if (a.view) {
      views.push_back(*a.view);
    } else {
      for (const CameraView& v : traj->views) views.push_back(v.view_id);
    }
    for (const std::string& view_id : views) {
      for (const ArmStream& arm : ProjectRecord(*traj, view_id)) {
        const double t0 = a.t0.value_or(arm.timestamps.front());
        const CameraFrameTrajectory cft =
            ResampleHorizon(arm, view_id, t0, a.horizon, a.dt);
        json waypoints = json::array();
        for (const Se3Pose& p : cft.waypoints.waypoints) {
          waypoints.push_back(PoseToJson(p));
        }
        json line = {{"record_id", traj->id},
                     {"view_id", cft.view_id},
                     {"arm_id", cft.arm_id},
                     {"t0", t0},
                     {"dt", a.dt},
                     {"horizon", cft.horizon},
                     {"waypoints", std::move(waypoints)}};
        if (cft.waypoints.gripper) line["gripper"] = *cft.waypoints.gripper;
        out.stream() << line.dump() << '\n';
        ++streams;
      }
    }
  }
  std::cerr << "projected " << streams << " streams from " << records.size()
            << " records\n";
  return kExitOk;
}

// priors

struct PriorsArgs {
  std::string intrinsics;
  std::string depth;
  std::string out;
  int patch = 14;
  std::string mask_policy;
  std::uint64_t stream_index = 0;
};

int RunPriors(const GlobalOptions& g, const PriorsArgs& a) {
  const json j = json::parse(ReadFile(a.intrinsics), nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::kSchemaError, a.intrinsics + ": invalid JSON");
  }
  const CameraIntrinsics k = ParseIntrinsicsJson(j);
  const MaskPolicy policy = ParseMaskPolicy(a.mask_policy, g.seed);
  std::optional<DepthMap> depth;
  if (!a.depth.empty()) {
    depth = LoadDepthRaster(a.depth);
    if (depth->height() != k.height() || depth->width() != k.width()) {
      std::cerr << "posekit: error: depth raster is " << depth->width() << "x"
                << depth->height() << " but intrinsics are " << k.width()
                << "x" << k.height() << '\n';
      return kExitShape;
    }
  }
  const std::vector<PriorField> fields =
      BuildPriorFields(k, std::move(depth), policy, a.stream_index, a.patch);
  if (!a.out.empty()) {
    const std::vector<std::uint8_t> block = EncodePriorBlock(fields);
    WriteFile(a.out, std::string_view(reinterpret_cast<const char*>(block.data()),
                                      block.size()));
  }
  json summary = json::array();
  for (const PriorField& f : fields) {
    const char* name = f.kind == PriorKind::kRaymap ? "raymap" : "depth_mask";
    std::cerr << name << ": " << f.grid.patch_count() << " patches of "
              << f.grid.patch_dim() << (f.dropped ? " (dropped)" : "")
              << '\n';
    summary.push_back({{"kind", name},
                       {"dropped", f.dropped},
                       {"patches", f.grid.patch_count()},
                       {"patch_dim", f.grid.patch_dim()},
                       {"grid", {f.grid.grid_rows(), f.grid.grid_cols()}}});
  }
  if (g.json) {
    std::cout << json{{"height", k.height()},
                      {"width", k.width()},
                      {"patch", a.patch},
                      {"stream_index", a.stream_index},
                      {"fields", summary}}
                     .dump()
              << '\n';
  }
  return kExitOk;
}

// evaluate

struct EvaluateArgs {
  std::string pred;
  std::string gt;
  std::string out;
  double iou = kDefaultIouThreshold;
};

std::vector<SceneRecord> ReadScenes(const std::string& path,
                                    const GlobalOptions& g) {
  std::vector<SceneRecord> scenes;
  for (NumberedRecord& nr : ReadRecords(path, g.skip_on_error)) {
    auto* scene = std::get_if<SceneRecord>(&nr.record);
    if (scene == nullptr) {
      throw Error(ErrorCode::kSchemaError,
                  path + ":" + std::to_string(nr.line) +
                      ": evaluation needs scene records",
                  nr.line);
    }
    scenes.push_back(std::move(*scene));
  }
  return scenes;
}

int RunEvaluate(const GlobalOptions& g, const EvaluateArgs& a) {
  std::vector<Detection> preds;
  for (const SceneRecord& s : ReadScenes(a.pred, g)) {
    for (Detection& d : DetectionsFromScene(s)) preds.push_back(std::move(d));
  }
  std::vector<GroundTruth> gts;
  for (const SceneRecord& s : ReadScenes(a.gt, g)) {
    for (GroundTruth& t : GroundTruthFromScene(s)) gts.push_back(std::move(t));
  }
  const EvalReport report = Evaluate(preds, gts, a.iou);
  const std::string report_json = ReportToJson(report);
  if (!a.out.empty()) WriteFile(a.out, report_json + "\n");
  for (const auto& [key, c] : report.per_category) {
    std::cerr << "  " << key << ": AP="
              << (c.ap ? std::to_string(*c.ap) : std::string("n/a"))
              << " tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn << '\n';
  }
  if (g.json) {
    std::cout << report_json << '\n';
  } else {
    std::cout << "mAP@" << a.iou << " " << std::setprecision(6) << std::fixed
              << report.map << '\n';
  }
  return kExitOk;
}

// validate

struct ValidateArgs {
  std::string input;
};

int RunValidate(const GlobalOptions& g, const ValidateArgs& a) {
  std::size_t failures = 0;
  const auto records = ReadRecords(a.input, g.skip_on_error, &failures);
  std::size_t scenes = 0;
  for (const NumberedRecord& nr : records) {
    if (std::holds_alternative<SceneRecord>(nr.record)) ++scenes;
  }
  std::cerr << records.size() << " valid records (" << scenes << " scene, "
            << records.size() - scenes << " trajectory), " << failures
            << " invalid\n";
  if (g.json) {
    std::cout << json{{"valid", records.size()},
                      {"invalid", failures},
                      {"scenes", scenes},
                      {"trajectories", records.size() - scenes}}
                     .dump()
              << '\n';
  }
  return failures == 0 ? kExitOk : kExitSchema;
}

int Main(int argc, char** argv) {
  CLI::App app{"posekit: pose-token data plane tools"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kQuantizerFormatVersion) +
                                        " " + std::string(kGrammarVersion));

  GlobalOptions g;
  bool strict = false;
  app.add_option("--seed", g.seed, "Seed for all randomized operations")
      ->capture_default_str();
  app.add_option("--quantizers", g.quantizers, "Bin table file (.pkb)")
      ->envname("POSEKIT_QUANTIZERS");
  app.add_option("--vocab-config", g.vocab_config,
                 "JSON file with per-family vocabulary sizes");
  auto* strict_flag =
      app.add_flag("--strict", strict, "Abort on the first bad record (default)");
  app.add_flag("--skip-on-error", g.skip_on_error,
               "Report and skip bad records")
      ->excludes(strict_flag);
  app.add_option("--jobs", g.jobs, "Worker threads")
      ->check(CLI::Range(1, 1024))
      ->capture_default_str();
  app.add_flag("--json", g.json, "Machine-readable JSON on stdout");

  int status = kExitOk;

  FitBinsArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-bins", "Fit quantile bin tables");
  fit_cmd->add_option("--input", fit.input, "Records (.jsonl)")->required();
  fit_cmd->add_option("--out", fit.out, "Output bin tables (.pkb)")->required();
  fit_cmd->add_option("--bins", fit.bins, "Bins per family")
      ->check(CLI::Range(1u, 1u << 20))
      ->capture_default_str();
  fit_cmd->callback([&] { status = RunFitBins(g, fit); });

  auto add_emit_options = [](CLI::App* cmd, EmitArgs& e) {
    cmd->add_option("--input", e.input, "Records (.jsonl)")->required();
    cmd->add_option("--out", e.out, "Output directory")->required();
    cmd->add_option("--format", e.format, "Token file format")
        ->check(CLI::IsMember({"binary", "text"}))
        ->capture_default_str();
    cmd->add_option("--view", e.view, "Trajectory view (default: first view)");
    cmd->add_option("--horizon", e.horizon, "Waypoints per trajectory")
        ->capture_default_str();
    cmd->add_option("--dt", e.dt, "Waypoint spacing in seconds")
        ->capture_default_str();
  };
  EmitArgs encode;
  auto* encode_cmd =
      app.add_subcommand("encode", "Encode records into token files");
  add_emit_options(encode_cmd, encode);
  encode_cmd->callback([&] { status = RunEmit(g, encode, false); });

  EmitArgs emit;
  auto* emit_cmd = app.add_subcommand(
      "emit", "Emit the training stream: tokens, priors and manifest");
  add_emit_options(emit_cmd, emit);
  emit_cmd->add_option("--patch", emit.patch, "Patch size")
      ->capture_default_str();
  emit_cmd->add_option("--mask-policy", emit.mask_policy,
                       "p_ray=P,p_depth=P,keep=F");
  emit_cmd->callback([&] { status = RunEmit(g, emit, true); });

  DecodeArgs decode;
  auto* decode_cmd =
      app.add_subcommand("decode", "Decode a token file into JSON Lines");
  decode_cmd->add_option("--input", decode.input, "Token file")->required();
  decode_cmd->add_option("--out", decode.out, "Output (default stdout)");
  decode_cmd->add_option("--format", decode.format,
                         "binary or text (default: by extension)")
      ->check(CLI::IsMember({"binary", "text"}));
  decode_cmd->callback([&] { status = RunDecode(g, decode); });

  ProjectArgs project;
  auto* project_cmd = app.add_subcommand(
      "project", "Project trajectories into camera frames and resample");
  project_cmd->add_option("--input", project.input, "Trajectory records")
      ->required();
  project_cmd->add_option("--out", project.out, "Output (default stdout)");
  project_cmd->add_option("--view", project.view,
                          "View to project into (default: every view)");
  project_cmd->add_option("--horizon", project.horizon, "Waypoints")
      ->capture_default_str();
  project_cmd->add_option("--dt", project.dt, "Waypoint spacing in seconds")
      ->capture_default_str();
  project_cmd->add_option("--t0", project.t0,
                          "Start time (default: first timestamp)");
  project_cmd->callback([&] { status = RunProject(g, project); });

  PriorsArgs priors;
  auto* priors_cmd = app.add_subcommand(
      "priors", "Build patchified raymap and depth-mask priors");
  priors_cmd->add_option("--intrinsics", priors.intrinsics,
                         "Intrinsics JSON")
      ->required();
  priors_cmd->add_option("--depth", priors.depth, "Depth raster (.png, .pfm)");
  priors_cmd->add_option("--patch", priors.patch, "Patch size")
      ->capture_default_str();
  priors_cmd->add_option("--mask-policy", priors.mask_policy,
                         "p_ray=P,p_depth=P,keep=F");
  priors_cmd->add_option("--stream-index", priors.stream_index,
                         "Stream index for masking randomness")
      ->capture_default_str();
  priors_cmd->add_option("--out", priors.out, "Output prior block (.pkp)");
  priors_cmd->callback([&] { status = RunPriors(g, priors); });

  EvaluateArgs evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "3D grounding mAP at an IoU threshold");
  evaluate_cmd->add_option("--pred", evaluate.pred, "Prediction records")
      ->required();
  evaluate_cmd->add_option("--gt", evaluate.gt, "Ground-truth records")
      ->required();
  evaluate_cmd->add_option("--iou", evaluate.iou, "IoU threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  evaluate_cmd->add_option("--out", evaluate.out, "Report JSON path");
  evaluate_cmd->callback([&] { status = RunEvaluate(g, evaluate); });

  ValidateArgs validate;
  auto* validate_cmd =
      app.add_subcommand("validate", "Check records against the schema");
  validate_cmd->add_option("--input", validate.input, "Records (.jsonl)")
      ->required();
  validate_cmd->callback([&] { status = RunValidate(g, validate); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "posekit: error: " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const json::exception& e) {
    std::cerr << "posekit: error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "posekit: error: " << e.what() << '\n';
    return kExitUsage;
  }
  return status;
}

}  // namespace
}  // namespace posekit::cli

int main(int argc, char** argv) { return posekit::cli::Main(argc, argv); }
