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

#include "posekit/ingest.h"

#include <algorithm>
#include <atomic>
#include <thread>
#include <utility>
#include <variant>

#include "json.hpp"
#include "posekit/error.h"
#include "posekit/raster_io.h"

namespace posekit {
namespace {

using nlohmann::json;

const CameraView& FindView(const TrajectoryRecord& r, std::string_view view_id) {
  for (const CameraView& v : r.views) {
    if (v.view_id == view_id) return v;
  }
  throw Error(ErrorCode::kUnknownView, "record '" + r.id + "' has no view '" +
                                           std::string(view_id) + "'");
}

std::string DefaultInstruction(const SceneRecord& r) {
  std::vector<std::string> seen;
  for (const Annotation& a : r.annotations) {
    if (std::find(seen.begin(), seen.end(), a.category) == seen.end()) {
      seen.push_back(a.category);
    }
  }
  std::string out;
  for (const std::string& c : seen) {
    if (!out.empty()) out += ", ";
    out += c;
  }
  return out;
}

ExampleBundle BuildSceneBundle(const SceneRecord& r, std::uint64_t ordinal,
                               const Vocab& vocab, const QuantizerSet& q,
                               const EmitOptions& options) {
  ExampleBundle b;
  b.ordinal = ordinal;
  b.record_id = r.id;
  b.kind = "scene";
  b.instruction = r.instruction.value_or(DefaultInstruction(r));
  for (std::size_t i = 0; i < r.annotations.size(); ++i) {
    const Annotation& a = r.annotations[i];
    PoseTuple t{a.category, r.NormalizedCenter(i), a.pose, a.size};
    const auto ids = SerializeTuple(t, vocab, q);
    b.tokens.insert(b.tokens.end(), ids.begin(), ids.end());
  }
  if (options.include_priors) {
    std::optional<DepthMap> depth;
    if (r.depth_ref) {
      std::filesystem::path p(*r.depth_ref);
      if (p.is_relative()) p = options.base_dir / p;
      depth = LoadDepthRaster(p);
    }
    b.priors = BuildPriorFields(r.intrinsics, std::move(depth),
                                options.mask_policy, ordinal,
                                options.patch_size);
  }
  return b;
}

ExampleBundle BuildTrajectoryBundle(const TrajectoryRecord& r,
                                    std::uint64_t ordinal, const Vocab& vocab,
                                    const QuantizerSet& q,
                                    const EmitOptions& options) {
  const std::string view_id = options.view_id.value_or(r.views.front().view_id);
  const CameraView& view = FindView(r, view_id);
  ExampleBundle b;
  b.ordinal = ordinal;
  b.record_id = r.id;
  b.kind = "trajectory";
  b.instruction = r.instruction;
  for (const ArmStream& arm : ProjectRecord(r, view_id)) {
    const CameraFrameTrajectory cft = ResampleHorizon(
        arm, view_id, arm.timestamps.front(), options.horizon, options.dt);
    const auto ids = SerializeTrajectory(cft.waypoints, vocab, q);
    b.tokens.insert(b.tokens.end(), ids.begin(), ids.end());
  }
  if (options.include_priors) {
    b.priors = BuildPriorFields(view.intrinsics, std::nullopt,
                                options.mask_policy, ordinal,
                                options.patch_size);
  }
  return b;
}

std::string BestEffortId(const std::string& line) {
  const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_object() && j.contains("id") && j["id"].is_string()) {
    return j["id"].get<std::string>();
  }
  return "";
}

struct PendingRecord {
  std::string text;
  std::size_t line = 0;
  std::uint64_t ordinal = 0;
};

struct BuildResult {
  std::optional<ExampleBundle> bundle;
  std::optional<Error> error;
};

// Builds bundles for `batch` with `jobs` workers; results keep batch order.
std::vector<BuildResult> BuildBatch(const std::vector<PendingRecord>& batch,
                                    const Vocab& vocab, const QuantizerSet& q,
                                    const EmitOptions& options) {
  std::vector<BuildResult> results(batch.size());
  auto build_one = [&](std::size_t i) {
    try {
      const Record rec = ParseRecord(batch[i].text);
      results[i].bundle = BuildBundle(rec, batch[i].ordinal, vocab, q, options);
    } catch (const Error& e) {
      results[i].error = e;
    } catch (const std::exception& e) {
      results[i].error = Error(ErrorCode::kInvalidArgument, e.what());
    }
  };
  const int jobs = std::max(1, options.jobs);
  if (jobs == 1 || batch.size() < 2) {
    for (std::size_t i = 0; i < batch.size(); ++i) build_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  const auto n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), batch.size());
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < batch.size(); i = next++) build_one(i);
    });
  }
  workers.clear();  // joins
  return results;
}

}  // namespace

std::vector<ArmStream> ProjectRecord(const TrajectoryRecord& r,
                                     std::string_view view_id) {
  const CameraView& view = FindView(r, view_id);
  std::vector<ArmStream> streams;
  if (r.frames.empty()) return streams;
  for (const ArmState& a : r.frames.front().arms) {
    streams.push_back({a.arm_id, {}, {}, {}});
  }
  for (const TrajectoryFrame& f : r.frames) {
    for (std::size_t a = 0; a < f.arms.size() && a < streams.size(); ++a) {
      streams[a].timestamps.push_back(f.timestamp);
      streams[a].poses.push_back(
          BaseToCamera(f.arms[a].ee_pose_base, view.extrinsics));
      streams[a].gripper.push_back(f.arms[a].gripper);
    }
  }
  return streams;
}

StreamSample SampleStream(const ArmStream& s, double t) {
  if (s.poses.empty()) {
    throw Error(ErrorCode::kEmptyTrajectory, "arm stream has no poses");
  }
  const auto& ts = s.timestamps;
  auto gripper_at = [&](std::size_t i) {
    return i < s.gripper.size() ? s.gripper[i] : 0.0;
  };
  if (t <= ts.front()) return {s.poses.front(), gripper_at(0)};
  if (t >= ts.back()) return {s.poses.back(), gripper_at(ts.size() - 1)};
  const std::size_t hi = static_cast<std::size_t>(
      std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
  const std::size_t lo = hi - 1;
  if (ts[lo] == t) return {s.poses[lo], gripper_at(lo)};
  const double alpha = (t - ts[lo]) / (ts[hi] - ts[lo]);
  const Se3Pose& a = s.poses[lo];
  const Se3Pose& b = s.poses[hi];
  const Eigen::Vector3d translation =
      (1.0 - alpha) * a.translation() + alpha * b.translation();
  const double gripper =
      (1.0 - alpha) * gripper_at(lo) + alpha * gripper_at(hi);
  return {Se3Pose(translation, Slerp(a.rotation(), b.rotation(), alpha)),
          gripper};
}

CameraFrameTrajectory ResampleHorizon(const ArmStream& s, std::string view_id,
                                      double t0, int horizon, double dt) {
  if (s.poses.empty() || s.timestamps.empty()) {
    throw Error(ErrorCode::kEmptyTrajectory, "arm stream has no poses");
  }
  if (horizon < 1) {
    throw Error(ErrorCode::kInvalidHorizon, "horizon must be >= 1");
  }
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidHorizon, "dt must be positive");
  }
  if (!(t0 >= s.timestamps.front() && t0 <= s.timestamps.back())) {
    throw Error(ErrorCode::kInvalidHorizon,
                "t0 outside the trajectory's time span");
  }
  CameraFrameTrajectory out;
  out.view_id = std::move(view_id);
  out.arm_id = s.arm_id;
  out.horizon = horizon;
  const bool has_gripper = s.gripper.size() == s.poses.size();
  std::vector<double> gripper;
  for (int k = 0; k < horizon; ++k) {
    const StreamSample sample = SampleStream(s, t0 + k * dt);
    out.waypoints.waypoints.push_back(sample.pose);
    gripper.push_back(sample.gripper);
  }
  if (has_gripper) out.waypoints.gripper = std::move(gripper);
  return out;
}

std::vector<PriorField> BuildPriorFields(const CameraIntrinsics& k,
                                         std::optional<DepthMap> depth,
                                         const MaskPolicy& policy,
                                         std::uint64_t stream_index,
                                         int patch_size) {
  if (depth &&
      (depth->height() != k.height() || depth->width() != k.width())) {
    throw Error(ErrorCode::kInvariantViolation,
                "depth raster is " + std::to_string(depth->width()) + "x" +
                    std::to_string(depth->height()) + " but intrinsics are " +
                    std::to_string(k.width()) + "x" +
                    std::to_string(k.height()));
  }
  if (depth && policy.sparse_keep_fraction < 1.0) {
    depth = SparseDepthSample(*depth, policy.sparse_keep_fraction, policy.seed,
                              stream_index);
  }
  MaskedPriors masked =
      MaskModality(Raymap(k), std::move(depth), policy, stream_index);
  std::vector<PriorField> fields;
  fields.push_back({PriorKind::kRaymap, masked.ray_dropped,
                    Patchify(*masked.ray, patch_size)});
  if (masked.depth) {
    fields.push_back({PriorKind::kDepthMask, masked.depth_dropped,
                      Patchify(StackDepthMask(*masked.depth), patch_size)});
  }
  return fields;
}

ExampleBundle BuildBundle(const Record& record, std::uint64_t ordinal,
                          const Vocab& vocab, const QuantizerSet& quantizers,
                          const EmitOptions& options) {
  if (const auto* scene = std::get_if<SceneRecord>(&record)) {
    return BuildSceneBundle(*scene, ordinal, vocab, quantizers, options);
  }
  return BuildTrajectoryBundle(std::get<TrajectoryRecord>(record), ordinal,
                               vocab, quantizers, options);
}

DirectorySink::DirectorySink(const std::filesystem::path& dir,
                             TokenFormat format)
    : dir_(dir), format_(format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const bool binary = format == TokenFormat::kBinary;
  tokens_.open(dir / (binary ? "tokens.bin" : "tokens.txt"),
               std::ios::binary | std::ios::trunc);
  manifest_.open(dir / "manifest.jsonl", std::ios::binary | std::ios::trunc);
  if (!tokens_ || !manifest_) {
    throw Error(ErrorCode::kIoFailure, "cannot create outputs in " + dir.string());
  }
}

void DirectorySink::Write(const ExampleBundle& b) {
  const std::string token_data = FormatTokens(b.tokens, format_);
  tokens_.write(token_data.data(),
                static_cast<std::streamsize>(token_data.size()));

  json line = {{"ordinal", b.ordinal},
               {"record_id", b.record_id},
               {"kind", b.kind},
               {"instruction", b.instruction},
               {"token_offset", token_count_},
               {"token_count", b.tokens.size()}};
  token_count_ += b.tokens.size();
  if (!b.priors.empty()) {
    if (!priors_.is_open()) {
      priors_.open(dir_ / "priors.bin", std::ios::binary | std::ios::trunc);
      if (!priors_) {
        throw Error(ErrorCode::kIoFailure,
                    "cannot create " + (dir_ / "priors.bin").string());
      }
    }
    const std::vector<std::uint8_t> block = EncodePriorBlock(b.priors);
    priors_.write(reinterpret_cast<const char*>(block.data()),
                  static_cast<std::streamsize>(block.size()));
    line["priors_offset"] = prior_bytes_;
    line["priors_bytes"] = block.size();
    prior_bytes_ += block.size();
    for (const PriorField& f : b.priors) {
      line[f.kind == PriorKind::kRaymap ? "ray_dropped" : "depth_dropped"] =
          f.dropped;
    }
  }
  manifest_ << line.dump() << '\n';
  if (!tokens_ || !manifest_ || (priors_.is_open() && !priors_)) {
    throw Error(ErrorCode::kIoFailure, "write failed for bundle " + b.record_id);
  }
}

void DirectorySink::Flush() {
  tokens_.flush();
  if (priors_.is_open()) priors_.flush();
  manifest_.flush();
}

EmitStats EmitTrainingStream(std::istream& records, const Vocab& vocab,
                             const QuantizerSet& quantizers,
                             const EmitOptions& options, BundleSink& sink) {
  options.mask_policy.Validate();
  EmitStats stats;
  const std::size_t batch_size =
      256 * static_cast<std::size_t>(std::max(1, options.jobs));
  std::vector<PendingRecord> batch;
  std::size_t line_no = 0;
  std::uint64_t ordinal = 0;

  auto flush_batch = [&] {
    std::vector<BuildResult> results =
        BuildBatch(batch, vocab, quantizers, options);
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].bundle) {
        sink.Write(*results[i].bundle);
        ++stats.emitted;
        continue;
      }
      const Error& e = *results[i].error;
      EmitFailure f{batch[i].ordinal, batch[i].line, BestEffortId(batch[i].text),
                    e.what()};
      if (!options.skip_on_error) {
        throw Error(e.code(),
                    "record '" + f.record_id + "' (line " +
                        std::to_string(f.line) + "): " + e.message(),
                    f.line);
      }
      ++stats.skipped;
      stats.failures.push_back(std::move(f));
    }
    batch.clear();
  };

  std::string text;
  while (std::getline(records, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    batch.push_back({std::move(text), line_no, ordinal++});
    if (batch.size() >= batch_size) flush_batch();
  }
  if (!batch.empty()) flush_batch();
  return stats;
}

}  // namespace posekit
