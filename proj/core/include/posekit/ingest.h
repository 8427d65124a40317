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

// Camera-frame projection, horizon resampling and training-stream emission.

#ifndef POSEKIT_INGEST_H_
#define POSEKIT_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "posekit/geometry.h"
#include "posekit/priors.h"
#include "posekit/quantizer.h"
#include "posekit/records.h"
#include "posekit/vocab_grammar.h"

namespace posekit {

// One arm's end-effector track, expressed in one camera's frame.
struct ArmStream {
  std::string arm_id;
  std::vector<double> timestamps;
  std::vector<Se3Pose> poses;
  std::vector<double> gripper;
};

// Poses of every arm in every frame mapped into view `view_id`.
// Throws UnknownView.
std::vector<ArmStream> ProjectRecord(const TrajectoryRecord& r,
                                     std::string_view view_id);

// Pose (and gripper opening) at time t. Exact frame timestamps return the
// stored values; between frames translation and gripper are interpolated
// linearly and rotation by shortest-arc slerp; t past the last frame clamps
// to the final pose.
struct StreamSample {
  Se3Pose pose;
  double gripper = 0.0;
};
StreamSample SampleStream(const ArmStream& s, double t);

struct CameraFrameTrajectory {
  std::string view_id;
  std::string arm_id;
  Trajectory waypoints;
  int horizon = 0;
};

inline constexpr int kDefaultHorizon = 16;
inline constexpr double kDefaultDt = 0.1;

// Waypoint k is SampleStream(s, t0 + k * dt). Throws EmptyTrajectory when
// the stream has no poses and InvalidHorizon for horizon < 1, dt <= 0 or t0
// outside [first, last] timestamp.
CameraFrameTrajectory ResampleHorizon(const ArmStream& s, std::string view_id,
                                      double t0, int horizon = kDefaultHorizon,
                                      double dt = kDefaultDt);

// Prior stack for one example: the raymap of `k` and, when given, the depth
// map (sparse-sampled when keep < 1), masked under (policy.seed,
// stream_index) and patchified. Depth must match the intrinsics' size;
// otherwise throws InvariantViolation.
std::vector<PriorField> BuildPriorFields(const CameraIntrinsics& k,
                                         std::optional<DepthMap> depth,
                                         const MaskPolicy& policy,
                                         std::uint64_t stream_index,
                                         int patch_size);

struct EmitOptions {
  MaskPolicy mask_policy;
  int patch_size = 14;
  bool include_priors = true;
  // Trajectory records: view to project into (first view when unset).
  std::optional<std::string> view_id;
  int horizon = kDefaultHorizon;
  double dt = kDefaultDt;
  // Failing records are counted and reported instead of aborting.
  bool skip_on_error = false;
  int jobs = 1;
  // Relative depth paths resolve against this directory.
  std::filesystem::path base_dir;
};

struct ExampleBundle {
  std::uint64_t ordinal = 0;
  std::string record_id;
  std::string kind;
  std::string instruction;
  std::vector<TokenId> tokens;
  std::vector<PriorField> priors;
};

// Builds the example for one validated record. `ordinal` is the record's
// position in its input stream and keys all of its randomness.
ExampleBundle BuildBundle(const Record& record, std::uint64_t ordinal,
                          const Vocab& vocab, const QuantizerSet& quantizers,
                          const EmitOptions& options);

class BundleSink {
 public:
  virtual ~BundleSink() = default;
  virtual void Write(const ExampleBundle& bundle) = 0;
};

class MemorySink : public BundleSink {
 public:
  void Write(const ExampleBundle& bundle) override { bundles.push_back(bundle); }
  std::vector<ExampleBundle> bundles;
};

// Writes tokens.bin (binary) or tokens.txt (text), priors.bin (prior
// blocks) and manifest.jsonl into `dir`. Manifest lines give each bundle's
// token_offset and token_count in ids and its priors_offset and
// priors_bytes in bytes. priors.bin is only created by the first bundle
// that carries priors.
class DirectorySink : public BundleSink {
 public:
  explicit DirectorySink(const std::filesystem::path& dir,
                         TokenFormat format = TokenFormat::kBinary);
  void Write(const ExampleBundle& bundle) override;
  void Flush();

 private:
  std::filesystem::path dir_;
  TokenFormat format_;
  std::ofstream tokens_;
  std::ofstream priors_;
  std::ofstream manifest_;
  std::uint64_t token_count_ = 0;
  std::uint64_t prior_bytes_ = 0;
};

struct EmitFailure {
  std::uint64_t ordinal = 0;
  std::size_t line = 0;
  std::string record_id;
  std::string message;
};

struct EmitStats {
  std::size_t emitted = 0;
  std::size_t skipped = 0;
  std::vector<EmitFailure> failures;
};

// Reads JSON Lines records, builds one bundle per record with up to
// options.jobs workers, and writes bundles to `sink` in input order. Blank
// lines are ignored. In strict mode the first failure is rethrown with the
// record id in the message and the line number as position.
EmitStats EmitTrainingStream(std::istream& records, const Vocab& vocab,
                             const QuantizerSet& quantizers,
                             const EmitOptions& options, BundleSink& sink);

}  // namespace posekit

#endif  // POSEKIT_INGEST_H_
