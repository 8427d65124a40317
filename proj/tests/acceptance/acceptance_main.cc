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

// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "corpus.h"
#include "oracles.h"
#include "posekit/error.h"
#include "posekit/eval3d.h"
#include "posekit/geometry.h"
#include "posekit/ingest.h"
#include "posekit/priors.h"
#include "posekit/quantizer.h"
#include "posekit/raster_io.h"
#include "posekit/records.h"
#include "posekit/vocab_grammar.h"

namespace posekit::acceptance {
namespace {

// Pinned tolerances and budgets.
constexpr std::size_t kBinSamples = 1000000;
constexpr std::uint32_t kBins = 1024;
constexpr double kOccupancySlack = 1.0;
constexpr double kEntropyFraction = 0.99;
constexpr double kBinBudgetSeconds = 5.0;
constexpr std::size_t kCodecItems = 10000;
constexpr double kCodecBudgetSeconds = 10.0;
constexpr double kRoundingSlack = 1e-12;
constexpr double kAngleSlack = 1e-9;
constexpr std::size_t kFuzzStreams = 100000;
constexpr double kFuzzBudgetSeconds = 30.0;
constexpr int kRayIntrinsics = 100;
constexpr std::size_t kProjectionPairs = 10000;
constexpr double kProjectionTolerance = 1e-9;
constexpr std::size_t kIouPairs = 1000;
constexpr double kIouMcTolerance = 0.02;
constexpr double kIouAnalyticTolerance = 1e-12;
constexpr double kIouRigidTolerance = 1e-9;
constexpr double kIouBudgetSeconds = 60.0;
constexpr std::size_t kApInstances = 20000;
constexpr std::uint64_t kMaskStreams = 10000;
constexpr int kMaskDropLow = 4850;
constexpr int kMaskDropHigh = 5150;
constexpr std::size_t kPipelineRecords = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double AngleGap(double a, double b) { return std::abs(WrapAngle(a - b)); }

bool BitEqual(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
}

// Quantile binning.
Outcome QuantileBinning() {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> samples(kBinSamples);
  for (double& x : samples) x = g(rng);
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    return {false, "synthetic samples are not all distinct"};
  }
  const auto start = std::chrono::steady_clock::now();
  const BinTable t = FitQuantileBins(TokenFamily::kTransXy, samples, kBins);
  const double elapsed = Seconds(start);
  const auto counts = testing::SortAndCount(t.edges(), samples);
  const double ideal = static_cast<double>(kBinSamples) / kBins;
  double worst = 0.0;
  for (std::size_t c : counts) {
    worst = std::max(worst, std::abs(static_cast<double>(c) - ideal));
  }
  const double entropy = testing::HistogramEntropyBits(counts);
  const double floor = kEntropyFraction * std::log2(static_cast<double>(kBins));
  const bool pass = worst <= kOccupancySlack && entropy >= floor &&
                    elapsed < kBinBudgetSeconds;
  return {pass, Fmt("max |count-%.4f| = %.4f, entropy %.6f >= %.4f bits, %.3f s",
                    ideal, worst, entropy, floor, elapsed)};
}

// Codec round trip.
bool PoseWithin(const QuantizerSet& q, const Se3Pose& a, const Se3Pose& b) {
  const PoseIndices idx = EncodePose(q, a);
  const EulerAngles ea = QuatToEuler(a.rotation());
  const EulerAngles eb = QuatToEuler(b.rotation());
  const double half_rot = 0.5 * q.rot().bin_width(0) + kAngleSlack;
  return std::abs(a.translation().x() - b.translation().x()) <=
             0.5 * q.trans_xy().bin_width(idx.trans_x) + kRoundingSlack &&
         std::abs(a.translation().y() - b.translation().y()) <=
             0.5 * q.trans_xy().bin_width(idx.trans_y) + kRoundingSlack &&
         std::abs(a.translation().z() - b.translation().z()) <=
             0.5 * q.trans_z().bin_width(idx.trans_z) + kRoundingSlack &&
         AngleGap(ea.roll, eb.roll) <= half_rot &&
         AngleGap(ea.pitch, eb.pitch) <= half_rot &&
         AngleGap(ea.yaw, eb.yaw) <= half_rot;
}

bool ItemWithin(const QuantizerSet& q, const SequenceItem& in,
                const SequenceItem& out) {
  if (in.index() != out.index()) return false;
  const double loc_half = 0.5 * q.loc().bin_width(0) + kRoundingSlack;
  if (const auto* t = std::get_if<PoseTuple>(&in)) {
    const auto& b = std::get<PoseTuple>(out);
    if (b.category != t->category) return false;
    if (std::abs(b.box_center.x() - t->box_center.x()) > loc_half) return false;
    if (std::abs(b.box_center.y() - t->box_center.y()) > loc_half) return false;
    if (!PoseWithin(q, t->pose, b.pose)) return false;
    if (b.size.has_value() != t->size.has_value()) return false;
    if (t->size) {
      const SizeIndices s = EncodeSize(q, *t->size);
      for (int k = 0; k < 3; ++k) {
        if (std::abs((*b.size)[k] - (*t->size)[k]) >
            0.5 * q.size().bin_width(s[k]) + kRoundingSlack) {
          return false;
        }
      }
    }
    return true;
  }
  const auto& a = std::get<Trajectory>(in);
  const auto& b = std::get<Trajectory>(out);
  if (a.waypoints.size() != b.waypoints.size()) return false;
  if (a.gripper.has_value() != b.gripper.has_value()) return false;
  for (std::size_t k = 0; k < a.waypoints.size(); ++k) {
    if (!PoseWithin(q, a.waypoints[k], b.waypoints[k])) return false;
    if (a.gripper && std::abs((*a.gripper)[k] - (*b.gripper)[k]) > loc_half) {
      return false;
    }
  }
  return true;
}

std::vector<TokenId> SerializeItem(const SequenceItem& item, const Vocab& v,
                                   const QuantizerSet& q) {
  if (const auto* t = std::get_if<PoseTuple>(&item)) {
    return SerializeTuple(*t, v, q);
  }
  return SerializeTrajectory(std::get<Trajectory>(item), v, q);
}

Outcome CodecRoundTrip() {
  const QuantizerSet q = testing::FixedQuantizers();
  const Vocab v = BuildVocab(VocabConfig::FromQuantizers(q));
  std::mt19937_64 rng(102);
  std::vector<SequenceItem> items;
  items.reserve(kCodecItems);
  for (std::size_t i = 0; i < kCodecItems; ++i) {
    items.push_back(testing::RandomItem(rng));
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<TokenId> stream;
  for (const SequenceItem& item : items) {
    const std::vector<TokenId> ids = SerializeItem(item, v, q);
    stream.insert(stream.end(), ids.begin(), ids.end());
  }
  const std::vector<SequenceItem> parsed = ParseSequence(stream, v, q);
  const double elapsed = Seconds(start);
  if (parsed.size() != items.size()) {
    return {false, Fmt("parsed %zu of %zu items", parsed.size(), items.size())};
  }
  std::size_t bad = 0, tuples = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!ItemWithin(q, items[i], parsed[i])) ++bad;
    tuples += std::holds_alternative<PoseTuple>(items[i]);
  }
  return {bad == 0 && elapsed < kCodecBudgetSeconds,
          Fmt("%zu items (%zu tuples, %zu tokens), %zu out of tolerance, %.3f s",
              items.size(), tuples, stream.size(), bad, elapsed)};
}

// Grammar robustness.
Outcome GrammarRobustness() {
  const QuantizerSet q = testing::FixedQuantizers();
  const Vocab v = BuildVocab(VocabConfig::FromQuantizers(q));
  std::mt19937_64 rng(103);
  std::vector<std::vector<TokenId>> seeds;
  for (int i = 0; i < 64; ++i) {
    seeds.push_back(SerializeItem(testing::RandomItem(rng), v, q));
  }
  std::uniform_int_distribution<TokenId> any_id(0, v.size() + 64);
  std::uniform_int_distribution<TokenId> structural(v.size() - 6, v.size() - 1);
  std::uniform_int_distribution<int> op(0, 6);
  std::size_t accepted = 0, rejected = 0, unpositioned = 0, crashed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t n = 0; n < kFuzzStreams; ++n) {
    std::vector<TokenId> s = seeds[rng() % seeds.size()];
    if (rng() % 2) {
      const auto& extra = seeds[rng() % seeds.size()];
      s.insert(s.end(), extra.begin(), extra.end());
    }
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) {
      const std::size_t at = s.empty() ? 0 : rng() % s.size();
      switch (op(rng)) {
        case 0:
          if (!s.empty()) s[at] = any_id(rng);
          break;
        case 1:
          if (!s.empty()) s[at] = structural(rng);
          break;
        case 2:
          s.insert(s.begin() + static_cast<std::ptrdiff_t>(at), any_id(rng));
          break;
        case 3:
          if (!s.empty()) s.erase(s.begin() + static_cast<std::ptrdiff_t>(at));
          break;
        case 4:
          s.resize(at);
          break;
        case 5:
          if (!s.empty()) s[at] ^= 1u << (rng() % 32);
          break;
        default: {
          s.clear();
          const std::size_t len = rng() % 40;
          for (std::size_t k = 0; k < len; ++k) {
            s.push_back(rng() % 3 == 0 ? structural(rng) : any_id(rng));
          }
        }
      }
    }
    try {
      ParseSequence(s, v, q);
      ++accepted;
    } catch (const Error& e) {
      ++rejected;
      if (!e.position()) ++unpositioned;
    } catch (...) {
      ++crashed;
    }
  }
  const double elapsed = Seconds(start);
  return {unpositioned == 0 && crashed == 0 && elapsed < kFuzzBudgetSeconds,
          Fmt("%zu streams: %zu accepted, %zu rejected, %zu without position, "
              "%zu foreign exceptions, %.3f s",
              kFuzzStreams, accepted, rejected, unpositioned, crashed, elapsed)};
}

// Ray geometry.
Outcome RayGeometry() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> focal(50.0, 2000.0), unit(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 96);
  std::size_t mismatches = 0, pixels = 0;
  for (int i = 0; i < kRayIntrinsics; ++i) {
    const int w = dim(rng), h = dim(rng);
    const CameraIntrinsics k(focal(rng), focal(rng), unit(rng) * w,
                             unit(rng) * h, w, h);
    const DenseField f = Raymap(k);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Eigen::Vector3d r = ComputeRay(k, x + 0.5, y + 0.5);
        for (int c = 0; c < 3; ++c) mismatches += f.at(y, x, c) != r[c];
        ++pixels;
      }
    }
  }
  const CameraIntrinsics k(500, 500, 320, 240, 640, 480);
  const bool principal = ComputeRay(k, 320, 240) == Eigen::Vector3d(0, 0, 1);
  const bool shifted = ComputeRay(k, 820, 240) == Eigen::Vector3d(1, 0, 1);
  const DenseField centered = Raymap(CameraIntrinsics(400, 400, 10.5, 7.5, 21, 15));
  const bool center_pixel = centered.at(7, 10, 0) == 0.0 &&
                            centered.at(7, 10, 1) == 0.0 &&
                            centered.at(7, 10, 2) == 1.0;
  return {mismatches == 0 && principal && shifted && center_pixel,
          Fmt("%zu pixels over %d intrinsics, %zu mismatched components; "
              "principal %s, (820,240) %s, center pixel %s",
              pixels, kRayIntrinsics, mismatches, principal ? "ok" : "bad",
              shifted ? "ok" : "bad", center_pixel ? "ok" : "bad")};
}

// Frame projection.
Outcome FrameProjection() {
  std::mt19937_64 rng(105);
  std::normal_distribution<double> g(0.0, 2.0);
  double worst_t = 0.0, worst_r = 0.0;
  for (std::size_t i = 0; i < kProjectionPairs; ++i) {
    const Se3Pose p({g(rng), g(rng), g(rng)}, testing::RandomRotation(rng));
    const CameraExtrinsics e{
        Se3Pose({g(rng), g(rng), g(rng)}, testing::RandomRotation(rng))};
    const Se3Pose back = CameraToBase(BaseToCamera(p, e), e);
    worst_t = std::max(worst_t, (back.translation() - p.translation()).norm());
    worst_r = std::max(worst_r, back.rotation().angularDistance(p.rotation()));
  }

  testing::CorpusOptions c;
  c.records = 200;
  c.seed = 105;
  c.scene_fraction = 0.0;
  std::istringstream corpus(testing::MakeCorpus(c));
  std::string line;
  std::size_t samples = 0, inexact = 0;
  while (std::getline(corpus, line)) {
    const TrajectoryRecord r = ValidateTrajectory(line);
    for (const CameraView& view : r.views) {
      for (const ArmStream& s : ProjectRecord(r, view.view_id)) {
        for (std::size_t k = 0; k < s.timestamps.size(); ++k) {
          const StreamSample x = SampleStream(s, s.timestamps[k]);
          inexact += !(x.pose == s.poses[k]) || x.gripper != s.gripper[k];
          ++samples;
        }
        // Dyadic spacing makes t0 + k * dt land on the stored timestamps.
        ArmStream even = s;
        for (std::size_t k = 0; k < even.timestamps.size(); ++k) {
          even.timestamps[k] = 0.125 * static_cast<double>(k);
        }
        const CameraFrameTrajectory t = ResampleHorizon(
            even, view.view_id, 0.0, static_cast<int>(even.poses.size()), 0.125);
        for (std::size_t k = 0; k < even.poses.size(); ++k) {
          inexact += !(t.waypoints.waypoints[k] == even.poses[k]);
          ++samples;
        }
      }
    }
  }
  const bool pass = worst_t <= kProjectionTolerance &&
                    worst_r <= kProjectionTolerance && inexact == 0;
  return {pass, Fmt("round trip max translation %.3g, rotation %.3g rad; "
                    "%zu resampled poses, %zu inexact",
                    worst_t, worst_r, samples, inexact)};
}

// IoU oracle.
Eigen::Quaterniond Yaw(double a) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()));
}

Outcome IouOracle() {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> dim(0.2, 2.0), angle(-kPi, kPi),
      far(-20.0, 20.0);
  std::normal_distribution<double> near(0.0, 0.4);
  const auto start = std::chrono::steady_clock::now();
  double worst_mc = 0.0, worst_rigid = 0.0;
  std::size_t overlapping = 0;
  for (std::size_t i = 0; i < kIouPairs; ++i) {
    const Eigen::Vector3d c(near(rng), near(rng), near(rng));
    const OrientedBox3D a(c, {dim(rng), dim(rng), dim(rng)}, Yaw(angle(rng)));
    const OrientedBox3D b(c + Eigen::Vector3d(near(rng), near(rng), near(rng)),
                          {dim(rng), dim(rng), dim(rng)}, Yaw(angle(rng)));
    const double exact = Iou3d(a, b, IouMethod::kExactYaw);
    const double mc = Iou3d(a, b, IouMethod::kMonteCarlo);
    worst_mc = std::max(worst_mc, std::abs(exact - mc));
    overlapping += exact > 0.0;
    const Se3Pose t({far(rng), far(rng), far(rng)}, Yaw(angle(rng)));
    const double moved =
        Iou3d(a.Transformed(t), b.Transformed(t), IouMethod::kExactYaw);
    worst_rigid = std::max(worst_rigid, std::abs(moved - exact));
  }
  const double elapsed = Seconds(start);
  const OrientedBox3D u({0, 0, 0}, {1, 1, 1}, Eigen::Quaterniond::Identity());
  const OrientedBox3D w({0.5, 0, 0}, {1, 1, 1}, Eigen::Quaterniond::Identity());
  const double third = Iou3d(u, w, IouMethod::kExactYaw);
  const double third_mc = Iou3d(u, w, IouMethod::kMonteCarlo);
  const bool pass = worst_mc <= kIouMcTolerance &&
                    std::abs(third - 1.0 / 3) <= kIouAnalyticTolerance &&
                    std::abs(third_mc - 1.0 / 3) <= kIouMcTolerance &&
                    worst_rigid <= kIouRigidTolerance &&
                    elapsed < kIouBudgetSeconds;
  return {pass,
          Fmt("%zu pairs (%zu overlapping): max |exact-mc| %.5f; offset cubes "
              "exact %.17g, mc %.5f; max rigid drift %.3g; %.2f s",
              kIouPairs, overlapping, worst_mc, third, third_mc, worst_rigid,
              elapsed)};
}

// AP protocol.
struct OracleCategory {
  std::size_t n_gt = 0;
  std::vector<std::pair<double, std::size_t>> swept;  // (best IoU, pred index)
  std::map<std::size_t, bool> tp;
};

std::string AsciiLower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

Outcome ApProtocol() {
  std::mt19937_64 rng(107);
  std::uniform_int_distribution<int> count(0, 4), n_images(1, 2), pick(0, 3);
  std::uniform_real_distribution<double> dim(0.3, 1.5), angle(-kPi, kPi),
      place(-1.0, 1.0), unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.25);
  const char* names[] = {"mug", "Mug", "chair", "lamp"};
  std::size_t mismatched = 0, categories_checked = 0;
  for (std::size_t inst = 0; inst < kApInstances; ++inst) {
    std::vector<Detection> preds;
    std::vector<GroundTruth> gts;
    const int images = n_images(rng);
    for (int im = 0; im < images; ++im) {
      const std::string image = "img" + std::to_string(im);
      for (const char* cat : {"mug", "chair", "lamp"}) {
        const int ng = count(rng), np = count(rng);
        std::vector<OrientedBox3D> boxes;
        for (int j = 0; j < ng; ++j) {
          boxes.emplace_back(Eigen::Vector3d(place(rng), place(rng), place(rng)),
                             Eigen::Vector3d(dim(rng), dim(rng), dim(rng)),
                             Yaw(angle(rng)));
          gts.push_back({image, cat == std::string("mug") ? names[pick(rng) % 2]
                                                          : cat,
                         boxes.back()});
        }
        for (int i = 0; i < np; ++i) {
          const double r = unit(rng);
          if (!boxes.empty() && r < 0.3) {
            // Exact copy: produces IoU ties.
            preds.push_back({image, cat, boxes[rng() % boxes.size()]});
          } else if (!boxes.empty() && r < 0.8) {
            const OrientedBox3D& src = boxes[rng() % boxes.size()];
            preds.push_back(
                {image, cat,
                 OrientedBox3D(src.center() + Eigen::Vector3d(jitter(rng),
                                                              jitter(rng),
                                                              jitter(rng)),
                               src.dims(), src.rotation())});
          } else {
            preds.push_back(
                {image, cat,
                 OrientedBox3D(Eigen::Vector3d(place(rng), place(rng), place(rng)),
                               Eigen::Vector3d(dim(rng), dim(rng), dim(rng)),
                               Yaw(angle(rng)))});
          }
        }
      }
    }

    // Oracle: exhaustive matching per (category, image), then the sweep.
    std::map<std::string, OracleCategory> oracle;
    std::map<std::string, std::map<std::string, std::vector<std::size_t>>> g_idx,
        p_idx;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      g_idx[AsciiLower(gts[j].category)][gts[j].image_id].push_back(j);
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
      p_idx[AsciiLower(preds[i].category)][preds[i].image_id].push_back(i);
    }
    for (const auto& [cat, by_image] : g_idx) {
      for (const auto& [image, idx] : by_image) oracle[cat].n_gt += idx.size();
    }
    for (const auto& [cat, by_image] : p_idx) {
      OracleCategory& oc = oracle[cat];
      for (const auto& [image, pi] : by_image) {
        std::vector<std::size_t> gi;
        if (g_idx.count(cat) && g_idx[cat].count(image)) gi = g_idx[cat][image];
        Eigen::MatrixXd iou(static_cast<Eigen::Index>(pi.size()),
                            static_cast<Eigen::Index>(gi.size()));
        std::vector<double> best(pi.size(), 0.0);
        for (std::size_t a = 0; a < pi.size(); ++a) {
          for (std::size_t b = 0; b < gi.size(); ++b) {
            const double x = Iou3d(preds[pi[a]].box, gts[gi[b]].box,
                                   IouMethod::kExactYaw);
            iou(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = x;
            best[a] = std::max(best[a], x);
          }
        }
        std::vector<std::size_t> order(pi.size());
        for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return best[x] > best[y]; });
        const auto match = testing::BruteForceMatch(iou, kDefaultIouThreshold, order);
        for (std::size_t a = 0; a < pi.size(); ++a) {
          oc.swept.emplace_back(best[a], pi[a]);
          oc.tp[pi[a]] = match[a].has_value();
        }
      }
    }
    double sum = 0.0;
    std::size_t counted = 0;
    std::map<std::string, double> oracle_ap;
    for (auto& [cat, oc] : oracle) {
      std::stable_sort(oc.swept.begin(), oc.swept.end(),
                       [](const auto& x, const auto& y) {
                         return x.first > y.first ||
                                (x.first == y.first && x.second < y.second);
                       });
      std::vector<bool> labels;
      for (const auto& [iou, index] : oc.swept) labels.push_back(oc.tp[index]);
      const double ap =
          oc.n_gt == 0 ? 0.0 : testing::AllPointApOracle(labels, oc.n_gt);
      oracle_ap[cat] = ap;
      if (oc.n_gt > 0) {
        sum += ap;
        ++counted;
      }
    }
    const double oracle_map = counted == 0 ? 0.0 : sum / static_cast<double>(counted);

    const EvalReport report = Evaluate(preds, gts);
    bool same = report.map == oracle_map &&
                report.per_category.size() == oracle_ap.size();
    for (const auto& [cat, ap] : oracle_ap) {
      const auto it = report.per_category.find(cat);
      same = same && it != report.per_category.end() &&
             it->second.ap.value_or(0.0) == ap;
      ++categories_checked;
    }
    mismatched += !same;
  }
  const bool default_threshold = kDefaultIouThreshold == 0.15 &&
                                 EvalReport{}.threshold == 0.15;
  const OrientedBox3D box({0, 0, 0}, {1, 1, 1}, Eigen::Quaterniond::Identity());
  const Detection d{"img", "mug", box};
  bool rejects_other_confidence = false;
  try {
    const std::vector<Detection> p = {{"img", "mug", box, 0.9}};
    Evaluate(p, std::vector<GroundTruth>{});
  } catch (const Error& e) {
    rejects_other_confidence = e.code() == ErrorCode::kInvalidArgument;
  }
  const bool confidence = kFixedConfidence == 1.0 && d.confidence == 1.0 &&
                          rejects_other_confidence;
  return {mismatched == 0 && default_threshold && confidence,
          Fmt("%zu instances, %zu category results, %zu mismatches; default "
              "threshold %.2f, confidence %.1f%s",
              kApInstances, categories_checked, mismatched, kDefaultIouThreshold,
              d.confidence, rejects_other_confidence ? "" : " (not enforced)")};
}

// Modality masking determinism and statistics.
Outcome MaskStatistics() {
  const DenseField ray = Raymap(CameraIntrinsics(50, 50, 8, 8, 16, 16));
  std::mt19937_64 rng(108);
  const DepthMap depth = testing::RandomDepth(rng, 16, 16);
  MaskPolicy p;
  p.p_drop_ray = 0.5;
  p.p_drop_depth = 0.5;
  p.seed = 0xA11CE;
  int ray_drops = 0, depth_drops = 0;
  std::size_t rerun_diffs = 0;
  for (std::uint64_t s = 0; s < kMaskStreams; ++s) {
    const MaskedPriors a = MaskModality(ray, depth, p, s);
    const MaskedPriors b = MaskModality(ray, depth, p, s);
    ray_drops += a.ray_dropped;
    depth_drops += a.depth_dropped;
    rerun_diffs += a.ray_dropped != b.ray_dropped ||
                   a.depth_dropped != b.depth_dropped ||
                   !BitEqual(a.ray->values(), b.ray->values()) ||
                   !BitEqual(a.depth->values().values(),
                             b.depth->values().values()) ||
                   a.depth->mask() != b.depth->mask();
  }
  std::size_t sparse_checks = 0, sparse_bad = 0;
  const DepthMap big = testing::RandomDepth(rng, 120, 160);
  const std::size_t n = big.valid_count();
  for (double f : {0.0, 0.01, 0.1, 1.0 / 3, 0.5, 0.75, 0.999, 1.0}) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const DepthMap kept = SparseDepthSample(big, f, 7, s);
      const DepthMap again = SparseDepthSample(big, f, 7, s);
      sparse_bad += kept.valid_count() !=
                        static_cast<std::size_t>(std::llround(f * n)) ||
                    !(kept == again);
      ++sparse_checks;
    }
  }
  const bool pass = ray_drops >= kMaskDropLow && ray_drops <= kMaskDropHigh &&
                    depth_drops >= kMaskDropLow && depth_drops <= kMaskDropHigh &&
                    rerun_diffs == 0 && sparse_bad == 0;
  return {pass, Fmt("ray drops %d, depth drops %d of %llu in [%d, %d]; %zu "
                    "rerun differences; sparse %zu/%zu exact",
                    ray_drops, depth_drops,
                    static_cast<unsigned long long>(kMaskStreams), kMaskDropLow,
                    kMaskDropHigh, rerun_diffs, sparse_checks - sparse_bad,
                    sparse_checks)};
}

// Pipeline determinism.
std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome PipelineDeterminism() {
  testing::TempDir dir;
  std::mt19937_64 rng(109);
  SaveDepthPng16(testing::RandomDepth(rng, 28, 28), dir.path() / "depth.png");
  testing::CorpusOptions c;
  c.records = kPipelineRecords;
  c.seed = 109;
  c.depth_ref = "depth.png";
  const std::string corpus = testing::MakeCorpus(c);
  const QuantizerSet q = testing::FixedQuantizers();
  const Vocab v = BuildVocab(VocabConfig::FromQuantizers(q));
  EmitOptions options;
  options.mask_policy.p_drop_ray = 0.5;
  options.mask_policy.p_drop_depth = 0.5;
  options.mask_policy.sparse_keep_fraction = 0.5;
  options.mask_policy.seed = 42;
  options.base_dir = dir.path();
  std::size_t emitted[2] = {0, 0};
  const int jobs[2] = {1, 8};
  for (int r = 0; r < 2; ++r) {
    options.jobs = jobs[r];
    std::istringstream in(corpus);
    DirectorySink sink(dir.path() / ("jobs" + std::to_string(jobs[r])));
    emitted[r] = EmitTrainingStream(in, v, q, options, sink).emitted;
    sink.Flush();
  }
  bool identical = emitted[0] == kPipelineRecords && emitted[1] == kPipelineRecords;
  std::size_t bytes = 0;
  for (const char* f : {"tokens.bin", "priors.bin", "manifest.jsonl"}) {
    const std::string a = Slurp(dir.path() / "jobs1" / f);
    const std::string b = Slurp(dir.path() / "jobs8" / f);
    identical = identical && !a.empty() && a == b;
    bytes += a.size();
  }
  return {identical, Fmt("%zu records, %zu bytes per run, jobs 1 vs 8 %s",
                         kPipelineRecords, bytes,
                         identical ? "byte-identical" : "differ")};
}

// Priors exactness.
Outcome PriorsExactness() {
  std::mt19937_64 rng(110);
  DepthMap d = testing::RandomDepth(rng, 64, 48);
  DenseField special = d.values();
  special.at(0, 0) = 1e-300;
  special.at(0, 1) = 4.9e-324;
  special.at(0, 2) = 1e300;
  special.at(0, 3) = 0.1 + 0.2;
  d = DepthMap::FromValues(special);
  const DenseField stacked = StackDepthMask(d);
  bool passthrough = stacked.channels() == 2;
  for (int y = 0; passthrough && y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      const double a = stacked.at(y, x, 0), b = d.values().at(y, x);
      passthrough = passthrough && std::memcmp(&a, &b, sizeof(double)) == 0 &&
                    stacked.at(y, x, 1) == d.mask()[y * d.width() + x];
    }
  }
  std::normal_distribution<double> g(0.0, 5.0);
  bool round_trip = true;
  int shapes = 0;
  for (const auto& [h, w, ch, p] : std::vector<std::array<int, 4>>{
           {224, 224, 3, 14}, {224, 224, 2, 14}, {28, 56, 3, 14}, {9, 6, 1, 3},
           {16, 16, 5, 16}, {7, 7, 2, 1}}) {
    DenseField f(h, w, ch);
    for (double& x : f.values()) x = g(rng);
    const PatchGrid grid = Patchify(f, p);
    round_trip = round_trip &&
                 BitEqual(grid.values, testing::PatchifyOracle(f.values(), h, w, ch, p)) &&
                 Unpatchify(grid) == f;
    ++shapes;
  }
  const std::size_t patches = Patchify(DenseField(224, 224, 3), 14).patch_count();
  return {passthrough && round_trip && patches == 256,
          Fmt("channel-0 passthrough %s; patchify round trip over %d shapes %s; "
              "224x224/14 -> %zu patches",
              passthrough ? "bit-exact" : "differs", shapes,
              round_trip ? "exact" : "differs", patches)};
}

}  // namespace

int Main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"quantile-binning", QuantileBinning},
      {"codec-round-trip", CodecRoundTrip},
      {"grammar-robustness", GrammarRobustness},
      {"ray-geometry", RayGeometry},
      {"frame-projection", FrameProjection},
      {"iou-oracle", IouOracle},
      {"ap-protocol", ApProtocol},
      {"mask-determinism-statistics", MaskStatistics},
      {"pipeline-determinism", PipelineDeterminism},
      {"priors-exactness", PriorsExactness},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}

}  // namespace posekit::acceptance

int main() { return posekit::acceptance::Main(); }
