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

#ifndef POSEKIT_FIELD_H_
#define POSEKIT_FIELD_H_

#include <cstddef>
#include <span>
#include <vector>

namespace posekit {

// Dense H x W x C array of doubles, row-major with channels last.
class DenseField {
 public:
  DenseField() = default;
  DenseField(int height, int width, int channels, double fill = 0.0)
      : height_(height),
        width_(width),
        channels_(channels),
        values_(static_cast<std::size_t>(height) * width * channels, fill) {}

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::size_t offset(int v, int u, int c = 0) const noexcept {
    return (static_cast<std::size_t>(v) * width_ + u) * channels_ + c;
  }
  double& at(int v, int u, int c = 0) { return values_[offset(v, u, c)]; }
  double at(int v, int u, int c = 0) const { return values_[offset(v, u, c)]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const DenseField&, const DenseField&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

}  // namespace posekit

#endif  // POSEKIT_FIELD_H_
