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

#include "posekit/raster_io.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "posekit/error.h"

namespace posekit {
namespace {

class File {
 public:
  File(const std::filesystem::path& path, const char* mode)
      : f_(std::fopen(path.c_str(), mode)) {
    if (!f_) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  }
  ~File() {
    if (f_) std::fclose(f_);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;
  std::FILE* get() const noexcept { return f_; }

 private:
  std::FILE* f_;
};

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

void SilentWarning(png_structp, png_const_charp) {}

}  // namespace

DepthMap LoadDepthRaster(const std::filesystem::path& path) {
  const std::string ext = Lower(path.extension().string());
  if (ext == ".png") return LoadDepthPng16(path);
  if (ext == ".pfm") return LoadDepthPfm(path);
  throw Error(ErrorCode::kIoFailure,
              "unsupported depth raster extension '" + ext + "'");
}

DepthMap LoadDepthPng16(const std::filesystem::path& path) {
  File file(path, "rb");
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                             SilentWarning);
  if (!png) throw Error(ErrorCode::kIoFailure, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint16_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIoFailure, "corrupt PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr,
               nullptr, nullptr);
  const bool ok = color_type == PNG_COLOR_TYPE_GRAY && bit_depth == 16;
  if (ok) {
    if constexpr (std::endian::native == std::endian::little) png_set_swap(png);
    png_read_update_info(png, info);
    pixels.resize(static_cast<std::size_t>(width) * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) {
      rows[y] = reinterpret_cast<png_bytep>(pixels.data() +
                                            static_cast<std::size_t>(y) * width);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) {
    throw Error(ErrorCode::kIoFailure,
                path.string() + " is not a 16-bit grayscale PNG");
  }
  DenseField values(static_cast<int>(height), static_cast<int>(width), 1);
  std::vector<std::uint8_t> mask(pixels.size(), 0);
  auto dst = values.values();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i] > 0) {
      dst[i] = pixels[i] / 1000.0;
      mask[i] = 1;
    }
  }
  return DepthMap(std::move(values), std::move(mask));
}

void SaveDepthPng16(const DepthMap& depth, const std::filesystem::path& path) {
  const auto width = static_cast<png_uint_32>(depth.width());
  const auto height = static_cast<png_uint_32>(depth.height());
  std::vector<std::uint16_t> pixels(depth.mask().size(), 0);
  const auto src = depth.values().values();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (depth.mask()[i]) {
      pixels[i] = static_cast<std::uint16_t>(
          std::clamp(std::llround(src[i] * 1000.0), 0LL, 65535LL));
    }
  }
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(pixels.data() +
                                          static_cast<std::size_t>(y) * width);
  }
  File file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, SilentWarning);
  if (!png) throw Error(ErrorCode::kIoFailure, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoFailure, "PNG write failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if constexpr (std::endian::native == std::endian::little) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

DepthMap LoadDepthPfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  in.get();  // single whitespace byte before the raster
  if (!in || magic != "Pf" || width <= 0 || height <= 0 || scale == 0.0) {
    throw Error(ErrorCode::kIoFailure,
                path.string() + " is not a single-channel PFM");
  }
  const bool little = scale < 0.0;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * 4);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw Error(ErrorCode::kIoFailure, "truncated PFM " + path.string());
  }
  DenseField values(height, width, 1);
  // PFM rows run bottom to top.
  for (int row = 0; row < height; ++row) {
    for (int u = 0; u < width; ++u) {
      const std::uint8_t* p =
          raw.data() + (static_cast<std::size_t>(row) * width + u) * 4;
      std::uint32_t bits = little
                               ? (p[0] | p[1] << 8 | p[2] << 16 |
                                  static_cast<std::uint32_t>(p[3]) << 24)
                               : (p[3] | p[2] << 8 | p[1] << 16 |
                                  static_cast<std::uint32_t>(p[0]) << 24);
      values.at(height - 1 - row, u) = std::bit_cast<float>(bits);
    }
  }
  return DepthMap::FromValues(std::move(values));
}

void SaveDepthPfm(const DepthMap& depth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  out << "Pf\n" << depth.width() << " " << depth.height() << "\n-1.0\n";
  for (int row = depth.height() - 1; row >= 0; --row) {
    for (int u = 0; u < depth.width(); ++u) {
      const auto bits =
          std::bit_cast<std::uint32_t>(static_cast<float>(depth.values().at(row, u)));
      const char b[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8),
                         static_cast<char>(bits >> 16),
                         static_cast<char>(bits >> 24)};
      out.write(b, 4);
    }
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

}  // namespace posekit
