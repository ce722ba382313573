// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdix {

// A file that cannot be opened or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file whose contents are not in a supported format.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit grayscale raster, row major. 0 is black, 255 is white.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  static constexpr int kGrayLevels = 256;

  std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }

  // Side length M used for scale limits; min(width, height) on non-square inputs.
  int min_side() const { return width < height ? width : height; }
  std::size_t pixel_count() const { return std::size_t(width) * height; }
};

/// Bitmap stored one byte per pixel; nonzero = black = foreground (text).
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }
  int min_side() const { return width < height ? width : height; }
  std::size_t pixel_count() const { return std::size_t(width) * height; }
  std::size_t black_count() const;
};

/// Float raster with intensities in [0, 1]; the scale-space working format.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  float at(int x, int y) const { return data[std::size_t(y) * width + x]; }
  float& at(int x, int y) { return data[std::size_t(y) * width + x]; }
  std::size_t pixel_count() const { return std::size_t(width) * height; }
};

GrayImage make_gray(int width, int height, std::uint8_t fill = 255);
FloatImage to_float(const GrayImage& img);

struct Binarization {
  enum class Mode { kOtsu, kFixed };
  Mode mode = Mode::kOtsu;
  int threshold = 128;  // kFixed only; a pixel is black iff intensity < threshold
};

// Threshold maximizing between-class variance of the 256-bin histogram.
// A constant image yields its own value (binarizes to all-white).
int otsu_threshold(const GrayImage& img);
BinaryImage binarize(const GrayImage& img, const Binarization& how = {});

// Loads a binary PGM (P5) or an 8-bit gray/RGB PNG. Color is converted by
// luma: round(0.299 R + 0.587 G + 0.114 B).
GrayImage load_image(const std::string& path);
GrayImage load_pgm(const std::string& path);
GrayImage load_png(const std::string& path);

void write_pgm(const GrayImage& img, const std::string& path);
void write_pgm(const BinaryImage& img, const std::string& path);

/// Deterministic synthetic rasters for tests and benchmarks.
struct FixtureSpec {
  enum class Kind {
    kFilledSquare,
    kHLine,
    kPoint,
    kSierpinskiCarpet,
    kSierpinskiTriangle,
    kGaussianBlob,
    kRandomTextLike,
  };
  Kind kind = Kind::kFilledSquare;
  int depth = 2;           // carpet / triangle recursion depth
  double sigma = 8.0;      // gaussian blob radius
  std::uint32_t seed = 1;  // text-like generator seed
};

std::optional<FixtureSpec::Kind> parse_fixture_kind(const std::string& name);
GrayImage make_fixture(const FixtureSpec& spec, int side);

}  // namespace hdix
