// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hdix/raster.h"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>

namespace hdix {

namespace {

constexpr int kMinFixtureSide = 8;

std::uint8_t luma(int r, int g, int b) {
  return std::uint8_t(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return tail == suffix;
}

// PGM token reader skipping whitespace and '#' comments.
int next_pgm_token(std::FILE* f) {
  int c = std::fgetc(f);
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = std::fgetc(f);
    } else if (!std::isspace(c)) {
      break;
    }
    if (c != EOF) c = std::fgetc(f);
  }
  if (c == EOF) throw FormatError("truncated PGM header");
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = std::fgetc(f);
  }
  return value;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

std::size_t BinaryImage::black_count() const {
  return std::size_t(std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; }));
}

GrayImage make_gray(int width, int height, std::uint8_t fill) {
  if (width < 2 || height < 2) throw std::invalid_argument("image sides must be >= 2");
  GrayImage img;
  img.width = width;
  img.height = height;
  img.data.assign(std::size_t(width) * height, fill);
  return img;
}

FloatImage to_float(const GrayImage& img) {
  FloatImage out;
  out.width = img.width;
  out.height = img.height;
  out.data.resize(img.pixel_count());
  for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i] / 255.0f;
  return out;
}

int otsu_threshold(const GrayImage& img) {
  std::array<std::uint64_t, 256> hist{};
  for (std::uint8_t v : img.data) hist[v]++;

  int lowest = -1, highest = -1, bins = 0;
  for (int i = 0; i < 256; ++i) {
    if (hist[i]) {
      if (lowest < 0) lowest = i;
      highest = i;
      ++bins;
    }
  }
  if (bins <= 1) return lowest;  // constant image: its own value, all-white result

  const double total = double(img.pixel_count());
  double sum_all = 0;
  for (int i = 0; i < 256; ++i) sum_all += double(i) * double(hist[i]);

  int best_t = lowest + 1;
  double best_var = -1;
  double w0 = 0, sum0 = 0;
  for (int t = 1; t <= 255; ++t) {  // class black = [0, t), white = [t, 255]
    w0 += double(hist[t - 1]);
    sum0 += double(t - 1) * double(hist[t - 1]);
    const double w1 = total - w0;
    if (w0 == 0) continue;
    if (w1 == 0) break;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

BinaryImage binarize(const GrayImage& img, const Binarization& how) {
  const int t = how.mode == Binarization::Mode::kOtsu ? otsu_threshold(img) : how.threshold;
  BinaryImage out;
  out.width = img.width;
  out.height = img.height;
  out.data.resize(img.pixel_count());
  for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i] < t ? 1 : 0;
  return out;
}

GrayImage load_pgm(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);

  char magic[2];
  if (std::fread(magic, 1, 2, f.get()) != 2 || magic[0] != 'P' || magic[1] != '5')
    throw FormatError(path + ": not a binary PGM (P5)");

  const int width = next_pgm_token(f.get());
  const int height = next_pgm_token(f.get());
  const int maxval = next_pgm_token(f.get());
  if (width <= 0 || height <= 0) throw FormatError(path + ": zero-dimension image");
  if (maxval <= 0 || maxval > 255) throw FormatError(path + ": unsupported PGM maxval");

  GrayImage img;
  img.width = width;
  img.height = height;
  img.data.resize(std::size_t(width) * height);
  if (std::fread(img.data.data(), 1, img.data.size(), f.get()) != img.data.size())
    throw FormatError(path + ": truncated PGM data");
  return img;
}

GrayImage load_png(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, f.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw FormatError(path + ": not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": libpng init failed");
  }
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": PNG decode error");
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int channels = png_get_channels(png, info);
  if (width == 0 || height == 0) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": zero-dimension image");
  }
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": unsupported PNG channel count");
  }

  std::vector<png_byte> raster(std::size_t(width) * height * channels);
  row_ptrs.resize(height);
  for (png_uint_32 y = 0; y < height; ++y)
    row_ptrs[y] = raster.data() + std::size_t(y) * width * channels;
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  GrayImage img;
  img.width = int(width);
  img.height = int(height);
  img.data.resize(std::size_t(width) * height);
  if (channels == 1) {
    std::memcpy(img.data.data(), raster.data(), img.data.size());
  } else {
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      const png_byte* p = raster.data() + i * 3;
      img.data[i] = luma(p[0], p[1], p[2]);
    }
  }
  return img;
}

GrayImage load_image(const std::string& path) {
  if (has_suffix(path, ".pgm")) return load_pgm(path);
  if (has_suffix(path, ".png")) return load_png(path);

  // No known suffix: sniff the magic.
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);
  unsigned char magic[2] = {0, 0};
  std::size_t n = std::fread(magic, 1, 2, f.get());
  f.reset();
  if (n == 2 && magic[0] == 'P' && magic[1] == '5') return load_pgm(path);
  if (n == 2 && magic[0] == 0x89 && magic[1] == 'P') return load_png(path);
  throw FormatError(path + ": unsupported image format");
}

void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), std::streamsize(img.data.size()));
  if (!out) throw IoError("short write to " + path);
}

void write_pgm(const BinaryImage& img, const std::string& path) {
  GrayImage gray = make_gray(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) gray.data[i] = img.data[i] ? 0 : 255;
  write_pgm(gray, path);
}

std::optional<FixtureSpec::Kind> parse_fixture_kind(const std::string& name) {
  using Kind = FixtureSpec::Kind;
  if (name == "filled_square") return Kind::kFilledSquare;
  if (name == "hline") return Kind::kHLine;
  if (name == "point") return Kind::kPoint;
  if (name == "sierpinski_carpet") return Kind::kSierpinskiCarpet;
  if (name == "sierpinski_triangle") return Kind::kSierpinskiTriangle;
  if (name == "gaussian_blob") return Kind::kGaussianBlob;
  if (name == "random_text_like") return Kind::kRandomTextLike;
  return std::nullopt;
}

namespace {

void draw_rect(GrayImage& img, int x0, int y0, int w, int h, std::uint8_t v) {
  const int x1 = std::min(img.width, x0 + w);
  const int y1 = std::min(img.height, y0 + h);
  for (int y = std::max(0, y0); y < y1; ++y)
    for (int x = std::max(0, x0); x < x1; ++x) img.at(x, y) = v;
}

GrayImage make_carpet(int side, int depth) {
  if (depth < 1) throw std::invalid_argument("carpet depth must be >= 1");
  int unit = 1;
  for (int i = 0; i < depth; ++i) unit *= 3;
  if (side % unit != 0)
    throw std::invalid_argument("carpet side must be a multiple of 3^depth");
  const int cell = side / unit;
  GrayImage img = make_gray(side, side);
  for (int cy = 0; cy < unit; ++cy) {
    for (int cx = 0; cx < unit; ++cx) {
      // A cell is removed iff any base-3 digit pair is (1,1).
      bool hole = false;
      for (int tx = cx, ty = cy; tx > 0 || ty > 0; tx /= 3, ty /= 3) {
        if (tx % 3 == 1 && ty % 3 == 1) {
          hole = true;
          break;
        }
      }
      if (!hole) draw_rect(img, cx * cell, cy * cell, cell, cell, 0);
    }
  }
  return img;
}

GrayImage make_triangle(int side, int depth) {
  if (depth < 1) throw std::invalid_argument("triangle depth must be >= 1");
  const int unit = 1 << depth;
  if (side % unit != 0)
    throw std::invalid_argument("triangle side must be a multiple of 2^depth");
  const int cell = side / unit;
  GrayImage img = make_gray(side, side);
  for (int cy = 0; cy < unit; ++cy)
    for (int cx = 0; cx < unit; ++cx)
      if ((cx & cy) == 0) draw_rect(img, cx * cell, cy * cell, cell, cell, 0);
  return img;
}

GrayImage make_blob(int side, double sigma) {
  if (sigma <= 0) throw std::invalid_argument("blob sigma must be positive");
  GrayImage img = make_gray(side, side);
  const double c = (side - 1) / 2.0;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double d2 = (x - c) * (x - c) + (y - c) * (y - c);
      const double v = 255.0 * (1.0 - std::exp(-d2 / (2.0 * sigma * sigma)));
      img.at(x, y) = std::uint8_t(std::lround(v));
    }
  }
  return img;
}

// Lines of nonsense "words": short stroke clusters with word and line gaps.
// Tuned so a 512x512 page lands in the usual keypoint range of real pages.
GrayImage make_text_like(int side, std::uint32_t seed) {
  GrayImage img = make_gray(side, side);
  std::mt19937 rng(seed);
  auto pick = [&rng](int lo, int hi) { return lo + int(rng() % std::uint32_t(hi - lo + 1)); };

  const int margin = std::max(4, side / 32);
  const int line_height = std::max(10, side / 18);
  const int x_height = (line_height * 3) / 5;

  for (int base = margin; base + x_height < side - margin; base += line_height) {
    int x = margin + pick(0, 6);
    while (x < side - margin - 12) {
      const int word_len = pick(2, 7);
      for (int g = 0; g < word_len && x < side - margin - 12; ++g) {
        const int gw = pick(x_height / 3, (2 * x_height) / 3);
        const int strokes = pick(1, 3);
        for (int s = 0; s < strokes; ++s) {
          const int kind = pick(0, 2);
          const int thick = pick(1, 2);
          if (kind == 0) {  // vertical stem, with ascender/descender variation
            const int top = base - (pick(0, 3) == 0 ? x_height / 2 : 0);
            const int bottom = base + x_height + (pick(0, 3) == 0 ? x_height / 2 : 0);
            const int sx = x + pick(0, std::max(0, gw - thick));
            draw_rect(img, sx, top, thick, bottom - top, 0);
          } else if (kind == 1) {  // horizontal bar
            const int sy = base + pick(0, x_height - thick);
            draw_rect(img, x, sy, gw, thick, 0);
          } else {  // dot / small block
            const int bs = pick(2, 3);
            draw_rect(img, x + pick(0, std::max(0, gw - bs)), base + pick(0, x_height - bs), bs,
                      bs, 0);
          }
        }
        x += gw + pick(1, 2);
      }
      x += pick(x_height / 2, x_height);  // word gap
    }
  }
  return img;
}

}  // namespace

GrayImage make_fixture(const FixtureSpec& spec, int side) {
  if (side < kMinFixtureSide) throw std::invalid_argument("fixture side must be >= 8");
  using Kind = FixtureSpec::Kind;
  switch (spec.kind) {
    case Kind::kFilledSquare: {
      GrayImage img = make_gray(side, side, 0);
      return img;
    }
    case Kind::kHLine: {
      GrayImage img = make_gray(side, side);
      const int y = side / 2;
      for (int x = 0; x < side; ++x) img.at(x, y) = 0;
      return img;
    }
    case Kind::kPoint: {
      GrayImage img = make_gray(side, side);
      img.at(side / 2, side / 2) = 0;
      return img;
    }
    case Kind::kSierpinskiCarpet:
      return make_carpet(side, spec.depth);
    case Kind::kSierpinskiTriangle:
      return make_triangle(side, spec.depth);
    case Kind::kGaussianBlob:
      return make_blob(side, spec.sigma);
    case Kind::kRandomTextLike:
      return make_text_like(side, spec.seed);
  }
  throw std::invalid_argument("unknown fixture kind");
}

}  // namespace hdix
