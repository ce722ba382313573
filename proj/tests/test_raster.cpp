// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "hdix/raster.h"
#include "test_util.h"

using namespace hdix;

namespace {

// 2x2 truecolor PNG: white, red / black, (10, 20, 30).
constexpr unsigned char kRgbPng[] = {
    137, 80,  78,  71,  13,  10,  26,  10,  0,   0,   0,   13,  73,  72,  68,  82,  0,  0,
    0,   2,   0,   0,   0,   2,   8,   2,   0,   0,   0,   253, 212, 154, 115, 0,   0,  0,
    22,  73,  68,  65,  84,  120, 156, 99,  248, 255, 255, 255, 127, 6,   6,   6,   6,  6,
    6,   46,  17,  57,  0,   46,  68,  4,   57,  184, 154, 151, 220, 0,   0,   0,   0,  73,
    69,  78,  68,  174, 66,  96,  130};

// 3x2 grayscale PNG with pixels 0, 128, 255 / 7, 77, 200.
constexpr unsigned char kGrayPng[] = {
    137, 80,  78,  71,  13,  10,  26,  10,  0,   0,   0,   13,  73,  72,  68,  82, 0,  0,
    0,   3,   0,   0,   0,   2,   8,   0,   0,   0,   0,   184, 31,  57,  198, 0,  0,  0,
    16,  73,  68,  65,  84,  120, 156, 99,  96,  104, 248, 207, 196, 126, 246, 36, 0,  10,
    131, 3,   31,  110, 120, 251, 213, 0,   0,   0,   0,   73,  69,  78,  68,  174, 66, 96,
    130};

void write_bytes(const std::string& path, const unsigned char* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data), std::streamsize(n));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out.write(text.data(), std::streamsize(text.size()));
}

}  // namespace

TEST_CASE("png loading converts color by luma") {
  testutil::ScratchDir dir;
  const std::string rgb_path = dir.file("rgb.png");
  write_bytes(rgb_path, kRgbPng, sizeof(kRgbPng));

  const GrayImage rgb = load_png(rgb_path);
  REQUIRE(rgb.width == 2);
  REQUIRE(rgb.height == 2);
  // round(0.299 R + 0.587 G + 0.114 B) per pixel.
  CHECK(rgb.at(0, 0) == 255);
  CHECK(rgb.at(1, 0) == 76);
  CHECK(rgb.at(0, 1) == 0);
  CHECK(rgb.at(1, 1) == 18);

  const std::string gray_path = dir.file("gray.png");
  write_bytes(gray_path, kGrayPng, sizeof(kGrayPng));
  const GrayImage gray = load_png(gray_path);
  REQUIRE(gray.width == 3);
  REQUIRE(gray.height == 2);
  const std::vector<std::uint8_t> want = {0, 128, 255, 7, 77, 200};
  CHECK(gray.data == want);
}

TEST_CASE("load_image dispatches on suffix and on magic bytes") {
  testutil::ScratchDir dir;

  const std::string png_as_dat = dir.file("mystery.dat");
  write_bytes(png_as_dat, kGrayPng, sizeof(kGrayPng));
  CHECK(load_image(png_as_dat).width == 3);

  const GrayImage img = testutil::text_fixture(32, 3);
  const std::string pgm_path = dir.file("img.pgm");
  write_pgm(img, pgm_path);
  CHECK(load_image(pgm_path).data == img.data);

  CHECK_THROWS_AS(load_image(dir.file("missing.pgm")), IoError);
  const std::string junk = dir.file("junk.bin");
  write_text(junk, "neither format");
  CHECK_THROWS_AS(load_image(junk), FormatError);
}

TEST_CASE("pgm round trip preserves every pixel") {
  testutil::ScratchDir dir;
  GrayImage img = make_gray(33, 17);
  std::mt19937 rng(11);
  for (auto& v : img.data) v = std::uint8_t(rng() & 0xff);

  const std::string path = dir.file("rt.pgm");
  write_pgm(img, path);
  const GrayImage back = load_pgm(path);
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.data == img.data);
}

TEST_CASE("binary images write as black ink on white") {
  testutil::ScratchDir dir;
  BinaryImage bin = testutil::solid_binary(8, false);
  bin.at(2, 3) = 1;
  bin.at(7, 0) = 1;

  const std::string path = dir.file("bin.pgm");
  write_pgm(bin, path);
  const GrayImage back = load_pgm(path);
  CHECK(back.at(2, 3) == 0);
  CHECK(back.at(7, 0) == 0);
  CHECK(back.at(0, 0) == 255);
}

TEST_CASE("pgm parser accepts comments and rejects malformed headers") {
  testutil::ScratchDir dir;

  const std::string ok = dir.file("ok.pgm");
  write_text(ok, std::string("P5\n# a comment\n 3 # inline\n2\n255\n") +
                     std::string("\x01\x02\x03\x04\x05\x06", 6));
  const GrayImage img = load_pgm(ok);
  CHECK(img.width == 3);
  CHECK(img.height == 2);
  CHECK(img.at(0, 0) == 1);
  CHECK(img.at(2, 1) == 6);

  const std::string ascii = dir.file("ascii.pgm");
  write_text(ascii, "P2\n2 2\n255\n0 0 0 0\n");
  CHECK_THROWS_AS(load_pgm(ascii), FormatError);

  const std::string deep = dir.file("deep.pgm");
  write_text(deep, std::string("P5\n2 2\n65535\n") + std::string(8, 'x'));
  CHECK_THROWS_AS(load_pgm(deep), FormatError);

  const std::string empty_dims = dir.file("zero.pgm");
  write_text(empty_dims, "P5\n0 4\n255\n");
  CHECK_THROWS_AS(load_pgm(empty_dims), FormatError);

  const std::string truncated = dir.file("short.pgm");
  write_text(truncated, std::string("P5\n4 4\n255\n") + std::string(7, 'x'));
  CHECK_THROWS_AS(load_pgm(truncated), FormatError);
}

TEST_CASE("otsu splits bimodal images and sends constants to white") {
  GrayImage bimodal = make_gray(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) bimodal.at(x, y) = (x < 32) ? 40 : 200;

  const int t = otsu_threshold(bimodal);
  CHECK(t > 40);
  CHECK(t <= 200);
  const BinaryImage bin = binarize(bimodal);
  CHECK(bin.black_count() == 64u * 32u);
  CHECK(bin.at(0, 0) == 1);
  CHECK(bin.at(63, 0) == 0);

  const GrayImage flat = make_gray(16, 16, 128);
  CHECK(binarize(flat).black_count() == 0);
  const GrayImage black = make_gray(16, 16, 0);
  CHECK(binarize(black).black_count() == 0);
}

TEST_CASE("fixed threshold black count grows with the threshold") {
  const GrayImage img = testutil::text_fixture(64, 5);
  std::size_t prev = 0;
  bool first = true;
  for (int t : {0, 64, 128, 192, 256}) {
    Binarization how;
    how.mode = Binarization::Mode::kFixed;
    how.threshold = t;
    const std::size_t count = binarize(img, how).black_count();
    if (!first) CHECK(count >= prev);
    if (t == 0) CHECK(count == 0);
    if (t == 256) CHECK(count == img.pixel_count());
    prev = count;
    first = false;
  }
}

TEST_CASE("fixtures have the advertised geometry") {
  FixtureSpec spec;

  spec.kind = FixtureSpec::Kind::kFilledSquare;
  const GrayImage filled = make_fixture(spec, 16);
  for (auto v : filled.data) CHECK(v == 0);

  spec.kind = FixtureSpec::Kind::kHLine;
  const GrayImage line = make_fixture(spec, 64);
  std::size_t ink = 0;
  for (auto v : line.data) ink += (v == 0);
  CHECK(ink == 64);
  CHECK(line.at(0, 32) == 0);
  CHECK(line.at(63, 32) == 0);

  spec.kind = FixtureSpec::Kind::kPoint;
  const GrayImage pt = make_fixture(spec, 33);
  ink = 0;
  for (auto v : pt.data) ink += (v == 0);
  CHECK(ink == 1);
  CHECK(pt.at(16, 16) == 0);

  spec.kind = FixtureSpec::Kind::kSierpinskiCarpet;
  spec.depth = 2;
  const GrayImage carpet = make_fixture(spec, 9);
  ink = 0;
  for (auto v : carpet.data) ink += (v == 0);
  CHECK(ink == 64);             // 8^depth unit cells
  CHECK(carpet.at(4, 4) != 0);  // the central hole

  CHECK_THROWS_AS(make_fixture(spec, 10), std::invalid_argument);
}

TEST_CASE("fixtures are deterministic and seed sensitive") {
  const GrayImage a = testutil::text_fixture(64, 9);
  const GrayImage b = testutil::text_fixture(64, 9);
  const GrayImage c = testutil::text_fixture(64, 10);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);

  std::size_t ink = 0;
  for (auto v : a.data) ink += (v < 128);
  CHECK(ink > a.pixel_count() / 100);
  CHECK(ink < a.pixel_count() / 2);

  FixtureSpec blob;
  blob.kind = FixtureSpec::Kind::kGaussianBlob;
  blob.sigma = 6.0;
  const GrayImage b1 = make_fixture(blob, 64);
  const GrayImage b2 = make_fixture(blob, 64);
  CHECK(b1.data == b2.data);
  CHECK(b1.at(32, 32) < b1.at(0, 0));  // dark center, light rim
}

TEST_CASE("to_float maps the gray range onto the unit interval") {
  GrayImage img = make_gray(3, 2);
  img.at(0, 0) = 0;
  img.at(1, 0) = 255;
  img.at(2, 0) = 51;
  const FloatImage f = to_float(img);
  CHECK(f.at(0, 0) == doctest::Approx(0.0));
  CHECK(f.at(1, 0) == doctest::Approx(1.0));
  CHECK(f.at(2, 0) == doctest::Approx(0.2));
}
