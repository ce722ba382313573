// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end checks of the retrieval engine, one verdict line per criterion.
// Usage: hdix_acceptance [path-to-hdix-cli]

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hdix/fractal.h"
#include "hdix/pipeline.h"
#include "hdix/raster.h"
#include "hdix/sift.h"
#include "hdix/similarity.h"
#include "test_util.h"

using namespace hdix;

namespace {

struct SubChecks {
  bool ok = true;
  std::string why;

  void expect(bool cond, const std::string& label) {
    if (cond) return;
    ok = false;
    if (!why.empty()) why += "; ";
    why += label;
  }
};

struct Harness {
  int failures = 0;

  void report(int number, const std::string& name, const SubChecks& checks) {
    if (checks.ok) {
      std::printf("PASS criterion %d: %s\n", number, name.c_str());
    } else {
      std::printf("FAIL criterion %d: %s [%s]\n", number, name.c_str(), checks.why.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

BinaryImage binarize_fixture(FixtureSpec::Kind kind, int side, int depth = 2) {
  FixtureSpec spec;
  spec.kind = kind;
  spec.depth = depth;
  return binarize(make_fixture(spec, side));
}

GrayImage gray_fixture(FixtureSpec::Kind kind, int side, int depth = 2) {
  FixtureSpec spec;
  spec.kind = kind;
  spec.depth = depth;
  return make_fixture(spec, side);
}

GrayImage checkerboard(int side) {
  GrayImage img = make_gray(side, side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) img.at(x, y) = ((x + y) % 2) ? 255 : 0;
  return img;
}

// Independent least squares used to cross-check fit_dimension.
std::pair<double, double> ols_oracle(const std::vector<ScaleSample>& samples, int sign) {
  std::vector<long double> xs, ys;
  for (const auto& s : samples) {
    if (s.count <= 0) continue;
    xs.push_back(std::log(1.0L / (long double)(s.ratio)));
    ys.push_back(std::log((long double)(s.count)));
  }
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= (long double)(xs.size());
  my /= (long double)(ys.size());
  long double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const long double slope = sxy / sxx;
  long double r2 = 1.0;
  if (syy > 0) r2 = (sxy * sxy) / (sxx * syy);
  return {double(sign * slope), double(r2)};
}

int run_cli(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

void criterion_1(Harness& h) {
  SubChecks c;

  auto timed_cdb = [&](const BinaryImage& bin, const char* label) {
    const auto t0 = std::chrono::steady_clock::now();
    const FractalSignature sig = cdb(bin);
    c.expect(ms_since(t0) < 2000.0, std::string(label) + " under 2s");
    return sig.dimension;
  };

  const double filled = timed_cdb(testutil::solid_binary(512, true), "filled");
  c.expect(std::abs(filled - 2.0) <= 0.10, "filled square near 2.0");

  const double line = timed_cdb(binarize_fixture(FixtureSpec::Kind::kHLine, 512), "line");
  c.expect(std::abs(line - 1.0) <= 0.10, "line near 1.0");

  const double point = timed_cdb(binarize_fixture(FixtureSpec::Kind::kPoint, 512), "point");
  c.expect(std::abs(point - 0.0) <= 0.10, "point near 0.0");

  const auto t0 = std::chrono::steady_clock::now();
  const BinaryImage carpet = binarize_fixture(FixtureSpec::Kind::kSierpinskiCarpet, 243, 5);
  const FractalSignature cs = box_counting(carpet, {3, 9, 27, 81});
  c.expect(ms_since(t0) < 2000.0, "carpet under 2s");
  c.expect(std::abs(cs.dimension - 1.893) <= 0.05, "carpet near 1.893");

  h.report(1, "density box occupancy recovers canonical dimensions", c);
}

void criterion_2(Harness& h) {
  SubChecks c;

  const GrayImage flat = make_gray(512, 512, 128);
  c.expect(std::abs(dbc(flat).dimension - 2.0) <= 0.10, "constant near 2.0");

  std::vector<GrayImage> images;
  images.push_back(flat);
  images.push_back(testutil::text_fixture(512, 1));
  images.push_back(gray_fixture(FixtureSpec::Kind::kGaussianBlob, 256));
  images.push_back(gray_fixture(FixtureSpec::Kind::kHLine, 512));
  images.push_back(gray_fixture(FixtureSpec::Kind::kPoint, 512));
  images.push_back(gray_fixture(FixtureSpec::Kind::kSierpinskiCarpet, 243, 5));
  images.push_back(checkerboard(256));

  for (std::size_t i = 0; i < images.size(); ++i) {
    const double d = dbc(images[i]).dimension;
    c.expect(d >= 1.85 && d <= 3.15, "image " + std::to_string(i) + " inside [1.85, 3.15]");
  }

  h.report(2, "differential box counting stays in the surface range", c);
}

void criterion_3(Harness& h) {
  SubChecks c;
  const std::vector<int> orders = {5, 10, 15, 20, 30};

  BinaryImage point = testutil::solid_binary(512, false);
  point.at(256, 256) = 1;
  c.expect(std::abs(dilation_dimension(point, orders).dimension) <= 0.15, "point near 0");

  const BinaryImage line = binarize_fixture(FixtureSpec::Kind::kHLine, 512);
  c.expect(std::abs(dilation_dimension(line, orders).dimension - 1.0) <= 0.15, "line near 1");

  const BinaryImage filled = testutil::solid_binary(512, true);
  c.expect(std::abs(dilation_dimension(filled, orders).dimension - 2.0) <= 0.15,
           "filled near 2");

  h.report(3, "dilation estimates track point, line and plane", c);
}

void criterion_4(Harness& h) {
  SubChecks c;

  const std::vector<ScaleSample> exact = {
      {2, 2.0 / 64, 1024}, {4, 4.0 / 64, 256}, {8, 8.0 / 64, 64}, {16, 16.0 / 64, 16}};
  const auto [de, re] = fit_dimension(exact, +1);
  const auto [de_o, re_o] = ols_oracle(exact, +1);
  c.expect(std::abs(de - de_o) < 1e-9, "slope matches oracle on exact data");
  c.expect(std::abs(re - re_o) < 1e-9, "r2 matches oracle on exact data");

  const std::vector<ScaleSample> noisy = {{2, 2.0 / 100, 2011}, {3, 3.0 / 100, 1003},
                                          {5, 5.0 / 100, 441},  {7, 7.0 / 100, 208},
                                          {11, 11.0 / 100, 97}, {16, 16.0 / 100, 44}};
  const auto [dn, rn] = fit_dimension(noisy, +1);
  const auto [dn_o, rn_o] = ols_oracle(noisy, +1);
  c.expect(std::abs(dn - dn_o) < 1e-9, "slope matches oracle on noisy data");
  c.expect(std::abs(rn - rn_o) < 1e-9, "r2 matches oracle on noisy data");

  h.report(4, "log-log regression agrees with an independent fit", c);
}

void criterion_5(Harness& h) {
  SubChecks c;

  static_assert(std::tuple_size<sift::Descriptor>::value == 128);

  const GrayImage text = testutil::text_fixture(512, 1);
  const sift::KeypointSet set = sift::detect(text);
  c.expect(set.size() >= 100 && set.size() <= 3000, "text keypoint count inside [100, 3000]");

  bool norms_ok = !set.empty();
  for (const auto& d : set.descriptors) {
    double n = 0;
    for (float v : d) n += double(v) * v;
    if (std::abs(std::sqrt(n) - 1.0) > 1e-6) norms_ok = false;
  }
  c.expect(norms_ok, "every descriptor has unit norm");

  c.expect(sift::detect(make_gray(128, 128, 77)).empty(), "constant image has no keypoints");

  FixtureSpec blob;
  blob.kind = FixtureSpec::Kind::kGaussianBlob;
  blob.sigma = 8.0;
  const sift::KeypointSet blob_set = sift::detect(make_fixture(blob, 256));
  bool blob_hit = false;
  for (const auto& kp : blob_set.keypoints) {
    if (std::abs(kp.x - 127.5f) <= 3.0f && std::abs(kp.y - 127.5f) <= 3.0f && kp.sigma >= 4.0f &&
        kp.sigma <= 16.0f)
      blob_hit = true;
  }
  c.expect(blob_hit, "blob localized within 3 px at a plausible scale");

  // A quarter turn: at least half the keypoints must reappear, found both
  // geometrically and through the ratio matcher.
  const GrayImage turned = testutil::rotate90(text);
  const sift::KeypointSet rot = sift::detect(turned);
  const std::vector<sift::Match> matches = sift::match(set, rot);
  std::set<int> consistent;
  for (const auto& m : matches) {
    float rx = 0, ry = 0;
    const auto& kp = set.keypoints[std::size_t(m.index_a)];
    testutil::rot90_point(kp.x, kp.y, text.width, &rx, &ry);
    const auto& other = rot.keypoints[std::size_t(m.index_b)];
    if (std::abs(rx - other.x) <= 2.0f && std::abs(ry - other.y) <= 2.0f)
      consistent.insert(m.index_a);
  }
  c.expect(double(consistent.size()) >= 0.5 * double(set.size()),
           "rotation repeatability at least 50%");

  const std::vector<sift::Match> self = sift::match(set, set);
  std::size_t at_zero = 0;
  for (const auto& m : self) at_zero += (m.distance == 0.0);
  c.expect(double(at_zero) >= 0.95 * double(set.size()),
           "self matching recovers 95% at distance zero");

  h.report(5, "keypoint detection and description behave structurally", c);
}

void criterion_6(Harness& h) {
  SubChecks c;

  c.expect(symmetric_similarity(31, 32) == 31.5, "string example is exactly 31.5");

  std::mt19937 rng(7);
  std::uniform_int_distribution<int> counts(0, 5000);
  bool symmetric = true, additive = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const int x = counts(rng), y = counts(rng);
    if (symmetric_similarity(x, y) != symmetric_similarity(y, x)) symmetric = false;

    double whole = 0, part1 = 0, part2 = 0;
    for (int member = 0; member < 10; ++member) {
      const double m = symmetric_similarity(counts(rng), counts(rng));
      whole += m;
      (member % 2 ? part1 : part2) += m;
    }
    if (whole != part1 + part2) additive = false;
  }
  c.expect(symmetric, "symmetry holds on 1000 random tables");
  c.expect(additive, "class sums are partition independent");

  h.report(6, "symmetric similarity is exact, symmetric and additive", c);
}

void criterion_7(Harness& h) {
  SubChecks c;

  testutil::ScratchDir dir;
  const auto paths = testutil::write_mixed_corpus(dir, 18, 12, 128);
  const Index index = build_index(paths, {}, EstimatorConfig{}, SiftConfig{});
  const GrayImage probe = testutil::text_fixture(128, 99);

  FilterConfig filter = default_filter(index);
  filter.theta = std::numeric_limits<double>::infinity();
  const QueryResult open_gate = query(probe, index, filter);

  std::vector<std::uint32_t> everyone;
  for (const auto& e : index.entries) everyone.push_back(e.id);
  const QueryResult pure = rank_stage(sift::detect(probe), everyone, index);

  bool same = open_gate.ranking.size() == pure.ranking.size();
  if (same) {
    for (std::size_t i = 0; i < pure.ranking.size(); ++i) {
      if (open_gate.ranking[i].id != pure.ranking[i].id) same = false;
      if (open_gate.ranking[i].similarity != pure.ranking[i].similarity) same = false;
    }
  }
  c.expect(same, "theta=inf ranking equals pure sift ranking");
  c.expect(open_gate.rejected == 0, "theta=inf rejects nothing");

  const double dim = query_dimension(probe, index, filter);
  std::set<std::uint32_t> prev;
  bool nested = true;
  bool first = true;
  for (double theta : {0.0, 0.1, 0.5, 1.0, std::numeric_limits<double>::infinity()}) {
    filter.theta = theta;
    const auto ids = filter_stage(dim, index, filter);
    const std::set<std::uint32_t> cur(ids.begin(), ids.end());
    if (!first) {
      for (std::uint32_t id : prev)
        if (!cur.count(id)) nested = false;
    }
    prev = cur;
    first = false;
  }
  c.expect(nested, "survivor sets nest as theta grows");
  c.expect(prev.size() == index.entries.size(), "theta=inf keeps the whole corpus");

  h.report(7, "an open filter degrades exactly to pure sift retrieval", c);
}

void criterion_8(Harness& h) {
  SubChecks c;

  testutil::ScratchDir dir;
  const auto paths = testutil::write_mixed_corpus(dir, 55, 45, 128);
  const Index index = build_index(paths, {}, EstimatorConfig{}, SiftConfig{});
  c.expect(index.entries.size() == 100, "corpus indexed in full");

  std::vector<std::string> queries;
  for (int i = 0; i < 12; ++i) {
    const std::string path = dir.file("probe_" + std::to_string(i) + ".pgm");
    write_pgm(testutil::text_fixture(128, std::uint32_t(300 + i)), path);
    queries.push_back(path);
  }

  const BenchReport report = bench(index, queries, {0.5});
  print_bench_report(std::cout, report);

  const BenchRow* hybrid = nullptr;
  const BenchRow* sift_only = nullptr;
  for (const auto& row : report.rows) {
    if (row.mode == "hybrid" && row.theta == 0.5) hybrid = &row;
    if (row.mode == "sift-only") sift_only = &row;
  }
  c.expect(hybrid != nullptr && sift_only != nullptr, "report carries hybrid and sift rows");
  if (hybrid && sift_only) {
    c.expect(hybrid->mean_survivor_fraction <= 0.70, "filter rejects at least 30%");
    c.expect(hybrid->mean_query_ms < sift_only->mean_query_ms,
             "hybrid mean query time beats pure sift");
  }

  h.report(8, "the cheap filter pays for itself on a mixed corpus", c);
}

void criterion_9(Harness& h) {
  SubChecks c;

  Index index;
  for (int i = 0; i < 2; ++i) {
    IndexEntry entry;
    entry.id = std::uint32_t(i);
    entry.path = "candidate-" + std::to_string(i + 1);
    FractalSignature sig;
    sig.method = FractalMethod::kCdb;
    sig.param = kDefaultMaxBox;
    sig.tau = kDefaultTau;
    sig.dimension = 1.5;
    sig.fit_r2 = 1.0;
    entry.signatures.push_back(sig);
    index.entries.push_back(std::move(entry));
  }

  std::vector<int> shared_with_first, shared_with_second, probe_axes;
  for (int i = 0; i < 12; ++i) shared_with_first.push_back(i);
  shared_with_second = {12, 13};
  for (int i = 0; i < 14; ++i) probe_axes.push_back(i);

  index.entries[0].keypoints = testutil::basis_set("first", shared_with_first);
  index.entries[1].keypoints = testutil::basis_set("second", shared_with_second);

  const auto probe = testutil::basis_set("probe", probe_axes);
  const QueryResult result = rank_stage(probe, {0, 1}, index);

  c.expect(result.ranking.size() == 2, "both candidates ranked");
  if (result.ranking.size() == 2) {
    c.expect(result.ranking[0].id == 0, "the 12-match candidate comes first");
    c.expect(result.ranking[0].m_query_to_entry == 12 &&
                 result.ranking[0].m_entry_to_query == 12,
             "first candidate counts are (12, 12)");
    c.expect(result.ranking[0].similarity == 12.0, "first candidate scores 12");
    c.expect(result.ranking[1].m_query_to_entry == 2 && result.ranking[1].m_entry_to_query == 2,
             "second candidate counts are (2, 2)");
    c.expect(result.ranking[1].similarity == 2.0, "second candidate scores 2");
  }

  h.report(9, "directed match counts rank the richer candidate first", c);
}

void criterion_10(Harness& h, const std::string& cli) {
  SubChecks c;

  testutil::ScratchDir dir;
  const auto paths = testutil::write_mixed_corpus(dir, 3, 2, 128);
  const Index index = build_index(paths, {}, EstimatorConfig{}, SiftConfig{});

  const auto bytes = serialize_index(index);
  const Index back = deserialize_index(bytes.data(), bytes.size());
  c.expect(serialize_index(back) == bytes, "deserialize then serialize is byte identical");

  const std::string good = dir.file("good.hdix");
  save_index(index, good);
  {
    std::ifstream in(good, std::ios::binary);
    const std::vector<std::uint8_t> on_disk(std::istreambuf_iterator<char>(in),
                                            std::istreambuf_iterator<char>{});
    c.expect(on_disk == bytes, "saved file holds exactly the serialized bytes");
  }
  const Index loaded = load_index(good);
  c.expect(serialize_index(loaded) == bytes, "loading restores the same index");

  std::vector<std::uint8_t> wrong = bytes;
  wrong[4] = kIndexFormatVersion + 1;  // bump the little-endian version field
  wrong[5] = 0;
  bool version_rejected = false;
  try {
    deserialize_index(wrong.data(), wrong.size());
  } catch (const FormatError&) {
    version_rejected = true;
  }
  c.expect(version_rejected, "version mismatch raises a format error");

  if (!cli.empty()) {
    const std::string bad = dir.file("bad.hdix");
    std::ofstream out(bad, std::ios::binary);
    out.write(reinterpret_cast<const char*>(wrong.data()), std::streamsize(wrong.size()));
    out.close();

    const int good_code = run_cli(cli + " index info " + good + " >/dev/null 2>&1");
    c.expect(good_code == 0, "cli reads the valid index (exit 0)");
    const int bad_code = run_cli(cli + " index info " + bad + " >/dev/null 2>&1");
    c.expect(bad_code == 2, "cli exits with code 2 on a version mismatch");
    const int query_code =
        run_cli(cli + " query " + paths[0] + " --index " + bad + " >/dev/null 2>&1");
    c.expect(query_code == 2, "cli query also exits with code 2");
  } else {
    c.expect(false, "cli binary path not supplied");
  }

  h.report(10, "the on-disk index round trips and rejects other versions", c);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  Harness h;

  criterion_1(h);
  criterion_2(h);
  criterion_3(h);
  criterion_4(h);
  criterion_5(h);
  criterion_6(h);
  criterion_7(h);
  criterion_8(h);
  criterion_9(h);
  criterion_10(h, cli);

  std::printf("%d of 10 criteria passed\n", 10 - h.failures);
  return h.failures == 0 ? 0 : 1;
}
