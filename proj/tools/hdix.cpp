// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdix/fractal.h"
#include "hdix/pipeline.h"
#include "hdix/raster.h"
#include "hdix/sift.h"
#include "hdix/similarity.h"

namespace {

namespace fs = std::filesystem;
using hdix::FractalMethod;

// Bad flag values exit 1, like any other usage problem.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string four(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

double parse_theta(const std::string& text) {
  if (text == "inf" || text == "INF" || text == "Inf")
    return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !(v >= 0))
    throw UsageError("--theta expects a non-negative number or 'inf'");
  return v;
}

std::vector<double> parse_theta_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(parse_theta(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw UsageError("--thetas expects a comma-separated list");
  return out;
}

bool is_image_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".pgm" || ext == ".png";
}

// A source may be an image file or a directory scanned (non-recursively)
// for .pgm and .png files.
std::vector<std::string> collect_images(const std::vector<std::string>& sources) {
  std::vector<std::string> out;
  for (const std::string& source : sources) {
    if (fs::is_directory(source)) {
      for (const auto& de : fs::directory_iterator(source))
        if (de.is_regular_file() && is_image_file(de.path())) out.push_back(de.path().string());
    } else {
      out.push_back(source);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Lines of "path<TAB>label"; a key without '/' also matches by file name.
std::map<std::string, std::string> load_labels(const std::string& tsv_path,
                                               const std::vector<std::string>& paths) {
  std::ifstream is(tsv_path);
  if (!is) throw hdix::IoError("cannot open label file " + tsv_path);

  std::map<std::string, std::string> raw;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw hdix::FormatError("label line without a tab: " + line);
    raw[line.substr(0, tab)] = line.substr(tab + 1);
  }

  std::map<std::string, std::string> byPath;
  for (const std::string& path : paths) {
    if (const auto it = raw.find(path); it != raw.end()) {
      byPath[path] = it->second;
      continue;
    }
    const std::string name = fs::path(path).filename().string();
    if (const auto it = raw.find(name); it != raw.end()) byPath[path] = it->second;
  }
  return byPath;
}

hdix::Binarization binarization_from(int fixed_threshold) {
  hdix::Binarization bin;
  if (fixed_threshold >= 0) {
    bin.mode = hdix::Binarization::Mode::kFixed;
    bin.threshold = fixed_threshold;
  }
  return bin;
}

void print_signature(const hdix::FractalSignature& sig) {
  std::cout << "D=" << four(sig.dimension) << "\n";
  std::cout << "fit_r2=" << four(sig.fit_r2) << "\n";
  std::cout << "method=" << hdix::method_name(sig.method) << " param=" << sig.param
            << " tau=" << sig.tau << "\n";
  if (sig.low_fit) std::cout << "warning=low_fit\n";
  for (const hdix::ScaleSample& s : sig.samples)
    std::cout << "sample\ts=" << s.scale << "\tr=" << four(s.ratio) << "\tN=" << four(s.count)
              << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"hdix: two-stage document image retrieval (fractal filter + SIFT ranking)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("hdix 1.0 (index format ") +
                                        std::to_string(hdix::kIndexFormatVersion) + ")");

  // fd ------------------------------------------------------------------
  auto* fd = app.add_subcommand("fd", "Estimate the fractal dimension of one image");
  std::string fd_image, fd_method = "cdb", fd_dump;
  int fd_max_box = hdix::kDefaultMaxBox, fd_tau = hdix::kDefaultTau, fd_fixed = -1;
  std::vector<int> fd_orders = hdix::kDefaultDilationOrders;
  fd->add_option("image", fd_image, "Input image (.pgm or .png)")->required();
  fd->add_option("--method", fd_method, "box | dbc | cdb | dilation (default cdb)");
  fd->add_option("--max-box", fd_max_box, "Largest box size in pixels (default 20)");
  fd->add_option("--tau", fd_tau, "CDB density floor in black pixels (default 1)");
  fd->add_option("--orders", fd_orders, "Dilation orders (default 5 10 15 20 30)");
  fd->add_option("--fixed-threshold", fd_fixed,
                 "Binarize at this fixed threshold instead of Otsu");
  fd->add_option("--dump-pgm", fd_dump, "Also write the binarized input to this PGM path");

  // sift ----------------------------------------------------------------
  auto* si = app.add_subcommand("sift", "Detect keypoints and dump them as text");
  std::string si_image, si_out;
  hdix::SiftConfig si_cfg;
  si->add_option("image", si_image, "Input image")->required();
  si->add_option("--out", si_out, "Write the dump to a file instead of stdout");
  si->add_option("--octaves", si_cfg.scale_space.octaves, "Octave count (0 = auto)");
  si->add_option("--intervals", si_cfg.scale_space.intervals_per_octave,
                 "Intervals per octave (default 3)");
  si->add_option("--base-sigma", si_cfg.scale_space.base_sigma, "Base blur (default 1.6)");
  si->add_option("--contrast", si_cfg.thresholds.contrast,
                 "DoG contrast threshold (default 0.03)");
  si->add_option("--edge-ratio", si_cfg.thresholds.edge_ratio,
                 "Principal curvature limit (default 10)");
  si->add_flag("--upsample", si_cfg.scale_space.upsample_first,
               "Start from a 2x upsampled octave");

  // match ---------------------------------------------------------------
  auto* ma = app.add_subcommand("match", "Directed and symmetric match counts of two images");
  std::string ma_a, ma_b;
  double ma_ratio = 0.8, ma_abs = -1;
  ma->add_option("imageA", ma_a, "First image")->required();
  ma->add_option("imageB", ma_b, "Second image")->required();
  ma->add_option("--ratio", ma_ratio, "Lowe ratio threshold (default 0.8)");
  ma->add_option("--absolute", ma_abs, "Use an absolute distance threshold instead");

  // index ---------------------------------------------------------------
  auto* ix = app.add_subcommand("index", "Build or inspect a persistent index");
  ix->require_subcommand(1);

  auto* ib = ix->add_subcommand("build", "Index every image of a directory");
  std::vector<std::string> ib_sources;
  std::string ib_out, ib_labels, ib_method = "cdb";
  std::vector<int> ib_max_boxes;
  int ib_tau = hdix::kDefaultTau, ib_fixed = -1;
  bool ib_no_cache = false;
  ib->add_option("source", ib_sources, "Image files or directories")->required();
  ib->add_option("--out", ib_out, "Output index file")->required();
  ib->add_option("--labels", ib_labels, "TSV of path<TAB>class-label");
  ib->add_option("--method", ib_method, "Fractal method (default cdb)");
  ib->add_option("--max-box", ib_max_boxes, "Max box size, repeatable (default 20)");
  ib->add_option("--tau", ib_tau, "CDB density floor (default 1)");
  ib->add_option("--fixed-threshold", ib_fixed, "Fixed binarization threshold");
  ib->add_flag("--no-cache", ib_no_cache, "Skip descriptor caching (signatures only)");

  auto* ii = ix->add_subcommand("info", "Print the header and entries of an index");
  std::string ii_file;
  ii->add_option("file", ii_file, "Index file")->required();

  // query -----------------------------------------------------------------
  auto* qu = app.add_subcommand("query", "Rank index entries against a query image");
  std::string qu_image, qu_index, qu_theta = "0.5";
  double qu_ratio = 0.8;
  bool qu_json = false;
  qu->add_option("image", qu_image, "Query image")->required();
  qu->add_option("--index", qu_index, "Index file")->required();
  qu->add_option("--theta", qu_theta, "Stage-1 threshold, number or 'inf' (default 0.5)");
  qu->add_option("--ratio", qu_ratio, "Match ratio threshold (default 0.8)");
  qu->add_flag("--json", qu_json, "One JSON object per line, full precision");

  // classify ----------------------------------------------------------------
  auto* cl = app.add_subcommand("classify", "Assign the query to a labeled class");
  std::string cl_image, cl_index, cl_theta = "0.5";
  double cl_ratio = 0.8;
  cl->add_option("image", cl_image, "Query image")->required();
  cl->add_option("--index", cl_index, "Index file with labels")->required();
  cl->add_option("--theta", cl_theta, "Stage-1 threshold, number or 'inf' (default 0.5)");
  cl->add_option("--ratio", cl_ratio, "Match ratio threshold (default 0.8)");

  // bench ---------------------------------------------------------------
  auto* be = app.add_subcommand("bench", "Compare hybrid, SIFT-only and fractal-only timings");
  std::string be_index, be_queries, be_thetas = "0.3,0.5,1.0,inf";
  double be_ratio = 0.8;
  be->add_option("--index", be_index, "Index file")->required();
  be->add_option("--queries", be_queries, "Directory of query images")->required();
  be->add_option("--thetas", be_thetas, "Comma list of thresholds (default 0.3,0.5,1.0,inf)");
  be->add_option("--ratio", be_ratio, "Match ratio threshold (default 0.8)");

  // fixture -------------------------------------------------------------
  auto* fx = app.add_subcommand("fixture", "Write a deterministic synthetic test image");
  std::string fx_kind, fx_out;
  int fx_side = 512, fx_depth = 2, fx_seed = 1;
  double fx_sigma = 8.0;
  fx->add_option("kind", fx_kind,
                 "filled_square | hline | point | sierpinski_carpet | sierpinski_triangle | "
                 "gaussian_blob | random_text_like")
      ->required();
  fx->add_option("--side", fx_side, "Image side in pixels (default 512)");
  fx->add_option("--out", fx_out, "Output PGM path")->required();
  fx->add_option("--depth", fx_depth, "Recursion depth for carpet/triangle (default 2)");
  fx->add_option("--sigma", fx_sigma, "Blob radius (default 8)");
  fx->add_option("--seed", fx_seed, "Text-like generator seed (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems exit 1; --help/--version exit 0
  }

  if (fd->parsed()) {
    const auto method = hdix::parse_method(fd_method);
    if (!method) throw UsageError("unknown method " + fd_method);
    const hdix::GrayImage img = hdix::load_image(fd_image);
    hdix::FractalSignature sig;
    if (*method == FractalMethod::kDbc) {
      sig = hdix::dbc(img, fd_max_box);
    } else {
      const hdix::BinaryImage bin = hdix::binarize(img, binarization_from(fd_fixed));
      if (!fd_dump.empty()) hdix::write_pgm(bin, fd_dump);
      switch (*method) {
        case FractalMethod::kCdb:
          sig = hdix::cdb(bin, fd_max_box, fd_tau);
          break;
        case FractalMethod::kDilation:
          sig = hdix::dilation_dimension(bin, fd_orders);
          break;
        default: {
          std::vector<int> scales;
          for (int s = 2; s <= fd_max_box; ++s) scales.push_back(s);
          sig = hdix::box_counting(bin, scales);
        }
      }
    }
    print_signature(sig);
    return 0;
  }

  if (si->parsed()) {
    const hdix::GrayImage img = hdix::load_image(si_image);
    hdix::sift::KeypointSet keys =
        hdix::sift::detect(img, si_cfg.scale_space, si_cfg.thresholds);
    keys.image_id = si_image;
    if (si_out.empty()) {
      hdix::sift::write_keypoints(std::cout, keys);
    } else {
      std::ofstream os(si_out);
      if (!os) throw hdix::IoError("cannot write " + si_out);
      hdix::sift::write_keypoints(os, keys);
    }
    return 0;
  }

  if (ma->parsed()) {
    hdix::sift::MatchRule rule;
    if (ma_abs >= 0) {
      rule.kind = hdix::sift::MatchRule::Kind::kAbsolute;
      rule.max_distance = ma_abs;
    } else {
      rule.ratio = ma_ratio;
    }
    const hdix::sift::KeypointSet a = hdix::sift::detect(hdix::load_image(ma_a));
    const hdix::sift::KeypointSet b = hdix::sift::detect(hdix::load_image(ma_b));
    const hdix::MatchReport report = hdix::make_match_report(ma_a, ma_b, a, b, rule);
    std::cout << "m_ab=" << report.m_ab << "\n";
    std::cout << "m_ba=" << report.m_ba << "\n";
    std::cout << "M=" << four(report.symmetric) << "\n";
    return 0;
  }

  if (ib->parsed()) {
    hdix::EstimatorConfig est;
    const auto method = hdix::parse_method(ib_method);
    if (!method) throw UsageError("unknown method " + ib_method);
    est.method = *method;
    if (!ib_max_boxes.empty()) est.max_boxes = ib_max_boxes;
    est.tau = ib_tau;
    est.binarization = binarization_from(ib_fixed);

    const std::vector<std::string> paths = collect_images(ib_sources);
    std::map<std::string, std::string> labels;
    if (!ib_labels.empty()) labels = load_labels(ib_labels, paths);

    std::vector<std::string> warnings;
    const hdix::Index index =
        hdix::build_index(paths, labels, est, hdix::SiftConfig{}, !ib_no_cache, &warnings);
    for (const std::string& w : warnings) std::cerr << "skip: " << w << "\n";
    hdix::save_index(index, ib_out);
    std::cout << "indexed " << index.entries.size() << " images -> " << ib_out << "\n";
    return 0;
  }

  if (ii->parsed()) {
    const hdix::Index index = hdix::load_index(ii_file);
    std::cout << "version=" << index.version << "\n";
    std::cout << "entries=" << index.entries.size() << "\n";
    std::cout << "method=" << hdix::method_name(index.estimator.method) << "\n";
    for (const hdix::IndexEntry& e : index.entries) {
      std::cout << e.id << "\t" << e.path << "\t" << (e.label ? *e.label : "-");
      for (const hdix::FractalSignature& sig : e.signatures)
        std::cout << "\t" << hdix::method_name(sig.method) << ":" << sig.param << "="
                  << four(sig.dimension);
      std::cout << "\tkp=" << (e.keypoints ? std::to_string(e.keypoints->size()) : "-") << "\n";
    }
    return 0;
  }

  if (qu->parsed()) {
    const hdix::Index index = hdix::load_index(qu_index);
    hdix::FilterConfig filter = hdix::default_filter(index);
    filter.theta = parse_theta(qu_theta);
    hdix::sift::MatchRule rule;
    rule.ratio = qu_ratio;
    const hdix::QueryResult result = hdix::query_path(qu_image, index, filter, rule);
    hdix::print_query_result(std::cout, result, qu_json);
    return 0;
  }

  if (cl->parsed()) {
    const hdix::Index index = hdix::load_index(cl_index);
    hdix::FilterConfig filter = hdix::default_filter(index);
    filter.theta = parse_theta(cl_theta);
    hdix::sift::MatchRule rule;
    rule.ratio = cl_ratio;
    const hdix::ClassifyResult result = hdix::classify_path(cl_image, index, filter, rule);
    std::cout << "class=" << (result.assigned ? *result.assigned : "none") << "\n";
    for (const hdix::ClassScore& s : result.scores)
      std::cout << "S\t" << s.class_id << "\t" << four(s.score) << "\t" << s.member_count
                << "\n";
    hdix::print_query_result(std::cout, result.retrieval, false);
    return 0;
  }

  if (be->parsed()) {
    const hdix::Index index = hdix::load_index(be_index);
    const std::vector<std::string> queries = collect_images({be_queries});
    hdix::sift::MatchRule rule;
    rule.ratio = be_ratio;
    const hdix::BenchReport report =
        hdix::bench(index, queries, parse_theta_list(be_thetas), rule);
    hdix::print_bench_report(std::cout, report);
    return 0;
  }

  if (fx->parsed()) {
    const auto kind = hdix::parse_fixture_kind(fx_kind);
    if (!kind) throw UsageError("unknown fixture kind " + fx_kind);
    hdix::FixtureSpec spec;
    spec.kind = *kind;
    spec.depth = fx_depth;
    spec.sigma = fx_sigma;
    spec.seed = std::uint32_t(fx_seed);
    hdix::write_pgm(hdix::make_fixture(spec, fx_side), fx_out);
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("HDIX_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }
  try {
    return run(argc, argv);
  } catch (const UsageError& ex) {
    std::cerr << "usage error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
