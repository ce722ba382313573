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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hdix/fractal.h"
#include "hdix/raster.h"
#include "hdix/sift.h"
#include "hdix/similarity.h"

namespace hdix {

/// How every indexed image gets its fractal signatures. One signature per
/// configured max box (box methods) or one for the dilation order set.
struct EstimatorConfig {
  FractalMethod method = FractalMethod::kCdb;
  std::vector<int> max_boxes = {kDefaultMaxBox};
  int tau = kDefaultTau;
  std::vector<int> dilation_orders = kDefaultDilationOrders;
  Binarization binarization;
};

struct SiftConfig {
  sift::ScaleSpaceConfig scale_space;
  sift::DetectThresholds thresholds;
};

struct IndexEntry {
  std::uint32_t id = 0;
  std::string path;
  std::optional<std::string> label;
  std::vector<FractalSignature> signatures;
  std::optional<sift::KeypointSet> keypoints;  // cached descriptors
};

inline constexpr std::uint16_t kIndexFormatVersion = 1;

struct Index {
  std::uint16_t version = kIndexFormatVersion;
  EstimatorConfig estimator;
  SiftConfig sift_config;
  std::vector<IndexEntry> entries;

  const IndexEntry* find(std::uint32_t id) const;
};

std::vector<FractalSignature> compute_signatures(const GrayImage& img,
                                                 const EstimatorConfig& config);

// Loads, binarizes and fingerprints every image; entries are ordered by
// path and ids run 0..n-1 in that order. Unreadable images are skipped with
// a note in *warnings; zero successful entries is an error.
Index build_index(const std::vector<std::string>& paths,
                  const std::map<std::string, std::string>& labels,
                  const EstimatorConfig& estimator, const SiftConfig& sift_config,
                  bool cache_descriptors = true, std::vector<std::string>* warnings = nullptr);

// Binary index format, little-endian throughout (see README for the layout).
std::vector<std::uint8_t> serialize_index(const Index& index);
Index deserialize_index(const std::uint8_t* data, std::size_t size);
void save_index(const Index& index, const std::string& path);  // write-then-rename
Index load_index(const std::string& path);

/// Stage-1 rejection rule: an entry survives iff |D_query - D_entry| <= theta,
/// comparing the signature selected by (method, param).
struct FilterConfig {
  double theta = 0.5;
  FractalMethod method = FractalMethod::kCdb;
  int param = kDefaultMaxBox;
};

// Filter aligned with the index's own estimator: same method, and the
// param its signatures actually carry (first max box, or largest order).
FilterConfig default_filter(const Index& index);

// The query-side dimension for the selected signature, computed under the
// index's estimator settings.
double query_dimension(const GrayImage& img, const Index& index, const FilterConfig& filter);

std::vector<std::uint32_t> filter_stage(double query_dim, const Index& index,
                                        const FilterConfig& filter);

struct RankedMatch {
  std::uint32_t id = 0;
  std::string path;
  double similarity = 0;       // M
  int m_query_to_entry = 0;    // m(q -> i)
  int m_entry_to_query = 0;    // m(i -> q)
};

struct QueryResult {
  std::vector<RankedMatch> ranking;  // similarity descending, ties by id
  std::size_t survivors = 0;
  std::size_t rejected = 0;
  double filter_ms = 0;
  double rank_ms = 0;
};

sift::KeypointSet detect_for_index(const GrayImage& img, const Index& index);

// SIFT ranking of the surviving entries. Entries without cached descriptors
// are re-detected from their source path.
QueryResult rank_stage(const sift::KeypointSet& query_keys,
                       const std::vector<std::uint32_t>& survivors, const Index& index,
                       const sift::MatchRule& rule = {});

QueryResult query(const GrayImage& img, const Index& index, const FilterConfig& filter = {},
                  const sift::MatchRule& rule = {});
QueryResult query_path(const std::string& path, const Index& index,
                       const FilterConfig& filter = {}, const sift::MatchRule& rule = {});

struct ClassifyResult {
  std::optional<std::string> assigned;   // nullopt = no class
  std::vector<ClassScore> scores;        // every labeled class, sorted by id
  QueryResult retrieval;
};

// Per-class S over surviving members; classes fully rejected by the filter
// score 0. Requires at least one labeled entry.
ClassifyResult classify(const GrayImage& img, const Index& index, const FilterConfig& filter = {},
                        const sift::MatchRule& rule = {});
ClassifyResult classify_path(const std::string& path, const Index& index,
                             const FilterConfig& filter = {}, const sift::MatchRule& rule = {});

struct BenchRow {
  std::string mode;  // "hybrid", "sift-only", "fractal-only"
  double theta = 0;  // NaN where not applicable
  double mean_query_ms = 0;
  double mean_survivor_fraction = 0;
  double top1_agreement = 0;  // fraction of queries whose top hit matches sift-only
};

struct BenchReport {
  std::size_t query_count = 0;
  std::size_t index_size = 0;
  std::vector<BenchRow> rows;
};

// Mean per-query wall time of the hybrid pipeline at each theta, of pure
// SIFT ranking, and of ranking by fractal distance alone.
BenchReport bench(const Index& index, const std::vector<std::string>& query_paths,
                  const std::vector<double>& thetas, const sift::MatchRule& rule = {});

// "# survivors=<n> rejected=<n>" then one row per rank; --json switches to
// one JSON object per line with full-precision numbers.
void print_query_result(std::ostream& os, const QueryResult& result, bool json);
void print_bench_report(std::ostream& os, const BenchReport& report);

}  // namespace hdix
