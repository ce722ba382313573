// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hdix/pipeline.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hdix {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// ---- little-endian encoding -------------------------------------------------

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
  put_u32(out, std::uint32_t(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

struct Reader {
  const std::uint8_t* p;
  std::size_t n;
  std::size_t off = 0;

  void need(std::size_t k) const {
    if (off + k > n) throw FormatError("truncated index file");
  }
  std::size_t remaining() const { return n - off; }

  std::uint8_t u8() {
    need(1);
    return p[off++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = std::uint16_t(p[off]) | std::uint16_t(p[off + 1]) << 8;
    off += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[off + i]) << (8 * i);
    off += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[off + i]) << (8 * i);
    off += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(p + off), len);
    off += len;
    return s;
  }
};

// ---- config text ------------------------------------------------------------

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw FormatError("bad integer list in index config: " + s);
    }
  }
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw FormatError("bad number in index config: " + s);
  return v;
}

std::string estimator_text(const EstimatorConfig& c) {
  std::string out;
  out += std::string("method=") + method_name(c.method) + "\n";
  out += "max_boxes=" + join_ints(c.max_boxes) + "\n";
  out += "tau=" + std::to_string(c.tau) + "\n";
  out += "dilation_orders=" + join_ints(c.dilation_orders) + "\n";
  out += "binarize=";
  out += c.binarization.mode == Binarization::Mode::kOtsu
             ? "otsu"
             : "fixed:" + std::to_string(c.binarization.threshold);
  out += "\n";
  return out;
}

std::string sift_text(const SiftConfig& c) {
  std::string out;
  out += "octaves=" + std::to_string(c.scale_space.octaves) + "\n";
  out += "intervals=" + std::to_string(c.scale_space.intervals_per_octave) + "\n";
  out += "base_sigma=" + fmt_double(c.scale_space.base_sigma) + "\n";
  out += "assumed_blur=" + fmt_double(c.scale_space.assumed_blur) + "\n";
  out += "upsample=" + std::string(c.scale_space.upsample_first ? "1" : "0") + "\n";
  out += "contrast=" + fmt_double(c.thresholds.contrast) + "\n";
  out += "edge_ratio=" + fmt_double(c.thresholds.edge_ratio) + "\n";
  return out;
}

void for_each_kv(const std::string& text,
                 const std::function<void(const std::string&, const std::string&)>& fn) {
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("bad config line in index: " + line);
    fn(line.substr(0, eq), line.substr(eq + 1));
  }
}

EstimatorConfig parse_estimator_text(const std::string& text) {
  EstimatorConfig c;
  for_each_kv(text, [&](const std::string& key, const std::string& value) {
    if (key == "method") {
      const auto m = parse_method(value);
      if (!m) throw FormatError("unknown estimator method in index: " + value);
      c.method = *m;
    } else if (key == "max_boxes") {
      c.max_boxes = parse_int_list(value);
    } else if (key == "tau") {
      c.tau = int(parse_double(value));
    } else if (key == "dilation_orders") {
      c.dilation_orders = parse_int_list(value);
    } else if (key == "binarize") {
      if (value == "otsu") {
        c.binarization.mode = Binarization::Mode::kOtsu;
      } else if (value.rfind("fixed:", 0) == 0) {
        c.binarization.mode = Binarization::Mode::kFixed;
        c.binarization.threshold = int(parse_double(value.substr(6)));
      } else {
        throw FormatError("unknown binarization in index: " + value);
      }
    }
  });
  return c;
}

SiftConfig parse_sift_text(const std::string& text) {
  SiftConfig c;
  for_each_kv(text, [&](const std::string& key, const std::string& value) {
    if (key == "octaves") c.scale_space.octaves = int(parse_double(value));
    else if (key == "intervals") c.scale_space.intervals_per_octave = int(parse_double(value));
    else if (key == "base_sigma") c.scale_space.base_sigma = parse_double(value);
    else if (key == "assumed_blur") c.scale_space.assumed_blur = parse_double(value);
    else if (key == "upsample") c.scale_space.upsample_first = value != "0";
    else if (key == "contrast") c.thresholds.contrast = parse_double(value);
    else if (key == "edge_ratio") c.thresholds.edge_ratio = parse_double(value);
  });
  return c;
}

int signature_tau(const EstimatorConfig& est, FractalMethod method) {
  return method == FractalMethod::kCdb || method == FractalMethod::kBoxCounting ? est.tau : 0;
}

std::vector<int> dense_scales(int max_box) {
  if (max_box < 2) throw std::invalid_argument("max box must be at least 2");
  std::vector<int> scales(std::size_t(max_box) - 1);
  std::iota(scales.begin(), scales.end(), 2);
  return scales;
}

const FractalSignature* select_signature(const IndexEntry& entry, FractalMethod method,
                                         int param) {
  for (const FractalSignature& sig : entry.signatures)
    if (sig.method == method && sig.param == param) return &sig;
  return nullptr;
}

}  // namespace

const IndexEntry* Index::find(std::uint32_t id) const {
  if (id < entries.size() && entries[id].id == id) return &entries[id];
  for (const IndexEntry& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

FilterConfig default_filter(const Index& index) {
  FilterConfig f;
  f.method = index.estimator.method;
  if (index.estimator.method == FractalMethod::kDilation) {
    f.param = index.estimator.dilation_orders.empty()
                  ? 0
                  : *std::max_element(index.estimator.dilation_orders.begin(),
                                      index.estimator.dilation_orders.end());
  } else {
    f.param = index.estimator.max_boxes.empty() ? kDefaultMaxBox
                                                : index.estimator.max_boxes.front();
  }
  return f;
}

std::vector<FractalSignature> compute_signatures(const GrayImage& img,
                                                 const EstimatorConfig& config) {
  std::vector<FractalSignature> out;
  if (config.method == FractalMethod::kDbc) {
    if (config.max_boxes.empty()) throw std::invalid_argument("no max box configured");
    for (int mb : config.max_boxes) out.push_back(dbc(img, mb));
    return out;
  }

  const BinaryImage bin = binarize(img, config.binarization);
  switch (config.method) {
    case FractalMethod::kBoxCounting:
      if (config.max_boxes.empty()) throw std::invalid_argument("no max box configured");
      for (int mb : config.max_boxes) out.push_back(box_counting(bin, dense_scales(mb)));
      break;
    case FractalMethod::kCdb:
      if (config.max_boxes.empty()) throw std::invalid_argument("no max box configured");
      for (int mb : config.max_boxes) out.push_back(cdb(bin, mb, config.tau));
      break;
    case FractalMethod::kDilation:
      out.push_back(dilation_dimension(bin, config.dilation_orders));
      break;
    case FractalMethod::kDbc:
      break;  // handled above
  }
  return out;
}

Index build_index(const std::vector<std::string>& paths,
                  const std::map<std::string, std::string>& labels,
                  const EstimatorConfig& estimator, const SiftConfig& sift_config,
                  bool cache_descriptors, std::vector<std::string>* warnings) {
  Index index;
  index.estimator = estimator;
  index.sift_config = sift_config;

  std::vector<std::string> sorted = paths;
  std::sort(sorted.begin(), sorted.end());

  for (const std::string& path : sorted) {
    try {
      const GrayImage img = load_image(path);
      IndexEntry entry;
      entry.path = path;
      entry.signatures = compute_signatures(img, estimator);
      if (cache_descriptors) {
        sift::KeypointSet keys =
            sift::detect(img, sift_config.scale_space, sift_config.thresholds);
        keys.image_id = path;
        entry.keypoints = std::move(keys);
      }
      if (const auto it = labels.find(path); it != labels.end()) entry.label = it->second;
      entry.id = std::uint32_t(index.entries.size());
      index.entries.push_back(std::move(entry));
    } catch (const std::exception& ex) {
      if (warnings) warnings->push_back(path + ": " + ex.what());
    }
  }
  if (index.entries.empty()) throw IoError("no readable images, index would be empty");
  return index;
}

std::vector<std::uint8_t> serialize_index(const Index& index) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'H', 'D', 'I', 'X'});
  put_u16(out, index.version);
  put_u32(out, std::uint32_t(index.entries.size()));
  put_str(out, estimator_text(index.estimator));
  put_str(out, sift_text(index.sift_config));

  for (const IndexEntry& entry : index.entries) {
    put_u32(out, entry.id);
    put_str(out, entry.path);
    put_str(out, entry.label ? *entry.label : std::string());
    if (entry.signatures.empty())
      throw std::invalid_argument("index entry without a fractal signature");
    if (entry.signatures.size() > 255)
      throw std::invalid_argument("too many signatures on one entry");
    put_u8(out, std::uint8_t(entry.signatures.size()));
    for (const FractalSignature& sig : entry.signatures) {
      put_u8(out, std::uint8_t(sig.method));
      put_u16(out, std::uint16_t(sig.param));
      put_f64(out, sig.dimension);
      put_f64(out, sig.fit_r2);
    }
    put_u8(out, entry.keypoints ? 1 : 0);
    if (entry.keypoints) {
      const sift::KeypointSet& keys = *entry.keypoints;
      put_u32(out, std::uint32_t(keys.size()));
      for (std::size_t i = 0; i < keys.size(); ++i) {
        const sift::Keypoint& kp = keys.keypoints[i];
        put_f32(out, kp.x);
        put_f32(out, kp.y);
        put_f32(out, kp.sigma);
        put_f32(out, kp.orientation);
        for (float v : keys.descriptors[i]) put_f32(out, v);
      }
    }
  }
  return out;
}

Index deserialize_index(const std::uint8_t* data, std::size_t size) {
  Reader r{data, size};
  r.need(4);
  if (std::memcmp(data, "HDIX", 4) != 0) throw FormatError("not an index file (bad magic)");
  r.off = 4;

  Index index;
  index.version = r.u16();
  if (index.version != kIndexFormatVersion)
    throw FormatError("unsupported index version " + std::to_string(index.version));

  const std::uint32_t count = r.u32();
  index.estimator = parse_estimator_text(r.str());
  index.sift_config = parse_sift_text(r.str());

  // Cheapest possible entry: id + two empty strings + one signature + flag.
  if (count > r.remaining() / 14) throw FormatError("entry count exceeds file size");

  index.entries.reserve(count);
  for (std::uint32_t e = 0; e < count; ++e) {
    IndexEntry entry;
    entry.id = r.u32();
    entry.path = r.str();
    const std::string label = r.str();
    if (!label.empty()) entry.label = label;

    const int sig_count = r.u8();
    if (sig_count == 0) throw FormatError("index entry without signatures");
    for (int s = 0; s < sig_count; ++s) {
      FractalSignature sig;
      const std::uint8_t tag = r.u8();
      if (tag > std::uint8_t(FractalMethod::kDilation))
        throw FormatError("unknown fractal method tag in index");
      sig.method = FractalMethod(tag);
      sig.param = r.u16();
      sig.dimension = r.f64();
      sig.fit_r2 = r.f64();
      sig.tau = signature_tau(index.estimator, sig.method);
      sig.low_fit = sig.fit_r2 < kFitWarnThreshold;
      entry.signatures.push_back(std::move(sig));
    }

    if (r.u8() != 0) {
      const std::uint32_t kp_count = r.u32();
      constexpr std::size_t kKpBytes = 4 * 4 + sift::kDescriptorSize * 4;
      if (kp_count > r.remaining() / kKpBytes)
        throw FormatError("keypoint count exceeds file size");
      sift::KeypointSet keys;
      keys.image_id = entry.path;
      keys.keypoints.resize(kp_count);
      keys.descriptors.resize(kp_count);
      for (std::uint32_t i = 0; i < kp_count; ++i) {
        sift::Keypoint& kp = keys.keypoints[i];
        kp.x = r.f32();
        kp.y = r.f32();
        kp.sigma = r.f32();
        kp.orientation = r.f32();
        for (float& v : keys.descriptors[i]) v = r.f32();
      }
      entry.keypoints = std::move(keys);
    }
    index.entries.push_back(std::move(entry));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last index entry");
  return index;
}

void save_index(const Index& index, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_index(index);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + tmp);
    os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!os) throw IoError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot replace " + path);
  }
}

Index load_index(const std::string& path) {
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) throw IoError("cannot open " + path);
  const std::streamsize size = is.tellg();
  std::vector<std::uint8_t> bytes;
  bytes.resize(std::size_t(size));
  is.seekg(0);
  is.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!is) throw IoError("cannot read " + path);
  return deserialize_index(bytes.data(), bytes.size());
}

double query_dimension(const GrayImage& img, const Index& index, const FilterConfig& filter) {
  const EstimatorConfig& est = index.estimator;
  if (filter.method == FractalMethod::kDbc) return dbc(img, filter.param).dimension;

  const BinaryImage bin = binarize(img, est.binarization);
  switch (filter.method) {
    case FractalMethod::kBoxCounting:
      return box_counting(bin, dense_scales(filter.param)).dimension;
    case FractalMethod::kCdb:
      return cdb(bin, filter.param, est.tau).dimension;
    case FractalMethod::kDilation:
      return dilation_dimension(bin, est.dilation_orders).dimension;
    case FractalMethod::kDbc:
      break;
  }
  throw std::invalid_argument("unsupported filter method");
}

std::vector<std::uint32_t> filter_stage(double query_dim, const Index& index,
                                        const FilterConfig& filter) {
  if (!(filter.theta >= 0)) throw std::invalid_argument("theta must be >= 0");
  std::vector<std::uint32_t> survivors;
  for (const IndexEntry& entry : index.entries) {
    const FractalSignature* sig = select_signature(entry, filter.method, filter.param);
    if (!sig)
      throw std::invalid_argument("index entry " + std::to_string(entry.id) +
                                  " has no signature for the selected method/param");
    if (std::abs(query_dim - sig->dimension) <= filter.theta) survivors.push_back(entry.id);
  }
  return survivors;
}

sift::KeypointSet detect_for_index(const GrayImage& img, const Index& index) {
  return sift::detect(img, index.sift_config.scale_space, index.sift_config.thresholds);
}

QueryResult rank_stage(const sift::KeypointSet& query_keys,
                       const std::vector<std::uint32_t>& survivors, const Index& index,
                       const sift::MatchRule& rule) {
  QueryResult result;
  result.survivors = survivors.size();
  result.rejected = index.entries.size() - survivors.size();

  const auto start = Clock::now();
  result.ranking.reserve(survivors.size());
  for (std::uint32_t id : survivors) {
    const IndexEntry* entry = index.find(id);
    if (!entry) throw std::invalid_argument("unknown survivor id " + std::to_string(id));

    sift::KeypointSet recomputed;
    const sift::KeypointSet* keys = nullptr;
    if (entry->keypoints) {
      keys = &*entry->keypoints;
    } else {
      recomputed = detect_for_index(load_image(entry->path), index);
      keys = &recomputed;
    }

    RankedMatch rm;
    rm.id = id;
    rm.path = entry->path;
    rm.m_query_to_entry = int(sift::match(query_keys, *keys, rule).size());
    rm.m_entry_to_query = int(sift::match(*keys, query_keys, rule).size());
    rm.similarity = symmetric_similarity(rm.m_query_to_entry, rm.m_entry_to_query);
    result.ranking.push_back(std::move(rm));
  }
  std::sort(result.ranking.begin(), result.ranking.end(),
            [](const RankedMatch& a, const RankedMatch& b) {
              if (a.similarity != b.similarity) return a.similarity > b.similarity;
              return a.id < b.id;
            });
  result.rank_ms = ms_since(start);
  return result;
}

QueryResult query(const GrayImage& img, const Index& index, const FilterConfig& filter,
                  const sift::MatchRule& rule) {
  const auto filter_start = Clock::now();
  const double dim = query_dimension(img, index, filter);
  const std::vector<std::uint32_t> survivors = filter_stage(dim, index, filter);
  const double filter_ms = ms_since(filter_start);

  const auto rank_start = Clock::now();
  const sift::KeypointSet query_keys = detect_for_index(img, index);
  QueryResult result = rank_stage(query_keys, survivors, index, rule);
  result.rank_ms = ms_since(rank_start);  // includes query-side detection
  result.filter_ms = filter_ms;
  return result;
}

QueryResult query_path(const std::string& path, const Index& index, const FilterConfig& filter,
                       const sift::MatchRule& rule) {
  return query(load_image(path), index, filter, rule);
}

ClassifyResult classify(const GrayImage& img, const Index& index, const FilterConfig& filter,
                        const sift::MatchRule& rule) {
  std::map<std::string, ClassScore> by_class;
  for (const IndexEntry& entry : index.entries) {
    if (!entry.label) continue;
    ClassScore& score = by_class[*entry.label];
    score.class_id = *entry.label;
    ++score.member_count;
  }
  if (by_class.empty()) throw std::invalid_argument("index has no labeled entries");

  ClassifyResult result;
  result.retrieval = query(img, index, filter, rule);
  for (const RankedMatch& rm : result.retrieval.ranking) {
    const IndexEntry* entry = index.find(rm.id);
    if (entry && entry->label) by_class[*entry->label].score += rm.similarity;
  }
  for (auto& [id, score] : by_class) result.scores.push_back(score);
  result.assigned = assign_class(result.scores);
  return result;
}

ClassifyResult classify_path(const std::string& path, const Index& index,
                             const FilterConfig& filter, const sift::MatchRule& rule) {
  return classify(load_image(path), index, filter, rule);
}

BenchReport bench(const Index& index, const std::vector<std::string>& query_paths,
                  const std::vector<double>& thetas, const sift::MatchRule& rule) {
  if (index.entries.size() < 20)
    throw std::invalid_argument("bench needs an index of at least 20 images");
  if (query_paths.empty()) throw std::invalid_argument("bench needs at least one query");

  std::vector<GrayImage> images;
  images.reserve(query_paths.size());
  for (const std::string& path : query_paths) images.push_back(load_image(path));

  BenchReport report;
  report.query_count = images.size();
  report.index_size = index.entries.size();
  const double n = double(images.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // SIFT-only reference pass: the open filter keeps every entry.
  FilterConfig open_filter = default_filter(index);
  open_filter.theta = std::numeric_limits<double>::infinity();
  std::vector<std::optional<std::uint32_t>> reference_top(images.size());
  BenchRow sift_row{"sift-only", nan, 0, 1.0, 1.0};
  for (std::size_t i = 0; i < images.size(); ++i) {
    const QueryResult r = query(images[i], index, open_filter, rule);
    sift_row.mean_query_ms += (r.filter_ms + r.rank_ms) / n;
    if (!r.ranking.empty()) reference_top[i] = r.ranking.front().id;
  }

  for (double theta : thetas) {
    FilterConfig f = default_filter(index);
    f.theta = theta;
    BenchRow row{"hybrid", theta, 0, 0, 0};
    for (std::size_t i = 0; i < images.size(); ++i) {
      const QueryResult r = query(images[i], index, f, rule);
      row.mean_query_ms += (r.filter_ms + r.rank_ms) / n;
      row.mean_survivor_fraction += double(r.survivors) / double(index.entries.size()) / n;
      const std::optional<std::uint32_t> top =
          r.ranking.empty() ? std::nullopt : std::optional(r.ranking.front().id);
      if (top == reference_top[i]) row.top1_agreement += 1.0 / n;
    }
    report.rows.push_back(row);
  }
  report.rows.push_back(sift_row);

  // Fractal-only pass: rank by |D difference| without touching descriptors.
  const FilterConfig base = default_filter(index);
  BenchRow fd_row{"fractal-only", nan, 0, 1.0, 0};
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto start = Clock::now();
    const double dim = query_dimension(images[i], index, base);
    std::optional<std::uint32_t> top;
    double best = std::numeric_limits<double>::infinity();
    for (const IndexEntry& entry : index.entries) {
      const FractalSignature* sig = select_signature(entry, base.method, base.param);
      if (!sig) continue;
      const double diff = std::abs(dim - sig->dimension);
      if (diff < best || (diff == best && top && entry.id < *top)) {
        best = diff;
        top = entry.id;
      }
    }
    fd_row.mean_query_ms += ms_since(start) / n;
    if (top == reference_top[i]) fd_row.top1_agreement += 1.0 / n;
  }
  report.rows.push_back(fd_row);
  return report;
}

void print_query_result(std::ostream& os, const QueryResult& result, bool json) {
  if (json) {
    nlohmann::json head{{"survivors", result.survivors},
                        {"rejected", result.rejected},
                        {"filter_ms", result.filter_ms},
                        {"rank_ms", result.rank_ms}};
    os << head.dump() << "\n";
    for (std::size_t i = 0; i < result.ranking.size(); ++i) {
      const RankedMatch& rm = result.ranking[i];
      nlohmann::json row{{"rank", i + 1},      {"id", rm.id},
                         {"path", rm.path},    {"M", rm.similarity},
                         {"m_qi", rm.m_query_to_entry}, {"m_iq", rm.m_entry_to_query}};
      os << row.dump() << "\n";
    }
    return;
  }

  os << "# survivors=" << result.survivors << " rejected=" << result.rejected << "\n";
  char m_buf[32];
  for (std::size_t i = 0; i < result.ranking.size(); ++i) {
    const RankedMatch& rm = result.ranking[i];
    std::snprintf(m_buf, sizeof m_buf, "%.4f", rm.similarity);
    os << (i + 1) << "\t" << rm.id << "\t" << rm.path << "\t" << m_buf << "\t"
       << rm.m_query_to_entry << "\t" << rm.m_entry_to_query << "\n";
  }
}

void print_bench_report(std::ostream& os, const BenchReport& report) {
  os << "# queries=" << report.query_count << " index=" << report.index_size << "\n";
  os << "mode\ttheta\tmean_query_ms\tmean_survivor_fraction\ttop1_agreement\n";
  char buf[160];
  for (const BenchRow& row : report.rows) {
    char theta_buf[32];
    if (std::isnan(row.theta))
      std::snprintf(theta_buf, sizeof theta_buf, "-");
    else
      std::snprintf(theta_buf, sizeof theta_buf, "%g", row.theta);
    std::snprintf(buf, sizeof buf, "%s\t%s\t%.3f\t%.4f\t%.4f", row.mode.c_str(), theta_buf,
                  row.mean_query_ms, row.mean_survivor_fraction, row.top1_agreement);
    os << buf << "\n";
  }
}

}  // namespace hdix
