// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hdix/fractal.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hdix/kernels.h"

namespace hdix {

const char* method_name(FractalMethod method) {
  switch (method) {
    case FractalMethod::kBoxCounting:
      return "box";
    case FractalMethod::kDbc:
      return "dbc";
    case FractalMethod::kCdb:
      return "cdb";
    case FractalMethod::kDilation:
      return "dilation";
  }
  return "?";
}

std::optional<FractalMethod> parse_method(const std::string& name) {
  if (name == "box" || name == "box_counting") return FractalMethod::kBoxCounting;
  if (name == "dbc") return FractalMethod::kDbc;
  if (name == "cdb") return FractalMethod::kCdb;
  if (name == "dilation") return FractalMethod::kDilation;
  return std::nullopt;
}

namespace {

// Ordinary least squares slope of y against x, plus the coefficient of
// determination. A constant y is a perfect horizontal fit (r2 = 1).
std::pair<double, double> ols(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / double(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / double(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx < 1e-12) throw std::invalid_argument("regression scales are all identical");
  const double slope = sxy / sxx;
  double r2 = 1.0;
  if (syy >= 1e-12) {
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = ys[i] - (my + slope * (xs[i] - mx));
      ss_res += e * e;
    }
    r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return {slope, r2};
}

void check_scales(const std::vector<int>& scales, int m_side) {
  if (scales.empty()) throw std::invalid_argument("scale list is empty");
  for (int s : scales) {
    if (s < 2) throw std::invalid_argument("box size must be at least 2");
    if (s > m_side / 2) throw std::invalid_argument("box size exceeds M/2");
  }
}

void require_foreground(const BinaryImage& bin) {
  if (bin.black_count() == 0) throw std::invalid_argument("no foreground (all-white image)");
}

FractalSignature finish_box_signature(FractalMethod method, int param, int tau,
                                      std::vector<ScaleSample> samples) {
  FractalSignature sig;
  sig.method = method;
  sig.param = param;
  sig.tau = tau;
  sig.samples = std::move(samples);
  const auto [d, r2] = fit_dimension(sig.samples, +1);
  sig.dimension = d;
  sig.fit_r2 = r2;
  sig.low_fit = r2 < kFitWarnThreshold;
  return sig;
}

}  // namespace

std::pair<double, double> fit_dimension(const std::vector<ScaleSample>& samples, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  std::vector<double> xs, ys;
  xs.reserve(samples.size());
  ys.reserve(samples.size());
  for (const ScaleSample& s : samples) {
    if (s.count <= 0) continue;  // dropped
    if (!(s.ratio > 0 && s.ratio < 1))
      throw std::invalid_argument("scale ratio must lie in (0, 1)");
    xs.push_back(std::log(1.0 / s.ratio));
    ys.push_back(std::log(s.count));
  }
  if (xs.size() < 3)
    throw std::invalid_argument("fit needs at least 3 samples with positive counts");
  const auto [slope, r2] = ols(xs, ys);
  return {sign * slope, r2};
}

FractalSignature box_counting(const BinaryImage& bin, const std::vector<int>& scales) {
  const int m = bin.min_side();
  check_scales(scales, m);
  require_foreground(bin);
  const kernels::IntegralImage sat = kernels::integrate(bin);

  std::vector<ScaleSample> samples;
  samples.reserve(scales.size());
  for (int s : scales) {
    const double count = double(kernels::count_occupied_boxes(sat, m, s, 1));
    samples.push_back({double(s), double(s) / m, count});
  }
  return finish_box_signature(FractalMethod::kBoxCounting,
                              *std::max_element(scales.begin(), scales.end()), 1,
                              std::move(samples));
}

FractalSignature cdb(const BinaryImage& bin, int max_box, int tau) {
  const int m = bin.min_side();
  if (max_box < 2) throw std::invalid_argument("max box must be at least 2");
  if (max_box > m / 2) throw std::invalid_argument("max box exceeds M/2");
  if (tau < 1) throw std::invalid_argument("density floor tau must be >= 1");
  require_foreground(bin);
  const kernels::IntegralImage sat = kernels::integrate(bin);

  std::vector<ScaleSample> samples;
  for (int s = 2; s <= max_box; ++s) {
    const double count = double(kernels::count_occupied_boxes(sat, m, s, tau));
    samples.push_back({double(s), double(s) / m, count});
  }
  return finish_box_signature(FractalMethod::kCdb, max_box, tau, std::move(samples));
}

FractalSignature dbc(const GrayImage& img, int max_box) {
  const int m = img.min_side();
  if (max_box < 2) throw std::invalid_argument("max box must be at least 2");
  if (max_box > m / 2) throw std::invalid_argument("max box exceeds M/2");

  std::vector<ScaleSample> samples;
  for (int s = 2; s <= max_box; ++s) {
    const double box_h = double(s) * GrayImage::kGrayLevels / m;
    const double count = double(kernels::gray_span_sum(img, m, s, box_h));
    samples.push_back({double(s), double(s) / m, count});
  }
  return finish_box_signature(FractalMethod::kDbc, max_box, 0, std::move(samples));
}

FractalSignature dilation_dimension(const BinaryImage& bin, const std::vector<int>& orders) {
  if (orders.empty()) throw std::invalid_argument("dilation order list is empty");
  for (int k : orders)
    if (k < 1) throw std::invalid_argument("dilation order must be >= 1");
  require_foreground(bin);

  const std::vector<double> dist_sq = kernels::squared_distance_transform(bin);
  const int m = bin.min_side();

  FractalSignature sig;
  sig.method = FractalMethod::kDilation;
  sig.param = *std::max_element(orders.begin(), orders.end());
  sig.tau = 0;

  std::vector<double> xs, ys;
  for (int k : orders) {
    const double limit = double(k) * k;
    std::int64_t area = 0;
#pragma omp parallel for schedule(static) reduction(+ : area)
    for (std::int64_t i = 0; i < std::int64_t(dist_sq.size()); ++i)
      if (dist_sq[std::size_t(i)] <= limit) ++area;
    sig.samples.push_back({double(k), double(k) / m, double(area)});
    xs.push_back(std::log(double(k)));
    ys.push_back(std::log(double(area)));
  }
  if (xs.size() < 2) throw std::invalid_argument("dilation needs at least 2 orders");

  // D = 2 - slope of ln A(k) against ln k.
  const auto [slope, r2] = ols(xs, ys);
  sig.dimension = 2.0 - slope;
  sig.fit_r2 = r2;
  sig.low_fit = r2 < kFitWarnThreshold;
  return sig;
}

}  // namespace hdix
