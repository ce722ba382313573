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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdix/raster.h"

namespace hdix {

enum class FractalMethod : std::uint8_t {
  kBoxCounting = 0,
  kDbc = 1,       // differential box counting over the gray axis
  kCdb = 2,       // density-thresholded box occupancy on binary images
  kDilation = 3,  // Minkowski sausage area growth
};

const char* method_name(FractalMethod method);
std::optional<FractalMethod> parse_method(const std::string& name);

/// One point of the log-log regression: a box side (or dilation order), its
/// normalized ratio s / M, and the tally measured at that scale.
struct ScaleSample {
  double scale = 0;
  double ratio = 0;
  double count = 0;
};

/// Estimator output: the fitted dimension plus the evidence behind it.
struct FractalSignature {
  FractalMethod method = FractalMethod::kCdb;
  int param = 0;  // max box size, or the largest dilation order
  int tau = 0;    // density floor for occupancy methods; 0 when unused
  double dimension = 0;
  double fit_r2 = 0;
  bool low_fit = false;  // fit_r2 below kFitWarnThreshold
  std::vector<ScaleSample> samples;
};

inline constexpr double kFitWarnThreshold = 0.9;
inline constexpr int kDefaultMaxBox = 20;
inline constexpr int kDefaultTau = 1;
inline const std::vector<int> kPresetMaxBoxes = {10, 15, 20, 30, 40};
inline const std::vector<int> kDefaultDilationOrders = {5, 10, 15, 20, 30};

// Least squares of ln(count) against ln(1/ratio); returns (sign * slope, r2).
// Samples with count <= 0 are dropped; fewer than 3 usable samples, a ratio
// outside (0, 1), or identical ratios throw std::invalid_argument.
std::pair<double, double> fit_dimension(const std::vector<ScaleSample>& samples, int sign);

// Grid occupancy over the given box sides (each in [2, M/2]).
FractalSignature box_counting(const BinaryImage& bin, const std::vector<int>& scales);

// Occupancy with a per-box density floor: a box counts iff it holds at least
// tau black pixels. Scales are all integers in [2, max_box].
FractalSignature cdb(const BinaryImage& bin, int max_box = kDefaultMaxBox, int tau = kDefaultTau);

// Gray-axis box counting: per box, spans of gray boxes of height s*G/M
// between the cell's min and max intensity.
FractalSignature dbc(const GrayImage& img, int max_box = kDefaultMaxBox);

// Dilation with discrete Euclidean disks of radius k; D is 2 minus the slope
// of ln(area) against ln(k).
FractalSignature dilation_dimension(const BinaryImage& bin,
                                    const std::vector<int>& orders = kDefaultDilationOrders);

}  // namespace hdix
