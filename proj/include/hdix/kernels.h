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
#include <limits>
#include <vector>

#include "hdix/raster.h"

// Data-parallel inner loops, each in an OpenMP flavor (the default used by
// the library) and a serial reference flavor (`*_serial`). The pairs are
// bit-identical by construction: every output element is computed
// independently with the same arithmetic order, and reductions are integer
// sums. Tests assert the equivalence; tools/kernel_bench compares timings.

namespace hdix::kernels {

/// Black-pixel prefix sums; sum has (width + 1) * (height + 1) entries.
struct IntegralImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint64_t> sum;

  // Black count over the half-open box [x0, x1) x [y0, y1).
  std::uint64_t box_sum(int x0, int y0, int x1, int y1) const {
    const std::size_t w = width + 1;
    return sum[std::size_t(y1) * w + x1] - sum[std::size_t(y0) * w + x1] -
           sum[std::size_t(y1) * w + x0] + sum[std::size_t(y0) * w + x0];
  }
};

IntegralImage integrate(const BinaryImage& bin);

// Number of s-sized grid cells over the m_side x m_side top-left crop that
// hold at least tau black pixels. Edge cells are partial.
std::uint64_t count_occupied_boxes(const IntegralImage& sat, int m_side, int s, int tau);
std::uint64_t count_occupied_boxes_serial(const IntegralImage& sat, int m_side, int s, int tau);

// Differential box counting contribution at one scale: the sum over all
// s x s cells of floor(max_gray / box_h) - floor(min_gray / box_h) + 1.
std::uint64_t gray_span_sum(const GrayImage& img, int m_side, int s, double box_h);
std::uint64_t gray_span_sum_serial(const GrayImage& img, int m_side, int s, double box_h);

// Separable Gaussian blur, kernel truncated at 4 sigma, replicated borders.
FloatImage gaussian_blur(const FloatImage& src, double sigma);
FloatImage gaussian_blur_serial(const FloatImage& src, double sigma);

// Exact squared Euclidean distance from each pixel to the nearest black
// pixel (Felzenszwalb-Huttenlocher). Pixels farther than any black pixel
// (an all-white image) hold values >= kDistanceInf.
inline constexpr double kDistanceInf = 1e20;
std::vector<double> squared_distance_transform(const BinaryImage& bin);
std::vector<double> squared_distance_transform_serial(const BinaryImage& bin);

struct Nn2Hit {
  int best = -1;
  double d1_sq = std::numeric_limits<double>::infinity();
  double d2_sq = std::numeric_limits<double>::infinity();
};

// Brute-force two-nearest-neighbor search: for every dim-float row of a,
// the nearest and second-nearest rows of b by Euclidean distance.
std::vector<Nn2Hit> nn2_search(const float* a, std::size_t na, const float* b, std::size_t nb,
                               int dim);
std::vector<Nn2Hit> nn2_search_serial(const float* a, std::size_t na, const float* b,
                                      std::size_t nb, int dim);

}  // namespace hdix::kernels
