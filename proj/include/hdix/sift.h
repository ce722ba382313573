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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdix/raster.h"

namespace hdix::sift {

inline constexpr int kDescriptorSize = 128;  // 4x4 spatial cells x 8 orientation bins

struct ScaleSpaceConfig {
  int octaves = 0;  // 0 = auto: floor(log2(min side)) - 3
  int intervals_per_octave = 3;
  double base_sigma = 1.6;
  double assumed_blur = 0.5;   // blur already present in the input
  bool upsample_first = false;  // start from a 2x bilinear upsampling
};

struct DetectThresholds {
  double contrast = 0.03;   // on [0,1] intensities, against |refined DoG|
  double edge_ratio = 10.0;  // principal curvature ratio limit
};

struct Keypoint {
  float x = 0, y = 0;     // sub-pixel coordinates in the input image
  float sigma = 0;        // absolute scale
  float orientation = 0;  // radians in [0, 2*pi)
  float response = 0;     // |DoG| at the refined extremum
  // Detection lattice; defines the stable output ordering.
  int octave = 0;
  int row = 0;
  int col = 0;
  int interval = 0;
};

using Descriptor = std::array<float, kDescriptorSize>;

struct KeypointSet {
  std::string image_id;
  std::vector<Keypoint> keypoints;
  std::vector<Descriptor> descriptors;  // one per keypoint

  std::size_t size() const { return keypoints.size(); }
  bool empty() const { return keypoints.empty(); }
};

/// Central-difference gradients, zero on the one-pixel border.
struct GradientImage {
  FloatImage dx;
  FloatImage dy;
};

GradientImage gradients(const FloatImage& img);

// Full detection: Gaussian pyramid, DoG extrema, sub-pixel refinement,
// contrast and edge rejection, orientation assignment, descriptors.
// Output is sorted by (octave, row, col, orientation), interval last.
// A constant image yields an empty set; images under 16x16 throw.
KeypointSet detect(const GrayImage& img, const ScaleSpaceConfig& cfg = {},
                   const DetectThresholds& thresholds = {});

// Descriptor at an oriented point of a gradient image, in that image's
// pixel coordinates. A 16x16 sample grid scaled by sigma and rotated by
// orientation feeds 4x4 cells of 8 orientation bins with trilinear
// interpolation and Gaussian weighting; samples falling outside the image
// are clipped, never an error.
Descriptor describe(const GradientImage& grad, double x, double y, double sigma,
                    double orientation);

// Normalize to unit length, clamp components at kDescriptorClamp, renormalize.
inline constexpr double kDescriptorClamp = 0.2;
Descriptor finalize_descriptor(const std::array<double, kDescriptorSize>& raw);

struct MatchRule {
  enum class Kind { kRatio, kAbsolute };
  Kind kind = Kind::kRatio;
  double ratio = 0.8;         // accept iff d1 < ratio * d2
  double max_distance = 0.4;  // kAbsolute: accept iff d1 < max_distance
};

struct Match {
  int index_a = 0;
  int index_b = 0;
  double distance = 0;
};

// Directed brute-force matching a -> b under Euclidean nearest neighbors.
// Under the ratio rule a single-element b rejects everything (no second
// neighbor to compare against).
std::vector<Match> match(const KeypointSet& a, const KeypointSet& b, const MatchRule& rule = {});

// Text dump: a "<count> 128" header, then per keypoint one line of
// "x y sigma orientation" followed by the 128 descriptor components.
void write_keypoints(std::ostream& os, const KeypointSet& set);

}  // namespace hdix::sift
