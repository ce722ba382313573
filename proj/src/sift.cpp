// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hdix/sift.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "hdix/kernels.h"

namespace hdix::sift {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

constexpr int kOrientationBins = 36;
constexpr double kPeakKeep = 0.8;        // orientation peaks kept relative to the max
constexpr int kMaxRefineSteps = 5;
constexpr int kMinPyramidSide = 8;       // smallest octave still scanned for extrema
constexpr double kOrientationSigmaFactor = 1.5;
constexpr int kDescWidth = 4;            // spatial cells per axis
constexpr int kDescBins = 8;             // orientation bins per cell
constexpr int kDescSamples = 16;         // sample grid per axis

FloatImage upsample2x(const FloatImage& src) {
  FloatImage out;
  out.width = src.width * 2;
  out.height = src.height * 2;
  out.data.resize(out.pixel_count());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out.height; ++y) {
    const double sy = y * 0.5;
    const int y0 = std::min(int(sy), src.height - 1);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double fy = sy - y0;
    for (int x = 0; x < out.width; ++x) {
      const double sx = x * 0.5;
      const int x0 = std::min(int(sx), src.width - 1);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double fx = sx - x0;
      const double top = src.at(x0, y0) * (1 - fx) + src.at(x1, y0) * fx;
      const double bot = src.at(x0, y1) * (1 - fx) + src.at(x1, y1) * fx;
      out.at(x, y) = float(top * (1 - fy) + bot * fy);
    }
  }
  return out;
}

FloatImage downsample2x(const FloatImage& src) {
  FloatImage out;
  out.width = std::max(1, src.width / 2);
  out.height = std::max(1, src.height / 2);
  out.data.resize(out.pixel_count());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = src.at(2 * x, 2 * y);
  return out;
}

FloatImage subtract(const FloatImage& a, const FloatImage& b) {
  FloatImage out;
  out.width = a.width;
  out.height = a.height;
  out.data.resize(out.pixel_count());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < std::int64_t(out.data.size()); ++i)
    out.data[std::size_t(i)] = a.data[std::size_t(i)] - b.data[std::size_t(i)];
  return out;
}

struct Pyramid {
  std::vector<std::vector<FloatImage>> gauss;  // [octave][level], levels = s + 3
  std::vector<std::vector<FloatImage>> dog;    // [octave][level], levels = s + 2
  double pixel_scale = 1.0;  // input pixels per octave-0 pixel (0.5 when upsampled)
};

Pyramid build_pyramid(FloatImage base, const ScaleSpaceConfig& cfg, int octaves) {
  const int s = cfg.intervals_per_octave;
  const double k = std::pow(2.0, 1.0 / s);

  Pyramid pyr;
  pyr.gauss.resize(std::size_t(octaves));
  pyr.dog.resize(std::size_t(octaves));
  for (int o = 0; o < octaves; ++o) {
    auto& levels = pyr.gauss[std::size_t(o)];
    levels.reserve(std::size_t(s) + 3);
    levels.push_back(o == 0 ? std::move(base)
                            : downsample2x(pyr.gauss[std::size_t(o) - 1][std::size_t(s)]));
    for (int i = 1; i < s + 3; ++i) {
      const double prev = cfg.base_sigma * std::pow(k, i - 1);
      const double next = cfg.base_sigma * std::pow(k, i);
      const double inc = std::sqrt(next * next - prev * prev);
      levels.push_back(kernels::gaussian_blur(levels.back(), inc));
    }
    auto& diffs = pyr.dog[std::size_t(o)];
    diffs.reserve(std::size_t(s) + 2);
    for (int i = 0; i < s + 2; ++i)
      diffs.push_back(subtract(levels[std::size_t(i) + 1], levels[std::size_t(i)]));
  }
  return pyr;
}

struct Candidate {
  int octave = 0, interval = 0, row = 0, col = 0;
};

bool is_extremum(const std::vector<FloatImage>& dog, int i, int r, int c) {
  const float v = dog[std::size_t(i)].at(c, r);
  bool is_max = true, is_min = true;
  for (int di = -1; di <= 1 && (is_max || is_min); ++di) {
    const FloatImage& layer = dog[std::size_t(i + di)];
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        if (di == 0 && dr == 0 && dc == 0) continue;
        const float n = layer.at(c + dc, r + dr);
        if (n >= v) is_max = false;
        if (n <= v) is_min = false;
      }
  }
  return is_max || is_min;
}

struct Refined {
  bool ok = false;
  int interval = 0, row = 0, col = 0;
  double ox = 0, oy = 0, os = 0;  // sub-pixel offsets along col, row, interval
  double value = 0;               // interpolated DoG value
};

// Solves H * off = -g by Cramer's rule; false when H is singular.
bool solve3(const double h[3][3], const double g[3], double off[3]) {
  const double det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
                     h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
                     h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
  if (std::abs(det) < 1e-12) return false;
  const double b[3] = {-g[0], -g[1], -g[2]};
  off[0] = (b[0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
            h[0][1] * (b[1] * h[2][2] - h[1][2] * b[2]) +
            h[0][2] * (b[1] * h[2][1] - h[1][1] * b[2])) /
           det;
  off[1] = (h[0][0] * (b[1] * h[2][2] - h[1][2] * b[2]) -
            b[0] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
            h[0][2] * (h[1][0] * b[2] - b[1] * h[2][0])) /
           det;
  off[2] = (h[0][0] * (h[1][1] * b[2] - b[1] * h[2][1]) -
            h[0][1] * (h[1][0] * b[2] - b[1] * h[2][0]) +
            b[0] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])) /
           det;
  return true;
}

Refined refine(const std::vector<FloatImage>& dog, int interval, int row, int col,
               int max_interval) {
  Refined out;
  int i = interval, r = row, c = col;
  for (int step = 0; step < kMaxRefineSteps; ++step) {
    const FloatImage& d = dog[std::size_t(i)];
    const FloatImage& dp = dog[std::size_t(i) + 1];
    const FloatImage& dm = dog[std::size_t(i) - 1];

    const double g[3] = {0.5 * (d.at(c + 1, r) - d.at(c - 1, r)),
                         0.5 * (d.at(c, r + 1) - d.at(c, r - 1)),
                         0.5 * (dp.at(c, r) - dm.at(c, r))};
    const double v = d.at(c, r);
    double h[3][3];
    h[0][0] = d.at(c + 1, r) + d.at(c - 1, r) - 2 * v;
    h[1][1] = d.at(c, r + 1) + d.at(c, r - 1) - 2 * v;
    h[2][2] = dp.at(c, r) + dm.at(c, r) - 2 * v;
    h[0][1] = h[1][0] =
        0.25 * (d.at(c + 1, r + 1) - d.at(c - 1, r + 1) - d.at(c + 1, r - 1) + d.at(c - 1, r - 1));
    h[0][2] = h[2][0] =
        0.25 * (dp.at(c + 1, r) - dp.at(c - 1, r) - dm.at(c + 1, r) + dm.at(c - 1, r));
    h[1][2] = h[2][1] =
        0.25 * (dp.at(c, r + 1) - dp.at(c, r - 1) - dm.at(c, r + 1) + dm.at(c, r - 1));

    double off[3];
    if (!solve3(h, g, off)) return out;

    if (std::abs(off[0]) <= 0.5 && std::abs(off[1]) <= 0.5 && std::abs(off[2]) <= 0.5) {
      out.ok = true;
      out.interval = i;
      out.row = r;
      out.col = c;
      out.ox = off[0];
      out.oy = off[1];
      out.os = off[2];
      out.value = v + 0.5 * (g[0] * off[0] + g[1] * off[1] + g[2] * off[2]);
      return out;
    }

    // Move at most one lattice step per axis toward the estimated extremum.
    c += off[0] > 0.5 ? 1 : (off[0] < -0.5 ? -1 : 0);
    r += off[1] > 0.5 ? 1 : (off[1] < -0.5 ? -1 : 0);
    i += off[2] > 0.5 ? 1 : (off[2] < -0.5 ? -1 : 0);
    if (i < 1 || i > max_interval || c < 1 || c >= d.width - 1 || r < 1 || r >= d.height - 1)
      return out;
  }
  return out;
}

bool passes_edge_test(const FloatImage& d, int r, int c, double edge_ratio) {
  const double v = d.at(c, r);
  const double dxx = d.at(c + 1, r) + d.at(c - 1, r) - 2 * v;
  const double dyy = d.at(c, r + 1) + d.at(c, r - 1) - 2 * v;
  const double dxy =
      0.25 * (d.at(c + 1, r + 1) - d.at(c - 1, r + 1) - d.at(c + 1, r - 1) + d.at(c - 1, r - 1));
  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  if (det <= 0) return false;
  return tr * tr * edge_ratio < det * (edge_ratio + 1) * (edge_ratio + 1);
}

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a = 0;
  return a;
}

// Peak orientations of the 36-bin gradient histogram around (x, y).
std::vector<double> dominant_orientations(const GradientImage& grad, double x, double y,
                                          double sigma_oct) {
  const double sigma_w = kOrientationSigmaFactor * sigma_oct;
  const int radius = std::max(1, int(std::lround(3.0 * sigma_w)));
  const int cx = int(std::lround(x));
  const int cy = int(std::lround(y));
  const int w = grad.dx.width, h = grad.dx.height;

  double hist[kOrientationBins] = {};
  for (int dy = -radius; dy <= radius; ++dy) {
    const int py = cy + dy;
    if (py < 0 || py >= h) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int px = cx + dx;
      if (px < 0 || px >= w) continue;
      const double gx = grad.dx.at(px, py);
      const double gy = grad.dy.at(px, py);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag <= 0) continue;
      const double fx = px - x, fy = py - y;
      const double weight = std::exp(-(fx * fx + fy * fy) / (2 * sigma_w * sigma_w));
      const double angle = wrap_angle(std::atan2(gy, gx));
      int bin = int(angle / kTwoPi * kOrientationBins);
      if (bin >= kOrientationBins) bin = kOrientationBins - 1;
      hist[bin] += mag * weight;
    }
  }

  // Two passes of circular moving average stabilize the peaks.
  for (int pass = 0; pass < 2; ++pass) {
    double smooth[kOrientationBins];
    for (int b = 0; b < kOrientationBins; ++b) {
      const double prev = hist[(b + kOrientationBins - 1) % kOrientationBins];
      const double next = hist[(b + 1) % kOrientationBins];
      smooth[b] = (prev + hist[b] + next) / 3.0;
    }
    std::copy(smooth, smooth + kOrientationBins, hist);
  }

  double peak = 0;
  for (double v : hist) peak = std::max(peak, v);
  std::vector<double> out;
  if (peak <= 0) return out;

  for (int b = 0; b < kOrientationBins; ++b) {
    const double left = hist[(b + kOrientationBins - 1) % kOrientationBins];
    const double right = hist[(b + 1) % kOrientationBins];
    if (hist[b] <= left || hist[b] <= right || hist[b] < kPeakKeep * peak) continue;
    const double denom = left - 2 * hist[b] + right;
    const double shift = std::abs(denom) < 1e-12 ? 0.0 : 0.5 * (left - right) / denom;
    out.push_back(wrap_angle((b + 0.5 + shift) * kTwoPi / kOrientationBins));
  }
  return out;
}

struct OrientedKeypoint {
  Keypoint kp;
  Descriptor desc;
};

}  // namespace

GradientImage gradients(const FloatImage& img) {
  GradientImage g;
  g.dx.width = g.dy.width = img.width;
  g.dx.height = g.dy.height = img.height;
  g.dx.data.assign(img.pixel_count(), 0.0f);
  g.dy.data.assign(img.pixel_count(), 0.0f);
#pragma omp parallel for schedule(static)
  for (int y = 1; y < img.height - 1; ++y)
    for (int x = 1; x < img.width - 1; ++x) {
      g.dx.at(x, y) = 0.5f * (img.at(x + 1, y) - img.at(x - 1, y));
      g.dy.at(x, y) = 0.5f * (img.at(x, y + 1) - img.at(x, y - 1));
    }
  return g;
}

Descriptor describe(const GradientImage& grad, double x, double y, double sigma,
                    double orientation) {
  const int w = grad.dx.width, h = grad.dx.height;
  const double cos_t = std::cos(orientation);
  const double sin_t = std::sin(orientation);
  const double half = kDescSamples / 2.0;          // 8 sample units
  const double gauss_denom = 2.0 * half * half;    // Gaussian sigma = half the window

  std::array<double, kDescriptorSize> raw{};
  for (int sv = 0; sv < kDescSamples; ++sv) {
    const double v = sv - (kDescSamples - 1) / 2.0;
    for (int su = 0; su < kDescSamples; ++su) {
      const double u = su - (kDescSamples - 1) / 2.0;
      const double px = x + sigma * (cos_t * u - sin_t * v);
      const double py = y + sigma * (sin_t * u + cos_t * v);

      const int x0 = int(std::floor(px));
      const int y0 = int(std::floor(py));
      if (x0 < 0 || y0 < 0 || x0 + 1 >= w || y0 + 1 >= h) continue;  // clipped sample
      const double fx = px - x0, fy = py - y0;
      const auto lerp2 = [&](const FloatImage& im) {
        const double top = im.at(x0, y0) * (1 - fx) + im.at(x0 + 1, y0) * fx;
        const double bot = im.at(x0, y0 + 1) * (1 - fx) + im.at(x0 + 1, y0 + 1) * fx;
        return top * (1 - fy) + bot * fy;
      };
      const double gx = lerp2(grad.dx);
      const double gy = lerp2(grad.dy);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag <= 0) continue;

      const double weight = std::exp(-(u * u + v * v) / gauss_denom);
      const double angle = wrap_angle(std::atan2(gy, gx) - orientation);

      // Trilinear spread over (cell u, cell v, orientation bin).
      const double cu = u / kDescWidth + (kDescWidth - 1) / 2.0;
      const double cv = v / kDescWidth + (kDescWidth - 1) / 2.0;
      const double ob = angle / kTwoPi * kDescBins;
      const int cu0 = int(std::floor(cu));
      const int cv0 = int(std::floor(cv));
      const int ob0 = int(std::floor(ob)) % kDescBins;
      const double fu = cu - cu0, fv = cv - cv0, fo = ob - std::floor(ob);

      for (int du = 0; du <= 1; ++du) {
        const int ui = cu0 + du;
        if (ui < 0 || ui >= kDescWidth) continue;
        const double wu = du ? fu : 1 - fu;
        for (int dv = 0; dv <= 1; ++dv) {
          const int vi = cv0 + dv;
          if (vi < 0 || vi >= kDescWidth) continue;
          const double wv = dv ? fv : 1 - fv;
          for (int dob = 0; dob <= 1; ++dob) {
            const int oi = (ob0 + dob) % kDescBins;
            const double wo = dob ? fo : 1 - fo;
            raw[std::size_t((vi * kDescWidth + ui) * kDescBins + oi)] +=
                mag * weight * wu * wv * wo;
          }
        }
      }
    }
  }
  return finalize_descriptor(raw);
}

Descriptor finalize_descriptor(const std::array<double, kDescriptorSize>& raw) {
  Descriptor out{};
  double norm_sq = 0;
  for (double v : raw) norm_sq += v * v;
  if (norm_sq < 1e-24) return out;  // no gradient mass: zero descriptor

  const double inv = 1.0 / std::sqrt(norm_sq);
  std::array<double, kDescriptorSize> clamped;
  double norm2_sq = 0;
  for (int i = 0; i < kDescriptorSize; ++i) {
    clamped[std::size_t(i)] = std::min(raw[std::size_t(i)] * inv, kDescriptorClamp);
    norm2_sq += clamped[std::size_t(i)] * clamped[std::size_t(i)];
  }
  const double inv2 = 1.0 / std::sqrt(norm2_sq);
  for (int i = 0; i < kDescriptorSize; ++i)
    out[std::size_t(i)] = float(clamped[std::size_t(i)] * inv2);
  return out;
}

KeypointSet detect(const GrayImage& img, const ScaleSpaceConfig& cfg,
                   const DetectThresholds& thresholds) {
  if (img.width < 16 || img.height < 16)
    throw std::invalid_argument("image must be at least 16x16");
  if (cfg.intervals_per_octave < 1)
    throw std::invalid_argument("intervals per octave must be >= 1");

  const double assumed = cfg.assumed_blur * (cfg.upsample_first ? 2.0 : 1.0);
  if (cfg.base_sigma <= assumed)
    throw std::invalid_argument("base sigma must exceed the assumed input blur");

  FloatImage base = to_float(img);
  if (cfg.upsample_first) base = upsample2x(base);
  base = kernels::gaussian_blur(base, std::sqrt(cfg.base_sigma * cfg.base_sigma -
                                                assumed * assumed));

  int octaves = cfg.octaves > 0
                    ? cfg.octaves
                    : int(std::floor(std::log2(double(img.min_side())))) - 3;
  octaves = std::max(1, octaves);
  const int base_side = std::min(base.width, base.height);
  while (octaves > 1 && (base_side >> (octaves - 1)) < kMinPyramidSide) --octaves;

  const int s = cfg.intervals_per_octave;
  Pyramid pyr = build_pyramid(std::move(base), cfg, octaves);
  pyr.pixel_scale = cfg.upsample_first ? 0.5 : 1.0;

  std::vector<OrientedKeypoint> all;
  for (int o = 0; o < octaves; ++o) {
    const auto& dog = pyr.dog[std::size_t(o)];
    const int w = dog[0].width, hgt = dog[0].height;
    if (w < 3 || hgt < 3) continue;

    // Gradients of the Gaussian levels that carry keypoints (intervals 1..s).
    std::vector<GradientImage> grads(std::size_t(s) + 1);
    for (int i = 1; i <= s; ++i)
      grads[std::size_t(i)] = gradients(pyr.gauss[std::size_t(o)][std::size_t(i)]);

    std::vector<Candidate> candidates;
    for (int i = 1; i <= s; ++i) {
      std::vector<std::vector<Candidate>> per_row;
      per_row.resize(std::size_t(hgt));
#pragma omp parallel for schedule(static)
      for (int r = 1; r < hgt - 1; ++r)
        for (int c = 1; c < w - 1; ++c)
          if (is_extremum(dog, i, r, c)) per_row[std::size_t(r)].push_back({o, i, r, c});
      for (auto& row : per_row)
        candidates.insert(candidates.end(), row.begin(), row.end());
    }

    std::vector<std::vector<OrientedKeypoint>> slots(candidates.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ci = 0; ci < std::int64_t(candidates.size()); ++ci) {
      const Candidate cand = candidates[std::size_t(ci)];
      const Refined ref = refine(dog, cand.interval, cand.row, cand.col, s);
      if (!ref.ok) continue;
      if (std::abs(ref.value) < thresholds.contrast) continue;
      if (!passes_edge_test(dog[std::size_t(ref.interval)], ref.row, ref.col,
                            thresholds.edge_ratio))
        continue;

      const double pix = pyr.pixel_scale * double(1 << o);
      const double x_oct = ref.col + ref.ox;
      const double y_oct = ref.row + ref.oy;
      const double sigma_oct =
          cfg.base_sigma * std::pow(2.0, (ref.interval + ref.os) / double(s));

      const GradientImage& grad = grads[std::size_t(ref.interval)];
      for (double theta : dominant_orientations(grad, x_oct, y_oct, sigma_oct)) {
        OrientedKeypoint okp;
        okp.kp.x = float(std::clamp(x_oct * pix, 0.0, img.width - 1.0));
        okp.kp.y = float(std::clamp(y_oct * pix, 0.0, img.height - 1.0));
        okp.kp.sigma = float(sigma_oct * pix);
        okp.kp.orientation = float(theta);
        okp.kp.response = float(std::abs(ref.value));
        okp.kp.octave = o;
        okp.kp.row = ref.row;
        okp.kp.col = ref.col;
        okp.kp.interval = ref.interval;
        okp.desc = describe(grad, x_oct, y_oct, sigma_oct, theta);
        slots[std::size_t(ci)].push_back(std::move(okp));
      }
    }
    for (auto& slot : slots) all.insert(all.end(), slot.begin(), slot.end());
  }

  std::sort(all.begin(), all.end(), [](const OrientedKeypoint& a, const OrientedKeypoint& b) {
    if (a.kp.octave != b.kp.octave) return a.kp.octave < b.kp.octave;
    if (a.kp.row != b.kp.row) return a.kp.row < b.kp.row;
    if (a.kp.col != b.kp.col) return a.kp.col < b.kp.col;
    if (a.kp.orientation != b.kp.orientation) return a.kp.orientation < b.kp.orientation;
    return a.kp.interval < b.kp.interval;
  });

  KeypointSet set;
  set.keypoints.reserve(all.size());
  set.descriptors.reserve(all.size());
  for (auto& okp : all) {
    set.keypoints.push_back(okp.kp);
    set.descriptors.push_back(okp.desc);
  }
  return set;
}

std::vector<Match> match(const KeypointSet& a, const KeypointSet& b, const MatchRule& rule) {
  std::vector<Match> out;
  if (a.empty() || b.empty()) return out;
  if (rule.kind == MatchRule::Kind::kRatio && b.size() < 2)
    return out;  // no second neighbor: ratio undefined, reject all

  const auto hits = kernels::nn2_search(a.descriptors.data()->data(), a.size(),
                                        b.descriptors.data()->data(), b.size(), kDescriptorSize);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const kernels::Nn2Hit& hit = hits[i];
    if (hit.best < 0) continue;
    bool accept = false;
    if (rule.kind == MatchRule::Kind::kRatio) {
      accept = hit.d1_sq < rule.ratio * rule.ratio * hit.d2_sq;
    } else {
      accept = hit.d1_sq < rule.max_distance * rule.max_distance;
    }
    if (accept) out.push_back({int(i), hit.best, std::sqrt(hit.d1_sq)});
  }
  return out;
}

void write_keypoints(std::ostream& os, const KeypointSet& set) {
  os << set.size() << " " << kDescriptorSize << "\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Keypoint& kp = set.keypoints[i];
    os << kp.x << " " << kp.y << " " << kp.sigma << " " << kp.orientation;
    for (float v : set.descriptors[i]) os << " " << v;
    os << "\n";
  }
}

}  // namespace hdix::sift
