// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hdix/kernels.h"

#include <algorithm>
#include <cmath>

namespace hdix::kernels {

IntegralImage integrate(const BinaryImage& bin) {
  IntegralImage sat;
  sat.width = bin.width;
  sat.height = bin.height;
  const std::size_t w = std::size_t(bin.width) + 1;
  sat.sum.assign(w * (bin.height + 1), 0);
  for (int y = 0; y < bin.height; ++y) {
    std::uint64_t row = 0;
    for (int x = 0; x < bin.width; ++x) {
      row += bin.at(x, y) ? 1 : 0;
      sat.sum[(y + 1) * w + (x + 1)] = sat.sum[y * w + (x + 1)] + row;
    }
  }
  return sat;
}

namespace {

inline std::uint64_t occupied_in_box_row(const IntegralImage& sat, int m_side, int s, int tau,
                                         int by) {
  const int y0 = by * s;
  const int y1 = std::min(y0 + s, m_side);
  const int nbx = (m_side + s - 1) / s;
  std::uint64_t hits = 0;
  for (int bx = 0; bx < nbx; ++bx) {
    const int x0 = bx * s;
    const int x1 = std::min(x0 + s, m_side);
    if (sat.box_sum(x0, y0, x1, y1) >= std::uint64_t(tau)) ++hits;
  }
  return hits;
}

inline std::uint64_t gray_span_in_box_row(const GrayImage& img, int m_side, int s, double box_h,
                                          int by) {
  const int y0 = by * s;
  const int y1 = std::min(y0 + s, m_side);
  const int nbx = (m_side + s - 1) / s;
  std::uint64_t total = 0;
  for (int bx = 0; bx < nbx; ++bx) {
    const int x0 = bx * s;
    const int x1 = std::min(x0 + s, m_side);
    std::uint8_t lo = 255, hi = 0;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const std::uint8_t v = img.at(x, y);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    const std::int64_t l = std::int64_t(std::floor(hi / box_h));
    const std::int64_t k = std::int64_t(std::floor(lo / box_h));
    total += std::uint64_t(l - k + 1);
  }
  return total;
}

std::vector<float> make_kernel(double sigma, int radius) {
  std::vector<float> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
    k[i + radius] = float(v);
    sum += v;
  }
  for (float& v : k) v = float(v / sum);
  return k;
}

inline void blur_row(const FloatImage& src, FloatImage& dst, const std::vector<float>& k,
                     int radius, int y) {
  for (int x = 0; x < src.width; ++x) {
    double acc = 0;
    for (int i = -radius; i <= radius; ++i) {
      const int xi = std::clamp(x + i, 0, src.width - 1);
      acc += double(k[i + radius]) * src.at(xi, y);
    }
    dst.at(x, y) = float(acc);
  }
}

inline void blur_col_row(const FloatImage& src, FloatImage& dst, const std::vector<float>& k,
                         int radius, int y) {
  for (int x = 0; x < src.width; ++x) {
    double acc = 0;
    for (int i = -radius; i <= radius; ++i) {
      const int yi = std::clamp(y + i, 0, src.height - 1);
      acc += double(k[i + radius]) * src.at(x, yi);
    }
    dst.at(x, y) = float(acc);
  }
}

// One-dimensional squared distance transform (lower envelope of parabolas).
void dt_1d(const double* f, int n, double* d, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kDistanceInf;
  z[1] = kDistanceInf;
  for (int q = 1; q < n; ++q) {
    double s = 0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kDistanceInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = double(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

template <bool Parallel>
std::vector<double> sq_edt_impl(const BinaryImage& bin) {
  const int w = bin.width, h = bin.height;
  std::vector<double> dist(std::size_t(w) * h);

  // Column pass over the 0 / "far" indicator.
#pragma omp parallel for schedule(static) if (Parallel)
  for (int x = 0; x < w; ++x) {
    std::vector<double> f(h), d(h), z(h + 1);
    std::vector<int> v(h);
    for (int y = 0; y < h; ++y) f[y] = bin.at(x, y) ? 0.0 : kDistanceInf;
    dt_1d(f.data(), h, d.data(), v.data(), z.data());
    for (int y = 0; y < h; ++y) dist[std::size_t(y) * w + x] = d[y];
  }

  // Row pass over the column distances.
  std::vector<double> out(std::size_t(w) * h);
#pragma omp parallel for schedule(static) if (Parallel)
  for (int y = 0; y < h; ++y) {
    std::vector<double> d(w), z(w + 1);
    std::vector<int> v(w);
    dt_1d(dist.data() + std::size_t(y) * w, w, d.data(), v.data(), z.data());
    for (int x = 0; x < w; ++x) out[std::size_t(y) * w + x] = d[x];
  }
  return out;
}

inline void nn2_one(const float* a, const float* b, std::size_t nb, int dim, Nn2Hit& hit) {
  double best1 = std::numeric_limits<double>::infinity();
  double best2 = best1;
  int best = -1;
  for (std::size_t j = 0; j < nb; ++j) {
    const float* q = b + j * dim;
    double d = 0;
    for (int t = 0; t < dim; ++t) {
      const double diff = double(a[t]) - double(q[t]);
      d += diff * diff;
    }
    if (d < best1) {
      best2 = best1;
      best1 = d;
      best = int(j);
    } else if (d < best2) {
      best2 = d;
    }
  }
  hit.best = best;
  hit.d1_sq = best1;
  hit.d2_sq = best2;
}

}  // namespace

std::uint64_t count_occupied_boxes(const IntegralImage& sat, int m_side, int s, int tau) {
  const int nby = (m_side + s - 1) / s;
  std::uint64_t total = 0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (int by = 0; by < nby; ++by) total += occupied_in_box_row(sat, m_side, s, tau, by);
  return total;
}

std::uint64_t count_occupied_boxes_serial(const IntegralImage& sat, int m_side, int s, int tau) {
  const int nby = (m_side + s - 1) / s;
  std::uint64_t total = 0;
  for (int by = 0; by < nby; ++by) total += occupied_in_box_row(sat, m_side, s, tau, by);
  return total;
}

std::uint64_t gray_span_sum(const GrayImage& img, int m_side, int s, double box_h) {
  const int nby = (m_side + s - 1) / s;
  std::uint64_t total = 0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (int by = 0; by < nby; ++by) total += gray_span_in_box_row(img, m_side, s, box_h, by);
  return total;
}

std::uint64_t gray_span_sum_serial(const GrayImage& img, int m_side, int s, double box_h) {
  const int nby = (m_side + s - 1) / s;
  std::uint64_t total = 0;
  for (int by = 0; by < nby; ++by) total += gray_span_in_box_row(img, m_side, s, box_h, by);
  return total;
}

FloatImage gaussian_blur(const FloatImage& src, double sigma) {
  if (sigma <= 0) return src;
  const int radius = std::max(1, int(std::ceil(4.0 * sigma)));
  const std::vector<float> k = make_kernel(sigma, radius);
  FloatImage tmp = src, dst = src;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < src.height; ++y) blur_row(src, tmp, k, radius, y);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < src.height; ++y) blur_col_row(tmp, dst, k, radius, y);
  return dst;
}

FloatImage gaussian_blur_serial(const FloatImage& src, double sigma) {
  if (sigma <= 0) return src;
  const int radius = std::max(1, int(std::ceil(4.0 * sigma)));
  const std::vector<float> k = make_kernel(sigma, radius);
  FloatImage tmp = src, dst = src;
  for (int y = 0; y < src.height; ++y) blur_row(src, tmp, k, radius, y);
  for (int y = 0; y < src.height; ++y) blur_col_row(tmp, dst, k, radius, y);
  return dst;
}

std::vector<double> squared_distance_transform(const BinaryImage& bin) {
  return sq_edt_impl<true>(bin);
}

std::vector<double> squared_distance_transform_serial(const BinaryImage& bin) {
  return sq_edt_impl<false>(bin);
}

std::vector<Nn2Hit> nn2_search(const float* a, std::size_t na, const float* b, std::size_t nb,
                               int dim) {
  std::vector<Nn2Hit> hits(na);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < std::int64_t(na); ++i)
    nn2_one(a + std::size_t(i) * dim, b, nb, dim, hits[std::size_t(i)]);
  return hits;
}

std::vector<Nn2Hit> nn2_search_serial(const float* a, std::size_t na, const float* b,
                                      std::size_t nb, int dim) {
  std::vector<Nn2Hit> hits(na);
  for (std::size_t i = 0; i < na; ++i) nn2_one(a + i * dim, b, nb, dim, hits[i]);
  return hits;
}

}  // namespace hdix::kernels
