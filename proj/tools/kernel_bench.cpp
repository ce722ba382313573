// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License. You may
// obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Times every serial/OpenMP kernel pair on a text-like fixture and checks
// that both flavors produce bit-identical output. Exits nonzero on any
// mismatch, so the --quick mode doubles as a ctest smoke test.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "hdix/kernels.h"
#include "hdix/raster.h"

namespace {

using hdix::BinaryImage;
using hdix::FloatImage;
using hdix::GrayImage;
namespace kernels = hdix::kernels;
using Clock = std::chrono::steady_clock;

template <typename Fn>
double best_ms(int reps, Fn&& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = Clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

bool report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-14s %10.3f %12.3f %8.2fx %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "identical" : "MISMATCH");
  return identical;
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;

  const int side = quick ? 128 : 512;
  const int reps = quick ? 1 : 5;
  const std::size_t nn_rows = quick ? 100 : 400;

  hdix::FixtureSpec spec;
  spec.kind = hdix::FixtureSpec::Kind::kRandomTextLike;
  const GrayImage gray = hdix::make_fixture(spec, side);
  const BinaryImage bin = hdix::binarize(gray);
  const FloatImage floats = hdix::to_float(gray);
  const kernels::IntegralImage sat = kernels::integrate(bin);
  const int m = bin.min_side();

  std::printf("threads=%d side=%d reps=%d\n", omp_get_max_threads(), side, reps);
  std::printf("%-14s %10s %12s %9s\n", "kernel", "serial_ms", "parallel_ms", "speedup");

  bool ok = true;

  {
    std::uint64_t a = 0, b = 0;
    const auto serial = [&] {
      a = 0;
      for (int s = 2; s <= 20; ++s) a += kernels::count_occupied_boxes_serial(sat, m, s, 1);
    };
    const auto parallel = [&] {
      b = 0;
      for (int s = 2; s <= 20; ++s) b += kernels::count_occupied_boxes(sat, m, s, 1);
    };
    const double sm = best_ms(reps, serial);
    const double pm = best_ms(reps, parallel);
    ok &= report("boxes", sm, pm, a == b);
  }

  {
    std::uint64_t a = 0, b = 0;
    const auto serial = [&] {
      a = 0;
      for (int s = 2; s <= 20; ++s)
        a += kernels::gray_span_sum_serial(gray, m, s, double(s) * 256 / m);
    };
    const auto parallel = [&] {
      b = 0;
      for (int s = 2; s <= 20; ++s) b += kernels::gray_span_sum(gray, m, s, double(s) * 256 / m);
    };
    const double sm = best_ms(reps, serial);
    const double pm = best_ms(reps, parallel);
    ok &= report("gray_span", sm, pm, a == b);
  }

  {
    FloatImage a, b;
    const double sm = best_ms(reps, [&] { a = kernels::gaussian_blur_serial(floats, 2.0); });
    const double pm = best_ms(reps, [&] { b = kernels::gaussian_blur(floats, 2.0); });
    ok &= report("blur", sm, pm, a.data == b.data);
  }

  {
    std::vector<double> a, b;
    const double sm =
        best_ms(reps, [&] { a = kernels::squared_distance_transform_serial(bin); });
    const double pm = best_ms(reps, [&] { b = kernels::squared_distance_transform(bin); });
    ok &= report("distance", sm, pm, a == b);
  }

  {
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> rows(nn_rows * 128);
    for (float& v : rows) v = dist(rng);

    std::vector<kernels::Nn2Hit> a, b;
    const double sm = best_ms(reps, [&] {
      a = kernels::nn2_search_serial(rows.data(), nn_rows, rows.data(), nn_rows, 128);
    });
    const double pm = best_ms(
        reps, [&] { b = kernels::nn2_search(rows.data(), nn_rows, rows.data(), nn_rows, 128); });
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
      same = a[i].best == b[i].best && a[i].d1_sq == b[i].d1_sq && a[i].d2_sq == b[i].d2_sq;
    ok &= report("nn2", sm, pm, same);
  }

  if (!ok) {
    std::fprintf(stderr, "kernel flavors disagree\n");
    return 1;
  }
  return 0;
}
