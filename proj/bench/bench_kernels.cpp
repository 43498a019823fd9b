// Timing comparison of the OpenMP-parallel kernels against their serial
// reference paths. Build and run: ./copulalab_bench [repeat]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "copulalab/empirical.hpp"
#include "copulalab/fields.hpp"
#include "copulalab/kernels.hpp"
#include "copulalab/parallel.hpp"
#include "copulalab/rng.hpp"

using namespace copulalab;

namespace {

double now_ms() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
             .count() /
         1000.0;
}

struct Row {
  const char* name;
  double serial_ms;
  double parallel_ms;
  double checksum_serial;
  double checksum_parallel;
};

void print_row(const Row& r) {
  std::printf("%-34s %10.1f ms %10.1f ms   x%.2f   %s\n", r.name, r.serial_ms,
              r.parallel_ms, r.serial_ms / r.parallel_ms,
              r.checksum_serial == r.checksum_parallel ? "bit-equal"
                                                       : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeat = argc > 1 ? std::atoi(argv[1]) : 1;
  const int threads = max_threads();
  std::printf("copulalab kernel benchmark (parallel lane: %d threads)\n\n",
              threads);
  std::printf("%-34s %13s %13s %7s\n", "kernel", "serial", "parallel",
              "speedup");

  const CopulaModel model(CopulaFamily::Fgm, 2, {0.5});
  const Grid grid = Grid::regular(2, 41);

  for (int it = 0; it < repeat; ++it) {
    // covariance assembly
    {
      std::vector<std::size_t> active;
      for (std::size_t i = 0; i < grid.size(); ++i) active.push_back(i);
      double t0 = now_ms();
      set_max_threads(1);
      const auto a = assemble_covariance_serial(model, grid, active);
      double t1 = now_ms();
      set_max_threads(threads);
      const auto b = assemble_covariance(model, grid, active);
      double t2 = now_ms();
      print_row({"covariance assembly 1681x1681", t1 - t0, t2 - t1, a.sum(),
                 b.sum()});
    }

    // replicate sweep: sup |A_n| over seeded samples
    {
      const std::size_t reps = 400, n = 4000;
      std::vector<double> cval(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i)
        cval[i] = model.cdf(grid.point(i));
      auto sweep = [&](std::vector<double>& out) {
        parallel_for(reps, [&](std::size_t r) {
          const Sample s = model.sample(n, derive_seed(5, 5, r));
          const auto cn = empirical_copula_on_grid(s, grid);
          double sup = 0.0;
          for (std::size_t i = 0; i < grid.size(); ++i)
            sup = std::fmax(sup, std::fabs(cn[i] - cval[i]));
          out[r] = sup;
        });
      };
      std::vector<double> a(reps), b(reps);
      double t0 = now_ms();
      set_max_threads(1);
      sweep(a);
      double t1 = now_ms();
      set_max_threads(threads);
      sweep(b);
      double t2 = now_ms();
      double ca = 0, cb = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        ca += a[r];
        cb += b[r];
      }
      print_row({"A_n sup sweep, 400 x n=4000", t1 - t0, t2 - t1, ca, cb});
    }

    // corrected-field draws
    {
      const auto factor = build_factor(model, grid);
      const KStarTransform transform(model, grid);
      const std::size_t reps = 800;
      auto sweep = [&](std::vector<double>& out) {
        parallel_for(reps, [&](std::size_t r) {
          const auto f =
              sample_kstar(factor, transform, 1, derive_seed(6, 6, r));
          double sup = 0.0;
          for (double v : f.values) sup = std::fmax(sup, std::fabs(v));
          out[r] = sup;
        });
      };
      std::vector<double> a(reps), b(reps);
      double t0 = now_ms();
      set_max_threads(1);
      sweep(a);
      double t1 = now_ms();
      set_max_threads(threads);
      sweep(b);
      double t2 = now_ms();
      double ca = 0, cb = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        ca += a[r];
        cb += b[r];
      }
      print_row({"K* field draws, 800 x grid 41^2", t1 - t0, t2 - t1, ca, cb});
    }

    // smoothed-copula grid evaluation
    {
      const Sample s = model.sample(4000, 17);
      s.ensure_caches();
      const Kernel kernel = Kernel::quartic();
      const Bandwidth bw{Bandwidth::default_h(4000, 2, 2), 4000, 2, 2};
      const Grid sg = Grid::regular(2, 21);
      auto sweep = [&](std::vector<double>& out) {
        parallel_for(sg.size(), [&](std::size_t i) {
          out[i] = smoothed_copula_quadrature(s, kernel, bw, sg.point(i), 32);
        });
      };
      std::vector<double> a(sg.size()), b(sg.size());
      sweep(a);  // warmup
      double t0 = now_ms();
      set_max_threads(1);
      sweep(a);
      double t1 = now_ms();
      set_max_threads(threads);
      sweep(b);
      double t2 = now_ms();
      double ca = 0, cb = 0;
      for (std::size_t i = 0; i < sg.size(); ++i) {
        ca += a[i];
        cb += b[i];
      }
      print_row({"smoothed copula, 441 pts x n=4000", t1 - t0, t2 - t1, ca, cb});
    }
  }
  set_max_threads(threads);
  return 0;
}
