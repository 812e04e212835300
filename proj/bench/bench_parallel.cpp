// Wall-clock comparison of the OpenMP paths against single-threaded runs.
// Not wired into ctest; build and run it by hand when touching the parallel
// code. The parallel Monte Carlo is documented to agree bit-for-bit with the
// serial sweep, so that is asserted here as well — a success line that hides
// a numeric drift would make the timing meaningless.
//
//   bamlab_bench [mc_samples] [sigma_stages]

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bamlab/approx.hpp"
#include "bamlab/model.hpp"
#include "bamlab/verify.hpp"

using namespace bamlab;
using Clock = std::chrono::steady_clock;

namespace {

double secs(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  uint64_t samples = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4000000ULL;
  int sigma_stages = argc > 2 ? std::atoi(argv[2]) : 12;

#ifdef _OPENMP
  int threads = omp_get_max_threads();
  std::printf("OpenMP enabled, %d threads\n", threads);
#else
  std::printf("OpenMP disabled; every run below is single-threaded\n");
#endif

  // Monte Carlo over the two-stage heavy-tailed example: block-parallel vs
  // the serial reference, which must agree exactly.
  Instance heavy = example1_instance(std::exp(3.0));
  LambdaBam heavy_bam = example1_bam(std::exp(3.0));

  auto t0 = Clock::now();
  McResult serial = monte_carlo_serial(heavy_bam, heavy, 42, samples);
  double t_serial = secs(t0);

  t0 = Clock::now();
  McResult parallel = monte_carlo(heavy_bam, heavy, 42, samples);
  double t_parallel = secs(t0);

  std::printf("monte_carlo, %llu samples: serial %.3fs, parallel %.3fs (x%.2f)\n",
              static_cast<unsigned long long>(samples), t_serial, t_parallel,
              t_parallel > 0.0 ? t_serial / t_parallel : 0.0);
  std::printf("  revenue %.9f +- %.9f, utility %.9f +- %.9f\n", parallel.revenue_mean,
              parallel.revenue_stderr, parallel.utility_mean, parallel.utility_stderr);
  if (serial.revenue_mean != parallel.revenue_mean ||
      serial.utility_mean != parallel.utility_mean ||
      serial.revenue_stderr != parallel.revenue_stderr) {
    std::printf("MISMATCH: parallel Monte Carlo differs from the serial reference\n");
    return 1;
  }

  // Deterministic sweep over all 2^T spend patterns; the candidates are
  // independent, so the loop parallelizes trivially.
  Instance sweep;
  for (int t = 0; t < sigma_stages; ++t)
    sweep.stages.push_back(StageDistribution::one_item({1.0, 2.0}, {0.6, 0.4}));

#ifdef _OPENMP
  omp_set_num_threads(1);
  t0 = Clock::now();
  BestDeterministicResult one = best_deterministic(sweep);
  double t_one = secs(t0);
  omp_set_num_threads(threads);
  t0 = Clock::now();
  BestDeterministicResult many = best_deterministic(sweep);
  double t_many = secs(t0);
  std::printf("sigma sweep, %d stages (%lld candidates): 1 thread %.3fs, %d threads %.3fs (x%.2f)\n",
              sigma_stages, 1LL << sigma_stages, t_one, threads, t_many,
              t_many > 0.0 ? t_one / t_many : 0.0);
  if (one.revenue != many.revenue || one.sigma != many.sigma) {
    std::printf("MISMATCH: sigma sweep depends on the thread count\n");
    return 1;
  }
  std::printf("  best revenue %.6f\n", many.revenue);
#else
  t0 = Clock::now();
  BestDeterministicResult best = best_deterministic(sweep);
  std::printf("sigma sweep, %d stages (%lld candidates): %.3fs, best revenue %.6f\n",
              sigma_stages, 1LL << sigma_stages, secs(t0), best.revenue);
#endif

  return 0;
}
