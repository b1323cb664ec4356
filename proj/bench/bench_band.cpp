// Serial reference vs parallel band construction.
//
//   bench_band [n] [family]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "../tests/support.hpp"
#include "calib/bands.hpp"

using namespace calib;

namespace {

template <class F>
double time_best(F&& f, int rounds = 3) {
  double best = 1e300;
  for (int r = 0; r < rounds; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

double max_diff(const Band& a, const Band& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isfinite(a.lower[i])) d = std::max(d, std::fabs(a.lower[i] - b.lower[i]));
    if (std::isfinite(a.upper[i])) d = std::max(d, std::fabs(a.upper[i] - b.upper[i]));
  }
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 400;
  const Family f = argc > 2 ? parse_family(argv[2]) : Family::Gamma;
  std::mt19937_64 rng(2024);
  const auto in = testing::random_instance(f, n, rng);
  const PairSet pairs = make_pair_set(PairStrategy::Full, 0.0, in.sample);
  std::printf("family %s, n %zu, |J| %llu\n", std::string(to_string(f)).c_str(), n,
              static_cast<unsigned long long>(pairs.size));

  Band ref, serial, par;
  const double t_ref = time_best([&] { ref = build_band_reference(in.sample, pairs, 0.05); }, 1);
  const double t_memo = time_best([&] {
    QuantileMemo memo;
    serial = build_band(in.sample, pairs, 0.05, &memo);
  });
#ifdef _OPENMP
  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const double t_one = time_best([&] { par = build_band(in.sample, pairs, 0.05); });
  omp_set_num_threads(threads);
#else
  const int threads = 1;
  const double t_one = time_best([&] { par = build_band(in.sample, pairs, 0.05); });
#endif
  const double t_par = time_best([&] { par = build_band(in.sample, pairs, 0.05); });

  std::printf("%-28s %10.4f s\n", "reference double loop", t_ref);
  std::printf("%-28s %10.4f s\n", "sweep, serial with memo", t_memo);
  std::printf("%-28s %10.4f s\n", "sweep, 1 thread", t_one);
  std::printf("%-28s %10.4f s  (%d threads, x%.1f vs 1 thread)\n", "sweep, parallel", t_par,
              threads, t_one / t_par);
  std::printf("max |edge difference| vs reference: %.3g (memo), %.3g (parallel)\n",
              max_diff(ref, serial), max_diff(ref, par));
  return 0;
}
