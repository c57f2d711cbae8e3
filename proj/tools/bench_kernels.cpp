// Times the serial reference kernels against their OpenMP variants on
// synthetic states. Larger qubit counts than the shipped problems are used so
// the parallel path has something to chew on.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "qtopo/kernels.hpp"

namespace {

using qtopo::kernels::cplx;
using clock_type = std::chrono::steady_clock;

std::vector<cplx> random_state(int num_qubits, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> amps(std::size_t{1} << num_qubits);
  for (cplx& a : amps) a = cplx{gauss(rng), gauss(rng)};
  return amps;
}

template <typename F>
double time_ms(int reps, F&& body) {
  const auto t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) body();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-22s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  int qubits = 20;
  if (argc > 1) qubits = std::atoi(argv[1]);
  const int reps = 5;
  std::printf("kernel benchmark on %d qubits (%d reps per measurement)\n\n", qubits, reps);

  std::vector<cplx> state = random_state(qubits, 7);
  std::vector<cplx> work = state;

  report("apply_1q (RY)",
         time_ms(reps,
                 [&] {
                   qtopo::kernels::apply_1q_serial(work.data(), qubits, qubits / 2, 0.8,
                                                   -0.6, 0.6, 0.8);
                 }),
         time_ms(reps, [&] {
           qtopo::kernels::apply_1q_omp(work.data(), qubits, qubits / 2, 0.8, -0.6, 0.6,
                                        0.8);
         }));

  report("apply_cz",
         time_ms(reps,
                 [&] { qtopo::kernels::apply_cz_serial(work.data(), qubits, 0, qubits - 1); }),
         time_ms(reps,
                 [&] { qtopo::kernels::apply_cz_omp(work.data(), qubits, 0, qubits - 1); }));

  {
    const int block_qubits = 6;
    std::vector<std::uint64_t> perm(std::size_t{1} << block_qubits);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 37 + 11) % perm.size();
    // make it a bijection: 37 is coprime with 64, so it already is
    std::vector<cplx> scratch;
    report("block permutation",
           time_ms(reps,
                   [&] {
                     qtopo::kernels::apply_block_permutation_serial(
                         work.data(), qubits, qubits - block_qubits - 2, block_qubits, perm,
                         scratch);
                   }),
           time_ms(reps, [&] {
             qtopo::kernels::apply_block_permutation_omp(work.data(), qubits,
                                                         qubits - block_qubits - 2,
                                                         block_qubits, perm, scratch);
           }));
  }

  {
    const std::size_t dim = 64;
    const std::size_t blocks = (std::size_t{1} << qubits) / dim;
    std::vector<double> mats(blocks * dim * dim);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& v : mats) v = gauss(rng);
    std::vector<double> out(blocks);
    std::vector<cplx> y(state.size());
    report("block quadratic",
           time_ms(reps,
                   [&] {
                     qtopo::kernels::block_quadratic_serial(mats.data(), state.data(),
                                                            out.data(), blocks, dim);
                   }),
           time_ms(reps, [&] {
             qtopo::kernels::block_quadratic_omp(mats.data(), state.data(), out.data(),
                                                 blocks, dim);
           }));
    report("block matvec",
           time_ms(reps,
                   [&] {
                     qtopo::kernels::block_matvec_serial(mats.data(), state.data(), y.data(),
                                                         blocks, dim);
                   }),
           time_ms(reps, [&] {
             qtopo::kernels::block_matvec_omp(mats.data(), state.data(), y.data(), blocks,
                                              dim);
           }));
  }

  {
    std::vector<double> probs(state.size());
    report("probabilities",
           time_ms(reps,
                   [&] {
                     qtopo::kernels::probabilities_serial(state.data(), probs.data(),
                                                          state.size());
                   }),
           time_ms(reps, [&] {
             qtopo::kernels::probabilities_omp(state.data(), probs.data(), state.size());
           }));
  }

  report("sum_norm_sq",
         time_ms(reps,
                 [&] {
                   (void)qtopo::kernels::sum_norm_sq(state.data(), state.size(),
                                                     qtopo::kernels::Exec::Serial);
                 }),
         time_ms(reps, [&] {
           (void)qtopo::kernels::sum_norm_sq(state.data(), state.size(),
                                             qtopo::kernels::Exec::Parallel);
         }));
  return 0;
}
