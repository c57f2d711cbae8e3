#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace qtopo::kernels {

using cplx = std::complex<double>;

// Execution policy for the amplitude kernels. Every kernel has a serial
// reference implementation and an OpenMP variant; Auto switches to the
// parallel path once the amplitude count crosses kParallelThreshold.
enum class Exec { Serial, Parallel, Auto };

inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 12;

Exec default_exec() noexcept;
void set_default_exec(Exec e) noexcept;

bool use_parallel(Exec e, std::size_t amp_count) noexcept;

// Applies a real 2x2 matrix [[u00,u01],[u10,u11]] to qubit `target` of a
// register with `num_qubits` qubits. Qubit 0 is the most significant bit
// of the basis index.
void apply_1q_serial(cplx* amps, int num_qubits, int target,
                     double u00, double u01, double u10, double u11);
void apply_1q_omp(cplx* amps, int num_qubits, int target,
                  double u00, double u01, double u10, double u11);
void apply_1q(cplx* amps, int num_qubits, int target,
              double u00, double u01, double u10, double u11,
              Exec exec = Exec::Auto);

// CZ on the (unordered) qubit pair {a, b}: negates amplitudes whose basis
// index has both qubits set.
void apply_cz_serial(cplx* amps, int num_qubits, int qubit_a, int qubit_b);
void apply_cz_omp(cplx* amps, int num_qubits, int qubit_a, int qubit_b);
void apply_cz(cplx* amps, int num_qubits, int qubit_a, int qubit_b,
              Exec exec = Exec::Auto);

// Permutes the computational basis of the qubit block
// [block_start, block_start + block_qubits): basis state s of the block is
// mapped to perm[s], identically on all other qubits. perm must be a
// bijection on [0, 2^block_qubits).
void apply_block_permutation_serial(cplx* amps, int num_qubits, int block_start,
                                    int block_qubits,
                                    const std::vector<std::uint64_t>& perm,
                                    std::vector<cplx>& scratch);
void apply_block_permutation_omp(cplx* amps, int num_qubits, int block_start,
                                 int block_qubits,
                                 const std::vector<std::uint64_t>& perm,
                                 std::vector<cplx>& scratch);
void apply_block_permutation(cplx* amps, int num_qubits, int block_start,
                             int block_qubits,
                             const std::vector<std::uint64_t>& perm,
                             std::vector<cplx>& scratch, Exec exec = Exec::Auto);

// y <- M x for the dense row-major real block matrix M (dim x dim) applied to
// each of `num_blocks` consecutive complex blocks, with per-block scale
// coeffs[blk]:  y[blk] = coeffs-weighted action. Used by the block operator.
// Here M varies per block, so the caller passes a callback-free flat layout:
// mats points at num_blocks matrices of dim*dim doubles each.
void block_matvec_serial(const double* mats, const cplx* x, cplx* y,
                         std::size_t num_blocks, std::size_t dim);
void block_matvec_omp(const double* mats, const cplx* x, cplx* y,
                      std::size_t num_blocks, std::size_t dim);
void block_matvec(const double* mats, const cplx* x, cplx* y,
                  std::size_t num_blocks, std::size_t dim,
                  Exec exec = Exec::Auto);

// Per-block quadratic forms Re(<x_blk| M_blk |x_blk>), written to out[blk].
void block_quadratic_serial(const double* mats, const cplx* x, double* out,
                            std::size_t num_blocks, std::size_t dim);
void block_quadratic_omp(const double* mats, const cplx* x, double* out,
                         std::size_t num_blocks, std::size_t dim);
void block_quadratic(const double* mats, const cplx* x, double* out,
                     std::size_t num_blocks, std::size_t dim,
                     Exec exec = Exec::Auto);

// |amps[i]|^2 into probs[i].
void probabilities_serial(const cplx* amps, double* probs, std::size_t count);
void probabilities_omp(const cplx* amps, double* probs, std::size_t count);
void probabilities(const cplx* amps, double* probs, std::size_t count,
                   Exec exec = Exec::Auto);

// Deterministic chunked reductions: the summation order is fixed by the
// chunk grid, not by the scheduler, so serial and parallel runs agree and
// repeated runs are bit-identical for a fixed thread count.
double sum_norm_sq(const cplx* amps, std::size_t count, Exec exec = Exec::Auto);
cplx inner_product(const cplx* lhs, const cplx* rhs, std::size_t count,
                   Exec exec = Exec::Auto);

}  // namespace qtopo::kernels
