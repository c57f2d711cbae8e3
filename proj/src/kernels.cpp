#include "qtopo/kernels.hpp"

#include <algorithm>
#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qtopo::kernels {

namespace {

std::atomic<Exec> g_default_exec{Exec::Auto};

inline std::int64_t bit_of(int num_qubits, int qubit) {
  // Qubit 0 is the most significant bit of the basis index.
  return std::int64_t{1} << (num_qubits - 1 - qubit);
}

}  // namespace

Exec default_exec() noexcept { return g_default_exec.load(); }
void set_default_exec(Exec e) noexcept { g_default_exec.store(e); }

bool use_parallel(Exec e, std::size_t amp_count) noexcept {
  if (e == Exec::Auto) e = g_default_exec.load();
  switch (e) {
    case Exec::Serial: return false;
    case Exec::Parallel: return true;
    default: break;
  }
#ifdef _OPENMP
  return amp_count >= kParallelThreshold;
#else
  (void)amp_count;
  return false;
#endif
}

// ---------------------------------------------------------------------------
// single-qubit gate

namespace {

inline void apply_1q_body(cplx* amps, std::int64_t i0, std::int64_t i1,
                          double u00, double u01, double u10, double u11) {
  const cplx a0 = amps[i0];
  const cplx a1 = amps[i1];
  amps[i0] = u00 * a0 + u01 * a1;
  amps[i1] = u10 * a0 + u11 * a1;
}

}  // namespace

void apply_1q_serial(cplx* amps, int num_qubits, int target,
                     double u00, double u01, double u10, double u11) {
  const std::int64_t mask = bit_of(num_qubits, target);
  const std::int64_t lo_mask = mask - 1;
  const std::int64_t hi_mask = ~lo_mask;
  const std::int64_t half = std::int64_t{1} << (num_qubits - 1);
  for (std::int64_t i = 0; i < half; ++i) {
    const std::int64_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
    apply_1q_body(amps, i0, i0 | mask, u00, u01, u10, u11);
  }
}

void apply_1q_omp(cplx* amps, int num_qubits, int target,
                  double u00, double u01, double u10, double u11) {
  const std::int64_t mask = bit_of(num_qubits, target);
  const std::int64_t lo_mask = mask - 1;
  const std::int64_t hi_mask = ~lo_mask;
  const std::int64_t half = std::int64_t{1} << (num_qubits - 1);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < half; ++i) {
    const std::int64_t i0 = ((i & hi_mask) << 1) | (i & lo_mask);
    apply_1q_body(amps, i0, i0 | mask, u00, u01, u10, u11);
  }
}

void apply_1q(cplx* amps, int num_qubits, int target,
              double u00, double u01, double u10, double u11, Exec exec) {
  const std::size_t count = std::size_t{1} << num_qubits;
  if (use_parallel(exec, count)) {
    apply_1q_omp(amps, num_qubits, target, u00, u01, u10, u11);
  } else {
    apply_1q_serial(amps, num_qubits, target, u00, u01, u10, u11);
  }
}

// ---------------------------------------------------------------------------
// CZ

void apply_cz_serial(cplx* amps, int num_qubits, int qubit_a, int qubit_b) {
  const std::int64_t both = bit_of(num_qubits, qubit_a) | bit_of(num_qubits, qubit_b);
  const std::int64_t dim = std::int64_t{1} << num_qubits;
  for (std::int64_t i = 0; i < dim; ++i) {
    if ((i & both) == both) amps[i] = -amps[i];
  }
}

void apply_cz_omp(cplx* amps, int num_qubits, int qubit_a, int qubit_b) {
  const std::int64_t both = bit_of(num_qubits, qubit_a) | bit_of(num_qubits, qubit_b);
  const std::int64_t dim = std::int64_t{1} << num_qubits;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < dim; ++i) {
    if ((i & both) == both) amps[i] = -amps[i];
  }
}

void apply_cz(cplx* amps, int num_qubits, int qubit_a, int qubit_b, Exec exec) {
  const std::size_t count = std::size_t{1} << num_qubits;
  if (use_parallel(exec, count)) {
    apply_cz_omp(amps, num_qubits, qubit_a, qubit_b);
  } else {
    apply_cz_serial(amps, num_qubits, qubit_a, qubit_b);
  }
}

// ---------------------------------------------------------------------------
// basis permutation on a contiguous qubit block

namespace {

struct BlockLayout {
  std::int64_t low_bits;   // qubits below the block (less significant)
  std::int64_t low_mask;
  std::int64_t block_mask;
  std::int64_t dim;
};

inline BlockLayout block_layout(int num_qubits, int block_start, int block_qubits) {
  BlockLayout l;
  l.low_bits = num_qubits - block_start - block_qubits;
  l.low_mask = (std::int64_t{1} << l.low_bits) - 1;
  l.block_mask = ((std::int64_t{1} << block_qubits) - 1) << l.low_bits;
  l.dim = std::int64_t{1} << num_qubits;
  return l;
}

}  // namespace

void apply_block_permutation_serial(cplx* amps, int num_qubits, int block_start,
                                    int block_qubits,
                                    const std::vector<std::uint64_t>& perm,
                                    std::vector<cplx>& scratch) {
  const BlockLayout l = block_layout(num_qubits, block_start, block_qubits);
  scratch.resize(static_cast<std::size_t>(l.dim));
  for (std::int64_t i = 0; i < l.dim; ++i) {
    const std::int64_t sub = (i & l.block_mask) >> l.low_bits;
    const std::int64_t j =
        (i & ~l.block_mask) | (static_cast<std::int64_t>(perm[sub]) << l.low_bits);
    scratch[j] = amps[i];
  }
  for (std::int64_t i = 0; i < l.dim; ++i) amps[i] = scratch[i];
}

void apply_block_permutation_omp(cplx* amps, int num_qubits, int block_start,
                                 int block_qubits,
                                 const std::vector<std::uint64_t>& perm,
                                 std::vector<cplx>& scratch) {
  const BlockLayout l = block_layout(num_qubits, block_start, block_qubits);
  scratch.resize(static_cast<std::size_t>(l.dim));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < l.dim; ++i) {
    const std::int64_t sub = (i & l.block_mask) >> l.low_bits;
    const std::int64_t j =
        (i & ~l.block_mask) | (static_cast<std::int64_t>(perm[sub]) << l.low_bits);
    scratch[j] = amps[i];
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < l.dim; ++i) amps[i] = scratch[i];
}

void apply_block_permutation(cplx* amps, int num_qubits, int block_start,
                             int block_qubits,
                             const std::vector<std::uint64_t>& perm,
                             std::vector<cplx>& scratch, Exec exec) {
  const std::size_t count = std::size_t{1} << num_qubits;
  if (use_parallel(exec, count)) {
    apply_block_permutation_omp(amps, num_qubits, block_start, block_qubits, perm, scratch);
  } else {
    apply_block_permutation_serial(amps, num_qubits, block_start, block_qubits, perm, scratch);
  }
}

// ---------------------------------------------------------------------------
// blockwise dense matrix action and quadratic forms

namespace {

inline void block_matvec_one(const double* m, const cplx* x, cplx* y, std::size_t dim) {
  for (std::size_t r = 0; r < dim; ++r) {
    cplx acc{0.0, 0.0};
    const double* row = m + r * dim;
    for (std::size_t c = 0; c < dim; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

inline double block_quadratic_one(const double* m, const cplx* x, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t r = 0; r < dim; ++r) {
    cplx row_acc{0.0, 0.0};
    const double* row = m + r * dim;
    for (std::size_t c = 0; c < dim; ++c) row_acc += row[c] * x[c];
    acc += std::real(std::conj(x[r]) * row_acc);
  }
  return acc;
}

}  // namespace

void block_matvec_serial(const double* mats, const cplx* x, cplx* y,
                         std::size_t num_blocks, std::size_t dim) {
  for (std::size_t b = 0; b < num_blocks; ++b) {
    block_matvec_one(mats + b * dim * dim, x + b * dim, y + b * dim, dim);
  }
}

void block_matvec_omp(const double* mats, const cplx* x, cplx* y,
                      std::size_t num_blocks, std::size_t dim) {
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(num_blocks); ++b) {
    block_matvec_one(mats + b * dim * dim, x + b * dim, y + b * dim, dim);
  }
}

void block_matvec(const double* mats, const cplx* x, cplx* y,
                  std::size_t num_blocks, std::size_t dim, Exec exec) {
  if (use_parallel(exec, num_blocks * dim)) {
    block_matvec_omp(mats, x, y, num_blocks, dim);
  } else {
    block_matvec_serial(mats, x, y, num_blocks, dim);
  }
}

void block_quadratic_serial(const double* mats, const cplx* x, double* out,
                            std::size_t num_blocks, std::size_t dim) {
  for (std::size_t b = 0; b < num_blocks; ++b) {
    out[b] = block_quadratic_one(mats + b * dim * dim, x + b * dim, dim);
  }
}

void block_quadratic_omp(const double* mats, const cplx* x, double* out,
                         std::size_t num_blocks, std::size_t dim) {
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(num_blocks); ++b) {
    out[b] = block_quadratic_one(mats + b * dim * dim, x + b * dim, dim);
  }
}

void block_quadratic(const double* mats, const cplx* x, double* out,
                     std::size_t num_blocks, std::size_t dim, Exec exec) {
  if (use_parallel(exec, num_blocks * dim)) {
    block_quadratic_omp(mats, x, out, num_blocks, dim);
  } else {
    block_quadratic_serial(mats, x, out, num_blocks, dim);
  }
}

// ---------------------------------------------------------------------------
// probabilities and reductions

void probabilities_serial(const cplx* amps, double* probs, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) probs[i] = std::norm(amps[i]);
}

void probabilities_omp(const cplx* amps, double* probs, std::size_t count) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
    probs[i] = std::norm(amps[i]);
  }
}

void probabilities(const cplx* amps, double* probs, std::size_t count, Exec exec) {
  if (use_parallel(exec, count)) {
    probabilities_omp(amps, probs, count);
  } else {
    probabilities_serial(amps, probs, count);
  }
}

namespace {

// Fixed chunk grid so the floating-point summation order is independent of
// the scheduler. Chunk partials are combined in index order.
constexpr std::size_t kReduceChunk = std::size_t{1} << 12;

template <typename T, typename PerChunk>
T chunked_reduce(std::size_t count, bool parallel, PerChunk per_chunk) {
  const std::size_t num_chunks = (count + kReduceChunk - 1) / kReduceChunk;
  if (num_chunks <= 1) return per_chunk(std::size_t{0}, count);
  std::vector<T> partial(num_chunks);
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(num_chunks); ++c) {
      const std::size_t lo = static_cast<std::size_t>(c) * kReduceChunk;
      partial[c] = per_chunk(lo, std::min(lo + kReduceChunk, count));
    }
  } else {
    for (std::size_t c = 0; c < num_chunks; ++c) {
      const std::size_t lo = c * kReduceChunk;
      partial[c] = per_chunk(lo, std::min(lo + kReduceChunk, count));
    }
  }
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

}  // namespace

double sum_norm_sq(const cplx* amps, std::size_t count, Exec exec) {
  return chunked_reduce<double>(count, use_parallel(exec, count),
                                [amps](std::size_t lo, std::size_t hi) {
                                  double s = 0.0;
                                  for (std::size_t i = lo; i < hi; ++i) s += std::norm(amps[i]);
                                  return s;
                                });
}

cplx inner_product(const cplx* lhs, const cplx* rhs, std::size_t count, Exec exec) {
  return chunked_reduce<cplx>(count, use_parallel(exec, count),
                              [lhs, rhs](std::size_t lo, std::size_t hi) {
                                cplx s{0.0, 0.0};
                                for (std::size_t i = lo; i < hi; ++i) {
                                  s += std::conj(lhs[i]) * rhs[i];
                                }
                                return s;
                              });
}

}  // namespace qtopo::kernels
