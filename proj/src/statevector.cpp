#include "qtopo/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qtopo {

namespace {

void check_qubit(int q, int num_qubits, const char* what) {
  if (q < 0 || q >= num_qubits) {
    throw std::out_of_range(std::string(what) + ": qubit index " + std::to_string(q) +
                            " out of range for " + std::to_string(num_qubits) + " qubits");
  }
}

}  // namespace

double StateVector::norm() const {
  return std::sqrt(kernels::sum_norm_sq(amps.data(), amps.size()));
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amps.size());
  kernels::probabilities(amps.data(), p.data(), amps.size());
  return p;
}

Gate Gate::ry(int target, double angle) {
  Gate g;
  g.kind = Kind::RY;
  g.target = target;
  g.angle = angle;
  return g;
}

Gate Gate::x(int target) {
  Gate g;
  g.kind = Kind::X;
  g.target = target;
  return g;
}

Gate Gate::h(int target) {
  Gate g;
  g.kind = Kind::H;
  g.target = target;
  return g;
}

Gate Gate::cz(int a, int b) {
  if (a == b) throw std::invalid_argument("cz: qubits must be distinct");
  Gate g;
  g.kind = Kind::CZ;
  g.target = a;
  g.partner = b;
  return g;
}

Gate Gate::permute_basis(int block_start, int block_qubits,
                         std::vector<std::uint64_t> perm) {
  const std::size_t dim = std::size_t{1} << block_qubits;
  if (perm.size() != dim) {
    throw std::invalid_argument("permute_basis: permutation size must be 2^block_qubits");
  }
  std::vector<bool> seen(dim, false);
  for (std::uint64_t v : perm) {
    if (v >= dim || seen[v]) {
      throw std::invalid_argument("permute_basis: map is not a bijection on the block");
    }
    seen[v] = true;
  }
  Gate g;
  g.kind = Kind::PermuteBasis;
  g.block_start = block_start;
  g.block_qubits = block_qubits;
  g.perm = std::move(perm);
  return g;
}

Gate Gate::adjoint() const {
  switch (kind) {
    case Kind::RY: {
      return ry(target, -angle);
    }
    case Kind::X:
    case Kind::H:
    case Kind::CZ:
      return *this;  // self-inverse
    case Kind::PermuteBasis: {
      std::vector<std::uint64_t> inv(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
      Gate g = *this;
      g.perm = std::move(inv);
      return g;
    }
  }
  throw std::logic_error("unreachable gate kind");
}

Circuit& Circuit::add(Gate g) {
  gates.push_back(std::move(g));
  return *this;
}

Circuit& Circuit::add(const Circuit& other) {
  if (other.num_qubits != num_qubits) {
    throw std::invalid_argument("circuit composition: qubit counts differ");
  }
  gates.insert(gates.end(), other.gates.begin(), other.gates.end());
  return *this;
}

Circuit Circuit::adjoint() const {
  Circuit adj(num_qubits);
  adj.gates.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
    adj.gates.push_back(it->adjoint());
  }
  return adj;
}

void apply(StateVector& state, const Gate& gate, kernels::Exec exec) {
  const int k = state.num_qubits;
  cplx* a = state.amps.data();
  switch (gate.kind) {
    case Gate::Kind::RY: {
      check_qubit(gate.target, k, "RY");
      const double c = std::cos(gate.angle / 2.0);
      const double s = std::sin(gate.angle / 2.0);
      kernels::apply_1q(a, k, gate.target, c, -s, s, c, exec);
      return;
    }
    case Gate::Kind::X: {
      check_qubit(gate.target, k, "X");
      kernels::apply_1q(a, k, gate.target, 0.0, 1.0, 1.0, 0.0, exec);
      return;
    }
    case Gate::Kind::H: {
      check_qubit(gate.target, k, "H");
      const double r = 1.0 / std::sqrt(2.0);
      kernels::apply_1q(a, k, gate.target, r, r, r, -r, exec);
      return;
    }
    case Gate::Kind::CZ: {
      check_qubit(gate.target, k, "CZ");
      check_qubit(gate.partner, k, "CZ");
      kernels::apply_cz(a, k, gate.target, gate.partner, exec);
      return;
    }
    case Gate::Kind::PermuteBasis: {
      check_qubit(gate.block_start, k, "PermuteBasis");
      check_qubit(gate.block_start + gate.block_qubits - 1, k, "PermuteBasis");
      thread_local std::vector<cplx> scratch;
      kernels::apply_block_permutation(a, k, gate.block_start, gate.block_qubits,
                                       gate.perm, scratch, exec);
      return;
    }
  }
  throw std::logic_error("unreachable gate kind");
}

void apply(StateVector& state, const Circuit& circuit, kernels::Exec exec) {
  if (circuit.num_qubits != state.num_qubits) {
    throw std::invalid_argument("apply: circuit arity does not match state");
  }
  for (const Gate& g : circuit.gates) apply(state, g, exec);
}

double expectation(const StateVector& state, const Eigen::MatrixXcd& observable) {
  const auto dim = static_cast<Eigen::Index>(state.dim());
  if (observable.rows() != dim || observable.cols() != dim) {
    throw std::invalid_argument("expectation: observable dimension mismatch");
  }
  if (!observable.isApprox(observable.adjoint(), 1e-12)) {
    throw std::invalid_argument("expectation: observable is not Hermitian");
  }
  Eigen::Map<const Eigen::VectorXcd> v(state.amps.data(), dim);
  const cplx value = v.dot(observable * v);
  if (std::abs(value.imag()) > 1e-10) {
    throw std::runtime_error("expectation: imaginary residue above 1e-10");
  }
  return value.real();
}

cplx inner(const StateVector& lhs, const StateVector& rhs) {
  if (lhs.num_qubits != rhs.num_qubits) {
    throw std::invalid_argument("inner: qubit counts differ");
  }
  return kernels::inner_product(lhs.amps.data(), rhs.amps.data(), lhs.amps.size());
}

std::map<std::uint64_t, std::uint64_t> sample(const StateVector& state,
                                              std::uint64_t shots,
                                              std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("sample: shots must be >= 1");
  const std::vector<double> probs = state.probabilities();
  double total = 0.0;
  for (double p : probs) total += p;
  if (total <= 0.0) throw std::runtime_error("sample: state has zero norm");

  std::mt19937_64 rng(seed);
  std::map<std::uint64_t, std::uint64_t> counts;

  if (shots * 4 >= probs.size()) {
    // Multinomial via conditional binomials: category i receives
    // Binomial(shots_left, p_i / mass_left) draws. Identical in distribution
    // to per-shot draws and far cheaper once shots outnumber categories.
    std::uint64_t shots_left = shots;
    double mass_left = total;
    for (std::uint64_t i = 0; i < probs.size() && shots_left > 0; ++i) {
      if (probs[i] <= 0.0) continue;
      std::uint64_t c;
      if (probs[i] >= mass_left) {
        c = shots_left;
      } else {
        std::binomial_distribution<std::uint64_t> bin(shots_left, probs[i] / mass_left);
        c = bin(rng);
      }
      if (c > 0) counts[i] = c;
      shots_left -= c;
      mass_left -= probs[i];
    }
    // Round-off may leave a few shots unassigned; give them to the mode.
    if (shots_left > 0) {
      std::uint64_t mode = 0;
      for (std::uint64_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[mode]) mode = i;
      }
      counts[mode] += shots_left;
    }
    return counts;
  }

  // Few shots over a large register: per-shot inverse-CDF draws.
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  std::uniform_real_distribution<double> unif(0.0, total);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = unif(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::uint64_t idx = static_cast<std::uint64_t>(it - cdf.begin());
    if (idx >= cdf.size()) idx = cdf.size() - 1;
    ++counts[idx];
  }
  return counts;
}

std::string basis_label(std::uint64_t index, int num_qubits) {
  std::string s(static_cast<std::size_t>(num_qubits), '0');
  for (int q = 0; q < num_qubits; ++q) {
    if ((index >> (num_qubits - 1 - q)) & 1ULL) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c, std::uint64_t d) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  h = mix(h ^ d);
  return h;
}

}  // namespace qtopo
