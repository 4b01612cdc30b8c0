#include "tripartite/subspace_block.hpp"

#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include "tripartite/errors.hpp"
#include "tripartite/tridiagonal.hpp"

namespace tripartite {

Eigen::MatrixXd SubspaceBlock::matrix() const {
  const int d = dimension();
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j + 1 < d; ++j) {
    mat(j, j + 1) = couplings(j);
    mat(j + 1, j) = couplings(j);
  }
  return mat;
}

SubspaceBlock build_chain(int n, int m, int k_lo, int k_hi, double g) {
  if (n < 0) throw DomainError("block index n must be non-negative");
  if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("coupling g must be positive");
  if (k_lo < 0 || k_hi > n || k_lo > k_hi) {
    throw DomainError("chain range [" + std::to_string(k_lo) + "," + std::to_string(k_hi) +
                      "] invalid for n=" + std::to_string(n));
  }
  if (m + k_lo < 0) throw DomainError("chain starts at a negative Stokes number");

  SubspaceBlock block;
  block.n = n;
  block.m = m;
  block.k_lo = k_lo;
  block.k_hi = k_hi;
  block.g = g;

  const int d = block.dimension();
  std::vector<double> diag(static_cast<std::size_t>(d), 0.0);
  std::vector<double> off(static_cast<std::size_t>(d - 1));
  block.couplings.resize(d - 1);
  for (int j = 0; j + 1 < d; ++j) {
    const int k = k_lo + j + 1;
    const double lambda = g * std::sqrt(static_cast<double>(n - k + 1)) *
                          std::sqrt(static_cast<double>(m + k)) * std::sqrt(static_cast<double>(k));
    off[static_cast<std::size_t>(j)] = lambda;
    block.couplings(j) = lambda;
  }
  auto eig = symmetric_tridiagonal_eigen(diag, off);
  block.eigenvalues = std::move(eig.values);
  block.eigenvectors = std::move(eig.vectors);
  return block;
}

SubspaceBlock build_block(int n, int m, double g) {
  if (n < 0 || m < 0) throw DomainError("block indices n, m must be non-negative");
  return build_chain(n, m, 0, n, g);
}

SubspaceBlock build_sector(int n, int m, double g) {
  if (n < 0) throw DomainError("block index n must be non-negative");
  if (m < -n) throw DomainError("sector (n, m) contains no valid kets");
  return build_chain(n, m, std::max(0, -m), n, g);
}

AmplitudeVector amplitudes_at(const SubspaceBlock& block, double t,
                              const Eigen::Ref<const Eigen::VectorXcd>& initial) {
  if (initial.size() != block.dimension()) {
    throw DimensionMismatch("initial vector has dimension " + std::to_string(initial.size()) +
                            ", block has " + std::to_string(block.dimension()));
  }
  AmplitudeVector out{block.n, block.m, t, {}};
  if (t == 0.0) {
    out.values = initial;
    return out;
  }
  const Eigen::VectorXcd projected = block.eigenvectors.transpose().cast<Complex>() * initial;
  Eigen::VectorXcd phased(projected.size());
  for (Eigen::Index j = 0; j < projected.size(); ++j) {
    phased(j) = projected(j) * std::polar(1.0, -block.eigenvalues(j) * t);
  }
  out.values = block.eigenvectors.cast<Complex>() * phased;
  return out;
}

AmplitudeVector amplitudes_at(const SubspaceBlock& block, double t) {
  if (block.k_lo != 0) throw DomainError("vacuum seed requires a chain starting at k = 0");
  Eigen::VectorXcd seed = Eigen::VectorXcd::Zero(block.dimension());
  seed(0) = 1.0;
  return amplitudes_at(block, t, seed);
}

Complex amplitude_oracle_closed_form(int n, int m, int k, double g, double t) {
  if (n < 0 || n > 2) throw DomainError("closed forms are available for n <= 2 only");
  if (k < 0 || k > n) throw DomainError("k must lie in 0..n");
  const double mm = m;
  const Complex i{0.0, 1.0};
  switch (n) {
    case 0:
      return 1.0;
    case 1: {
      const double w = std::sqrt(mm + 1.0) * g * t;
      return k == 0 ? Complex{std::cos(w)} : -i * std::sin(w);
    }
    default: {
      const double w = std::sqrt(4.0 * mm + 6.0) * g * t;
      if (k == 0) return (2.0 + mm + (1.0 + mm) * std::cos(w)) / (3.0 + 2.0 * mm);
      if (k == 1) return -i * std::sqrt((1.0 + mm) / (3.0 + 2.0 * mm)) * std::sin(w);
      const double s = std::sin(std::sqrt(mm + 1.5) * g * t);
      return -2.0 * std::sqrt((1.0 + mm) * (2.0 + mm)) / (3.0 + 2.0 * mm) * s * s;
    }
  }
}

std::shared_ptr<const SubspaceBlock> BlockCache::chain(int n, int m, int k_lo, int k_hi, double g) {
  const Key key{n, m, k_lo, k_hi, std::llround(g * 1e12)};
  {
    std::shared_lock lock(mutex_);
    if (auto it = blocks_.find(key); it != blocks_.end()) return it->second;
  }
  auto built = std::make_shared<const SubspaceBlock>(build_chain(n, m, k_lo, k_hi, g));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = blocks_.emplace(key, std::move(built));
  return it->second;
}

std::size_t BlockCache::size() const {
  std::shared_lock lock(mutex_);
  return blocks_.size();
}

void BlockCache::clear() {
  std::unique_lock lock(mutex_);
  blocks_.clear();
}

BlockCache& default_block_cache() {
  static BlockCache cache;
  return cache;
}

}  // namespace tripartite
