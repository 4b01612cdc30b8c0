#include "tripartite/jc_equivalence.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "tripartite/errors.hpp"

namespace tripartite {

namespace {

Eigen::MatrixXd lowering(int cutoff) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Eigen::MatrixXd number(int cutoff) {
  return Eigen::VectorXd::LinSpaced(cutoff + 1, 0.0, cutoff).asDiagonal();
}

}  // namespace

bool PseudospinOps::interior(int n_p, int n_b) const {
  return n_p >= 0 && n_b >= 0 && n_p + n_b <= std::min(pump_cutoff, phonon_cutoff);
}

PseudospinOps build_pseudospin(const TruncationPolicy& policy) {
  policy.validate();
  PseudospinOps ops;
  ops.pump_cutoff = policy.pump_cutoff;
  ops.phonon_cutoff = policy.phonon_cutoff;
  const Eigen::MatrixXd ip = Eigen::MatrixXd::Identity(policy.pump_cutoff + 1, policy.pump_cutoff + 1);
  const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(policy.phonon_cutoff + 1, policy.phonon_cutoff + 1);
  const Eigen::MatrixXd ap = lowering(policy.pump_cutoff);
  const Eigen::MatrixXd b = lowering(policy.phonon_cutoff);
  const Eigen::MatrixXd np = Eigen::kroneckerProduct(number(policy.pump_cutoff), ib);
  const Eigen::MatrixXd nb = Eigen::kroneckerProduct(ip, number(policy.phonon_cutoff));
  ops.n_hat = 0.5 * (np + nb);
  ops.s_z = 0.5 * (np - nb);
  ops.s_minus = Eigen::kroneckerProduct(ap, Eigen::MatrixXd(b.transpose()));
  ops.s_plus = Eigen::kroneckerProduct(Eigen::MatrixXd(ap.transpose()), b);
  return ops;
}

Eigen::MatrixXd casimir(const PseudospinOps& ops) {
  return ops.s_z * ops.s_z - ops.s_z + ops.s_plus * ops.s_minus;
}

double AlgebraReport::max_commutator_deviation() const {
  return std::max({n_sz, sz_splus, sz_sminus, splus_sminus, adjoint});
}

double AlgebraReport::max_casimir_deviation() const {
  double worst = 0.0;
  for (const auto& s : sectors) worst = std::max(worst, s.max_deviation);
  return worst;
}

AlgebraReport verify_algebra(const PseudospinOps& ops) {
  std::vector<int> inner;
  for (int p = 0; p <= ops.pump_cutoff; ++p) {
    for (int b = 0; b <= ops.phonon_cutoff; ++b) {
      if (ops.interior(p, b)) inner.push_back(ops.index(p, b));
    }
  }
  // Deviation restricted to columns on interior kets (rows unrestricted).
  auto dev = [&](const Eigen::MatrixXd& m) {
    double worst = 0.0;
    for (int c : inner) worst = std::max(worst, m.col(c).cwiseAbs().maxCoeff());
    return worst;
  };
  AlgebraReport r;
  r.interior_kets = inner.size();
  r.n_sz = dev(ops.n_hat * ops.s_z - ops.s_z * ops.n_hat);
  r.sz_splus = dev(ops.s_z * ops.s_plus - ops.s_plus * ops.s_z - ops.s_plus);
  r.sz_sminus = dev(ops.s_z * ops.s_minus - ops.s_minus * ops.s_z + ops.s_minus);
  r.splus_sminus = dev(ops.s_plus * ops.s_minus - ops.s_minus * ops.s_plus - 2.0 * ops.s_z);
  r.adjoint = (ops.s_plus - ops.s_minus.transpose()).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd s2 = casimir(ops);
  for (int twice_n = 0; twice_n <= std::min(ops.pump_cutoff, ops.phonon_cutoff); ++twice_n) {
    std::vector<int> kets;
    for (int p = 0; p <= twice_n; ++p) kets.push_back(ops.index(p, twice_n - p));
    const int d = static_cast<int>(kets.size());
    Eigen::MatrixXd block(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) block(i, j) = s2(kets[static_cast<std::size_t>(i)], kets[static_cast<std::size_t>(j)]);
    }
    // The sector must be invariant: nothing leaks to kets outside it.
    double leak = 0.0;
    for (int c : kets) {
      double outside = s2.col(c).cwiseAbs().sum();
      for (int row : kets) outside -= std::abs(s2(row, c));
      leak = std::max(leak, outside);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    const double n = 0.5 * twice_n;
    SectorSpectrum spec{twice_n, n * (n + 1.0), 0.0};
    spec.max_deviation = std::max(leak, (es.eigenvalues().array() - spec.expected).abs().maxCoeff());
    r.sectors.push_back(spec);
  }
  return r;
}

double pseudospin_hamiltonian_deviation(const TruncationPolicy& policy) {
  policy.validate();
  const Eigen::MatrixXd ap = lowering(policy.pump_cutoff);
  const Eigen::MatrixXd as = lowering(policy.stokes_cutoff);
  const Eigen::MatrixXd b = lowering(policy.phonon_cutoff);

  // H_int in (pump, Stokes, phonon) order.
  const Eigen::MatrixXd forward = Eigen::kroneckerProduct(
      ap, Eigen::MatrixXd(Eigen::kroneckerProduct(Eigen::MatrixXd(as.transpose()), Eigen::MatrixXd(b.transpose()))));
  const Eigen::MatrixXd h_int = forward + forward.transpose();

  // Pseudospin form in (pump, phonon, Stokes) order, then permuted.
  const PseudospinOps ops = build_pseudospin(policy);
  const Eigen::MatrixXd spin = Eigen::kroneckerProduct(ops.s_minus, Eigen::MatrixXd(as.transpose())) +
                               Eigen::kroneckerProduct(ops.s_plus, as);
  const int np = policy.pump_cutoff + 1, ns = policy.stokes_cutoff + 1, nb = policy.phonon_cutoff + 1;
  auto from_spin_order = [&](int p, int s, int bb) { return (p * nb + bb) * ns + s; };
  double worst = 0.0;
  for (int p = 0; p < np; ++p) {
    for (int s = 0; s < ns; ++s) {
      for (int bb = 0; bb < nb; ++bb) {
        const int row = (p * ns + s) * nb + bb;
        for (int p2 = 0; p2 < np; ++p2) {
          for (int s2 = 0; s2 < ns; ++s2) {
            for (int b2 = 0; b2 < nb; ++b2) {
              const int col = (p2 * ns + s2) * nb + b2;
              worst = std::max(worst, std::abs(h_int(row, col) -
                                               spin(from_spin_order(p, s, bb), from_spin_order(p2, s2, b2))));
            }
          }
        }
      }
    }
  }
  return worst;
}

Eigen::Vector2d spin_half_rabi(int stokes_photons, double gt) {
  if (stokes_photons < 0) throw DomainError("Stokes photon number must be non-negative");
  TruncationPolicy pol;
  pol.pump_cutoff = 1;
  pol.phonon_cutoff = 1;
  pol.stokes_cutoff = 0;
  const PseudospinOps ops = build_pseudospin(pol);
  // <-1/2, m+1| S_- a_S^+ |+1/2, m>
  const double coupling = ops.s_minus(ops.index(0, 1), ops.index(1, 0)) *
                          std::sqrt(static_cast<double>(stokes_photons) + 1.0);
  Eigen::Matrix2d h;
  h << 0.0, coupling, coupling, 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
  Eigen::Vector2cd c = es.eigenvectors().transpose().cast<Complex>() * Eigen::Vector2cd(1.0, 0.0);
  for (int j = 0; j < 2; ++j) c(j) *= std::polar(1.0, -es.eigenvalues()(j) * gt);
  const Eigen::Vector2cd psi = es.eigenvectors().cast<Complex>() * c;
  return {std::norm(psi(0)), std::norm(psi(1))};
}

}  // namespace tripartite
