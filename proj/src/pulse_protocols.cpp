#include "tripartite/pulse_protocols.hpp"

#include <cmath>
#include <numbers>

#include "parallel.hpp"
#include "tripartite/errors.hpp"
#include "tripartite/evolution.hpp"

namespace tripartite {

double PulsePlan::duration() const {
  switch (pulse) {
    case Pulse::pi:
      return std::numbers::pi / (2.0 * std::abs(alpha_s));
    case Pulse::pi_over_2:
      return std::numbers::pi / (4.0 * std::abs(alpha_s));
    case Pulse::custom:
      return custom_gt;
  }
  return 0.0;
}

void PulsePlan::validate() const {
  if (std::abs(std::norm(c0) + std::norm(c1) - 1.0) > kUnitaryTolerance) {
    throw DomainError("qubit amplitudes must satisfy |c0|^2 + |c1|^2 = 1");
  }
  if (pulse != Pulse::custom && !(std::abs(alpha_s) > 0.0)) {
    throw DomainError("pulse durations need a nonzero Stokes amplitude");
  }
  if (pulse == Pulse::custom && (!std::isfinite(custom_gt) || custom_gt < 0.0)) {
    throw DomainError("custom pulse duration must be finite and >= 0");
  }
}

TruncationPolicy swap_policy(Complex alpha_s, double tail_mass) {
  TruncationPolicy p;
  p.pump_cutoff = 1;
  p.phonon_cutoff = 1;
  p.stokes_cutoff = required_cutoff(std::norm(alpha_s), tail_mass);
  p.tail_mass_tolerance = tail_mass;
  return p;
}

namespace {

std::vector<Complex> stokes_amplitudes(const PulsePlan& plan, const TruncationPolicy& policy) {
  if (policy.pump_cutoff < 1 || policy.phonon_cutoff < 1) {
    throw CutoffViolation("swap dynamics need pump and phonon cutoffs of at least 1");
  }
  check_truncation({ModeInit::vacuum(), ModeInit::coherent(plan.alpha_s)}, policy);
  return coherent_amplitudes(plan.alpha_s, policy.stokes_cutoff);
}

}  // namespace

TripartiteState swap_initial_state(const PulsePlan& plan, const TruncationPolicy& policy) {
  plan.validate();
  const auto s = stokes_amplitudes(plan, policy);
  TripartiteState shape(policy);
  std::vector<Complex> amps(shape.size());
  for (int m = 0; m <= policy.stokes_cutoff; ++m) {
    amps[shape.offset({0, m, 0})] = plan.c0 * s[static_cast<std::size_t>(m)];
    amps[shape.offset({0, m, 1})] = plan.c1 * s[static_cast<std::size_t>(m)];
  }
  return TripartiteState(policy, std::move(amps));
}

TripartiteState exact_swap_evolution(const PulsePlan& plan, const TruncationPolicy& policy) {
  return evolve_to(swap_initial_state(plan, policy), plan.duration());
}

TripartiteState swap_closed_form(const PulsePlan& plan, const TruncationPolicy& policy) {
  plan.validate();
  const auto s = stokes_amplitudes(plan, policy);
  const double gt = plan.duration();
  const Complex i{0.0, 1.0};
  TripartiteState shape(policy);
  std::vector<Complex> amps(shape.size());
  for (int m = 0; m <= policy.stokes_cutoff; ++m) {
    const Complex sm = s[static_cast<std::size_t>(m)];
    const double w = std::sqrt(static_cast<double>(m)) * gt;
    amps[shape.offset({0, m, 0})] += plan.c0 * sm;
    amps[shape.offset({0, m, 1})] += plan.c1 * std::cos(w) * sm;
    if (m > 0) amps[shape.offset({1, m - 1, 0})] += -i * plan.c1 * std::sin(w) * sm;
  }
  return TripartiteState(policy, std::move(amps));
}

Eigen::MatrixXcd pump_reduced(const TripartiteState& state) {
  const auto& p = state.policy();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(p.pump_cutoff + 1, p.pump_cutoff + 1);
  for (int s = 0; s <= p.stokes_cutoff; ++s) {
    for (int b = 0; b <= p.phonon_cutoff; ++b) {
      for (int a = 0; a <= p.pump_cutoff; ++a) {
        const Complex va = state.at(a, s, b);
        if (va == Complex{}) continue;
        for (int c = 0; c <= p.pump_cutoff; ++c) rho(a, c) += va * std::conj(state.at(c, s, b));
      }
    }
  }
  return rho;
}

Eigen::MatrixXcd pump_phonon_reduced(const TripartiteState& state) {
  const auto& p = state.policy();
  const int nb = p.phonon_cutoff + 1;
  const int dim = (p.pump_cutoff + 1) * nb;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd v(dim);
  for (int s = 0; s <= p.stokes_cutoff; ++s) {
    for (int a = 0; a <= p.pump_cutoff; ++a) {
      for (int b = 0; b < nb; ++b) v(a * nb + b) = state.at(a, s, b);
    }
    rho.noalias() += v * v.adjoint();
  }
  return rho;
}

Eigen::VectorXcd ideal_swapped_pump(const PulsePlan& plan, int pump_dimension) {
  if (pump_dimension < 2) throw DimensionMismatch("pump space must hold levels 0 and 1");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(pump_dimension);
  v(0) = plan.c0;
  v(1) = Complex{0.0, -1.0} * std::polar(1.0, std::arg(plan.alpha_s)) * plan.c1;
  return v;
}

double swap_fidelity(const TripartiteState& state, const PulsePlan& plan) {
  const Eigen::MatrixXcd rho = pump_reduced(state);
  const Eigen::VectorXcd phi = ideal_swapped_pump(plan, static_cast<int>(rho.rows()));
  return phi.dot(rho * phi).real();
}

double swap_fidelity(const PulsePlan& plan) {
  PulsePlan pi_plan = plan;
  pi_plan.pulse = PulsePlan::Pulse::pi;
  const auto state = exact_swap_evolution(pi_plan, swap_policy(plan.alpha_s));
  return swap_fidelity(state, pi_plan);
}

Eigen::VectorXcd ideal_bell_state(Complex alpha_s, int pump_dimension, int phonon_dimension) {
  if (pump_dimension < 2 || phonon_dimension < 2) {
    throw DimensionMismatch("Bell state needs pump and phonon levels 0 and 1");
  }
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(pump_dimension * phonon_dimension);
  const double r = 1.0 / std::numbers::sqrt2;
  v(0 * phonon_dimension + 1) = r;
  v(1 * phonon_dimension + 0) = r * Complex{0.0, -1.0} * std::polar(1.0, std::arg(alpha_s));
  return v;
}

double bell_state_residual(const TripartiteState& state, Complex alpha_s) {
  const Eigen::MatrixXcd rho = pump_phonon_reduced(state);
  const auto& p = state.policy();
  const Eigen::VectorXcd bell = ideal_bell_state(alpha_s, p.pump_cutoff + 1, p.phonon_cutoff + 1);
  return 1.0 - bell.dot(rho * bell).real();
}

double bell_state_residual(Complex alpha_s) {
  PulsePlan plan;
  plan.alpha_s = alpha_s;
  plan.c0 = 0.0;
  plan.c1 = 1.0;
  plan.pulse = PulsePlan::Pulse::pi_over_2;
  const auto state = exact_swap_evolution(plan, swap_policy(alpha_s));
  return bell_state_residual(state, alpha_s);
}

std::vector<SwapSweepPoint> swap_sweep(std::span<const Complex> alphas, Complex c0, Complex c1,
                                       unsigned threads) {
  std::vector<SwapSweepPoint> out(alphas.size());
  detail::parallel_for(alphas.size(), threads, [&](std::size_t i) {
    PulsePlan plan;
    plan.alpha_s = alphas[i];
    plan.c0 = c0;
    plan.c1 = c1;
    out[i].alpha_s = alphas[i];
    out[i].t_pi = plan.duration();
    out[i].swap_infidelity = 1.0 - swap_fidelity(plan);
    out[i].bell_residual = bell_state_residual(alphas[i]);
  });
  return out;
}

}  // namespace tripartite
