#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqed/linkage_model.hpp"
#include "cqed/models.hpp"
#include "cqed/state_space.hpp"

namespace cqed {

/// Dense operator over an explicit basis. `notes` carries metadata such as
/// the validity condition of a conditional Hamiltonian.
struct OperatorMatrix {
  StateSpace basis;
  Matrix entries;
  std::vector<std::string> notes;

  std::size_t dim() const { return basis.size(); }
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_error(entries) <= tol; }
};

/// Cumulative detunings from transition and mode frequencies, with the sign
/// alternating between absorption (+) and emission (-) steps:
/// Δ1 = t1-w1, Δ2 = Δ1-(t2-w2), Δ3 = Δ2+(t3-w3), ...
inline std::vector<double> detunings_from_frequencies(std::span<const double> transitions,
                                                      std::span<const double> modes) {
  if (transitions.size() != modes.size())
    throw ValidationError("need one mode frequency per transition (" + std::to_string(transitions.size()) + " vs " +
                          std::to_string(modes.size()) + ")");
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const double step = transitions[k] - modes[k];
    acc += (k % 2 == 0) ? step : -step;
    out.push_back(acc);
  }
  return out;
}

namespace detail {

/// Energy change when coupling k is applied in its written direction.
inline double written_step(const LinkageModel& model, const std::vector<int>& orientation, std::size_t k) {
  return orientation[k] * model.detuning_step(k);
}

/// Level and mode energies ε of a rotating frame in which every coupling
/// step equals its detuning step: ε_to - ε_from + Σ Δn_j ε_j = step. Returns
/// nothing when no such frame exists.
inline std::optional<RealVector> frame_energies(const LinkageModel& model, const std::vector<int>& orientation) {
  const auto levels = static_cast<Eigen::Index>(model.levels.size());
  const auto unknowns = levels + static_cast<Eigen::Index>(model.mode_count());
  const auto rows = static_cast<Eigen::Index>(model.couplings.size());
  RealMatrix a = RealMatrix::Zero(rows, unknowns);
  RealVector b(rows);
  for (std::size_t k = 0; k < model.couplings.size(); ++k) {
    const auto& c = model.couplings[k];
    const auto r = static_cast<Eigen::Index>(k);
    a(r, static_cast<Eigen::Index>(model.level_index(c.to))) += 1.0;
    a(r, static_cast<Eigen::Index>(model.level_index(c.from))) -= 1.0;
    for (const auto& p : c.photons) a(r, levels + static_cast<Eigen::Index>(p.mode)) += p.delta;
    b(r) = written_step(model, orientation, k);
  }
  RealVector x = a.completeOrthogonalDecomposition().solve(b);
  if ((a * x - b).norm() > 1e-9 * (1.0 + b.norm())) return std::nullopt;
  return x;
}

}  // namespace detail

/// Interaction-picture Hamiltonian of `model` over `basis`.
///
/// Each coupling-connected component takes its first seed (or, failing that,
/// its first state) as zero of energy; other energies follow by summing the
/// detuning steps along couplings. A basis with several components uses one
/// common frame instead, zeroed at the first seed. Off-diagonals carry the coupling strength
/// times the Fock factors of the actual occupations.
inline OperatorMatrix build_chain_hamiltonian(const LinkageModel& model, const StateSpace& basis) {
  model.validate();
  const std::size_t n = basis.size();
  for (const auto& s : basis) {
    if (s.photons.size() != model.mode_count() || !model.has_level(s.atom))
      throw ValidationError("state " + model.format(s) + " does not belong to model '" + model.name + "'");
  }
  const auto orientation = model.chain_orientation();
  Matrix h = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::optional<double>> energy(n);

  auto assign_component = [&](std::size_t start) {
    energy[start] = 0.0;
    std::deque<std::size_t> queue{start};
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      for (const auto& nb : coupling_neighbors(model, basis[i])) {
        auto j = basis.find(nb.state);
        if (!j)
          throw ValidationError("basis is not closed under the couplings: " + model.format(basis[i]) + " reaches " +
                                model.format(nb.state));
        const double step = detail::written_step(model, orientation, nb.coupling);
        const double e = *energy[i] + (nb.forward ? step : -step);
        if (!energy[*j]) {
          energy[*j] = e;
          queue.push_back(*j);
        } else if (std::abs(*energy[*j] - e) > 1e-9 * (1.0 + std::abs(e))) {
          throw ValidationError("inconsistent detunings around a loop through " + model.format(basis[*j]));
        }
      }
    }
  };

  std::size_t components = 0;
  for (const auto& s : basis.seeds()) {
    const std::size_t i = basis.index_of(s);
    if (!energy[i]) assign_component(i), ++components;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!energy[i]) assign_component(i), ++components;

  // Several components (e.g. a basis closed under decay): their relative
  // offsets matter once jumps carry coherences between them, so take all
  // energies from one rotating frame anchored at the first component.
  if (components > 1) {
    if (auto frame = detail::frame_energies(model, orientation)) {
      auto global = [&](const BasisState& s) {
        double e = (*frame)(static_cast<Eigen::Index>(model.level_index(s.atom)));
        for (std::size_t j = 0; j < s.photons.size(); ++j)
          e += s.photons[j] * (*frame)(static_cast<Eigen::Index>(model.levels.size() + j));
        return e;
      };
      const double zero = global(basis[basis.seeds().empty() ? 0 : basis.index_of(basis.seeds().front())]);
      for (std::size_t i = 0; i < n; ++i) energy[i] = global(basis[i]) - zero;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    h(ii, ii) = *energy[i];
    for (const auto& nb : coupling_neighbors(model, basis[i])) {
      const auto jj = static_cast<Eigen::Index>(basis.index_of(nb.state));
      h(jj, ii) = nb.amplitude;
      h(ii, jj) = nb.amplitude;
    }
  }
  return {basis, std::move(h), {}};
}

/// Hamiltonian of the component reachable from the model seed.
inline OperatorMatrix build_chain_hamiltonian(const LinkageModel& model) {
  return build_chain_hamiltonian(model, enumerate_reachable(model, model.seed, false));
}

/// Driven Lambda system over {|c 10⟩, |a 10⟩, |b 00⟩, |c 01⟩, |a 01⟩} with
/// diagonal (Δ2-Δ3, 0, Δ1, Δ2, Δ3).
inline OperatorMatrix build_lambda_hamiltonian(double g_ab, double g_bc, double omega, double delta1, double delta2,
                                               double delta3) {
  if (g_ab < 0.0 || g_bc < 0.0 || omega < 0.0) throw ValidationError("coupling strengths must be non-negative");
  const auto model = not_gate({g_ab, g_bc, omega, delta1, delta2, delta3});
  const std::vector<BasisState> order{{"c", {1, 0}}, {"a", {1, 0}}, {"b", {0, 0}}, {"c", {0, 1}}, {"a", {0, 1}}};
  auto basis = enumerate_reachable(model, model.seed, false);
  if (basis.size() != order.size()) throw ValidationError("driven Lambda basis has an unexpected size");
  return build_chain_hamiltonian(model, basis.permuted(order));
}

/// Effective two-photon coupling of the Lambda system, g = g_ac g_bc / Δ.
inline double two_mode_effective_coupling(double g_ac, double g_bc, double delta) {
  if (delta == 0.0)
    throw ValidationError("Delta = 0: the intermediate level is resonant and cannot be eliminated");
  return g_ac * g_bc / delta;
}

}  // namespace cqed
