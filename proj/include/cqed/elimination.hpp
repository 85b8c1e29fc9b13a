#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "cqed/hamiltonian.hpp"

namespace cqed {

/// Retained (P) and eliminated (Q) basis indices.
struct Partition {
  std::vector<std::size_t> p;
  std::vector<std::size_t> q;

  /// P = the given states, in the given order; Q = everything else in basis order.
  static Partition from_states(const StateSpace& basis, const std::vector<BasisState>& retained) {
    Partition part;
    std::vector<bool> kept(basis.size(), false);
    for (const auto& s : retained) {
      const std::size_t i = basis.index_of(s);
      if (kept[i]) throw ValidationError("state " + format_state(s) + " retained twice");
      kept[i] = true;
      part.p.push_back(i);
    }
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (!kept[i]) part.q.push_back(i);
    part.validate(basis.size());
    return part;
  }

  /// P = chain states marked '1' in the resonance pattern, in chain order.
  static Partition from_pattern(const LinkageModel& model, const StateSpace& basis) {
    const auto chain = model.chain_states();
    std::vector<BasisState> retained;
    for (std::size_t k = 0; k < chain.size(); ++k)
      if (model.resonance_pattern.at(k) == '1') retained.push_back(chain[k]);
    return from_states(basis, retained);
  }

  void validate(std::size_t dim) const {
    if (p.empty()) throw ValidationError("partition: P must not be empty");
    std::vector<int> seen(dim, 0);
    for (auto i : p) {
      if (i >= dim) throw ValidationError("partition index out of range");
      ++seen[i];
    }
    for (auto i : q) {
      if (i >= dim) throw ValidationError("partition index out of range");
      ++seen[i];
    }
    for (int c : seen)
      if (c != 1) throw ValidationError("partition must split the basis into disjoint P and Q");
  }
};

struct EffectiveSystem {
  StateSpace basis;
  OperatorMatrix h_eff;
  // g_eff["g1"] = H(0,1), g_eff["g2"] = H(1,2), ...
  std::map<std::string, double> g_eff;
  // delta_eff["Delta1"] = H(1,1) - H(0,0), ...
  std::map<std::string, double> delta_eff;
  double eta = 0.0;
  double asymmetry = 0.0;  // |H_eff - H_eff^dagger| before symmetrisation
  double min_abs_eig_a = 0.0;
  double max_abs_eig_w0 = 0.0;
  double coupling_norm = 0.0;  // spectral norm of the P-Q block B
  std::vector<std::string> warnings;

  /// Coupling-weighted Rabi frequency sqrt(sum g_k^2).
  double g_bar() const {
    double s = 0.0;
    for (const auto& [k, v] : g_eff) s += v * v;
    return std::sqrt(s);
  }
};

namespace detail {

inline Matrix block(const Matrix& h, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          h(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
  return out;
}

inline Eigen::VectorXcd eigenvalues_of(const Matrix& m, bool hermitian) {
  if (m.size() == 0) return {};
  if (hermitian) return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().cast<Complex>();
  return Eigen::ComplexEigenSolver<Matrix>(m, false).eigenvalues();
}

}  // namespace detail

/// H_eff = W0 - B (A - E)^{-1} B^dagger on the P block, by LU solve. The
/// reference energy E is the real diagonal of the first retained state, so a
/// constant shift of H shifts H_eff by the same constant.
inline EffectiveSystem eliminate(const OperatorMatrix& h, const Partition& partition) {
  partition.validate(h.dim());
  const bool hermitian = h.is_hermitian();
  const Matrix w0 = detail::block(h.entries, partition.p, partition.p);
  const double e_ref = w0(0, 0).real();
  EffectiveSystem out;
  std::vector<BasisState> kept;
  for (auto i : partition.p) kept.push_back(h.basis[i]);
  std::vector<BasisState> seeds;
  for (const auto& s : h.basis.seeds())
    if (std::find(kept.begin(), kept.end(), s) != kept.end()) seeds.push_back(s);
  out.basis = StateSpace(kept, seeds);

  Matrix heff = w0;
  const auto w0_eigs =
      detail::eigenvalues_of(w0 - e_ref * Matrix::Identity(w0.rows(), w0.cols()), hermitian);
  out.max_abs_eig_w0 = w0_eigs.size() ? w0_eigs.cwiseAbs().maxCoeff() : 0.0;
  if (!partition.q.empty()) {
    Matrix a = detail::block(h.entries, partition.q, partition.q);
    a.diagonal().array() -= e_ref;
    const Matrix b = detail::block(h.entries, partition.p, partition.q);
    const Matrix bd = detail::block(h.entries, partition.q, partition.p);
    const auto a_eigs = detail::eigenvalues_of(a, hermitian);
    out.min_abs_eig_a = a_eigs.cwiseAbs().minCoeff();
    Eigen::FullPivLU<Matrix> lu(a);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (!lu.isInvertible() || out.min_abs_eig_a < 1e-12 * scale) {
      // Name the eliminated state carrying most of the null vector.
      Eigen::ComplexEigenSolver<Matrix> es(a);
      Eigen::Index k = 0;
      es.eigenvalues().cwiseAbs().minCoeff(&k);
      Eigen::Index j = 0;
      es.eigenvectors().col(k).cwiseAbs().maxCoeff(&j);
      const auto& bad = h.basis[partition.q[static_cast<std::size_t>(j)]];
      throw NumericalError("eliminated block is singular: state " + format_state(bad) +
                           " is resonant and cannot be adiabatically eliminated");
    }
    heff = w0 - b * lu.solve(bd);
    // W0 is near zero in a resonant frame, so the P-Q coupling also sets the scale.
    out.coupling_norm = Eigen::JacobiSVD<Matrix>(b).singularValues()(0);
    const double scale_p = std::max(out.max_abs_eig_w0, out.coupling_norm);
    if (out.min_abs_eig_a < 5.0 * scale_p) {
      out.warnings.push_back("adiabatic elimination may be inaccurate: min |eig A| = " +
                             std::to_string(out.min_abs_eig_a) + " < 5 max(|eig W0|, |B|) = " +
                             std::to_string(5.0 * scale_p));
    }
  }
  if (hermitian) {
    out.asymmetry = hermiticity_error(heff);
    heff = (0.5 * (heff + heff.adjoint())).eval();
  }
  for (Eigen::Index k = 1; k < heff.rows(); ++k) {
    out.g_eff["g" + std::to_string(k)] = heff(k - 1, k).real();
    out.delta_eff["Delta" + std::to_string(k)] = (heff(k, k) - heff(0, 0)).real();
  }
  out.h_eff = {out.basis, std::move(heff), h.notes};
  return out;
}

/// Build, partition by resonance pattern, eliminate.
inline EffectiveSystem effective_system(const LinkageModel& model) {
  const auto h = build_chain_hamiltonian(model);
  return eliminate(h, Partition::from_pattern(model, h.basis));
}

namespace detail {
inline void require_nonzero(double v, const std::string& what) {
  if (v == 0.0) throw ValidationError(what + " must be nonzero");
}
inline void require_pattern(const LinkageModel& m, const std::string& pattern) {
  if (m.resonance_pattern != pattern || m.couplings.size() + 1 != pattern.size())
    throw ValidationError("model '" + m.name + "' has pattern '" + m.resonance_pattern + "', expected '" + pattern +
                          "'");
}
}  // namespace detail

struct TwoLevelParams {
  double g_exact = 0.0;
  double g_approx = 0.0;
  double delta_exact = 0.0;
  double delta_approx = 0.0;
};

/// Closed-form effective parameters of the (10001) chain.
inline TwoLevelParams iswap_two_level_params(const LinkageModel& m) {
  detail::require_pattern(m, "10001");
  const double g1 = m.couplings[0].strength, g2 = m.couplings[1].strength;
  const double g3 = m.couplings[2].strength, g4 = m.couplings[3].strength;
  const double d1 = m.detunings[0], d2 = m.detunings[1], d3 = m.detunings[2], d4 = m.detunings[3];
  detail::require_nonzero(d1, "Delta1");
  detail::require_nonzero(d2, "Delta2");
  detail::require_nonzero(d3, "Delta3");
  const double den = d1 * d2 * d3 - d3 * g2 * g2 - d1 * g3 * g3;
  if (den == 0.0) throw NumericalError("(10001) elimination denominator vanishes");
  TwoLevelParams p;
  p.g_exact = -g1 * g2 * g3 * g4 / den;
  p.g_approx = -g1 * g2 * g3 * g4 / (d1 * d2 * d3);
  p.delta_exact = d4 + (g1 * g1 * (d2 * d3 - g3 * g3) - g4 * g4 * (d1 * d2 - g2 * g2)) / den;
  p.delta_approx = d4 + g1 * g1 / d1 - g4 * g4 / d3;
  return p;
}

struct ThreeLevelParams {
  double g1_exact = 0.0, g1_approx = 0.0;
  double g2_exact = 0.0, g2_approx = 0.0;
  double delta1_exact = 0.0, delta1_approx = 0.0;
  double delta2_exact = 0.0, delta2_approx = 0.0;
};

/// Closed-form effective parameters of the (11001) chain.
inline ThreeLevelParams iswap_three_level_params(const LinkageModel& m) {
  detail::require_pattern(m, "11001");
  const double g1 = m.couplings[0].strength, g2 = m.couplings[1].strength;
  const double g3 = m.couplings[2].strength, g4 = m.couplings[3].strength;
  const double d1 = m.detunings[0], d2 = m.detunings[1], d3 = m.detunings[2], d4 = m.detunings[3];
  detail::require_nonzero(d2, "Delta2");
  detail::require_nonzero(d3, "Delta3");
  const double den = d2 * d3 - g3 * g3;
  if (den == 0.0) throw NumericalError("(11001) elimination denominator vanishes");
  ThreeLevelParams p;
  p.g1_exact = p.g1_approx = g1;
  p.g2_exact = g2 * g3 * g4 / den;
  p.g2_approx = g2 * g3 * g4 / (d2 * d3);
  p.delta1_exact = d1 - g2 * g2 * d3 / den;
  p.delta1_approx = d1 - g2 * g2 / d2;
  p.delta2_exact = d4 - g4 * g4 * d2 / den;
  p.delta2_approx = d4 - g4 * g4 / d3;
  return p;
}

/// Closed-form effective parameters of the (1001001) chain. The exact forms
/// include the over-shot pair reached from the final state.
inline ThreeLevelParams fredkin_three_level_params(const LinkageModel& m) {
  detail::require_pattern(m, "1001001");
  double g[6], d[6];
  for (int k = 0; k < 6; ++k) {
    g[k] = m.couplings[static_cast<std::size_t>(k)].strength;
    d[k] = m.detunings[static_cast<std::size_t>(k)];
  }
  for (int k : {0, 1, 3, 4}) detail::require_nonzero(d[k], "Delta" + std::to_string(k + 1));
  const double den1 = d[0] * d[1] - g[1] * g[1];
  const double den2 = d[3] * d[4] - g[4] * g[4];
  const double e1 = d[5] + d[0], e2 = d[5] + d[1];
  const double den3 = e1 * e2 - 2.0 * g[1] * g[1];
  if (den1 == 0.0 || den2 == 0.0 || den3 == 0.0) throw NumericalError("(1001001) elimination denominator vanishes");
  const double shift0 = -g[0] * g[0] * d[1] / den1;
  ThreeLevelParams p;
  p.g1_exact = g[0] * g[1] * g[2] / den1;
  p.g1_approx = g[0] * g[1] * g[2] / (d[0] * d[1]);
  p.g2_exact = g[3] * g[4] * g[5] / den2;
  p.g2_approx = g[3] * g[4] * g[5] / (d[3] * d[4]);
  p.delta1_exact = d[2] - g[2] * g[2] * d[0] / den1 - g[3] * g[3] * d[4] / den2 - shift0;
  p.delta1_approx = d[2] + g[0] * g[0] / d[0] - g[2] * g[2] / d[1] - g[3] * g[3] / d[3];
  p.delta2_exact = d[5] - g[5] * g[5] * d[3] / den2 - g[0] * g[0] * e2 / den3 - shift0;
  p.delta2_approx = d[5] - g[5] * g[5] / d[4];
  return p;
}

struct NotGateEffective {
  double g_exact = 0.0;
  double g_approx = 0.0;
  double delta_exact = 0.0;
  double delta_leading = 0.0;    // Δ3 + g_ab²/Δ1 (leading order of the exact result)
  double delta_alternate = 0.0;  // Δ3 + g_ab²/Δ2 (the other printed leading form)
};

/// Effective two-level parameters of the driven Lambda (NOT) system.
inline NotGateEffective not_gate_params(double g_ab, double g_bc, double omega, double d1, double d2, double d3) {
  const double den = d1 * d2 - g_bc * g_bc;
  if (den == 0.0) throw NumericalError("Delta1*Delta2 = g_bc^2: the eliminated pair is resonant");
  if (d2 == d3) throw NumericalError("Delta2 = Delta3: |c 10> is resonant with the retained states");
  detail::require_nonzero(d1, "Delta1");
  detail::require_nonzero(d2, "Delta2");
  const double h = omega / 2.0;
  NotGateEffective p;
  p.g_exact = h * g_ab * g_bc / den;
  p.g_approx = omega * g_ab * g_bc / (2.0 * d1 * d2);
  p.delta_exact = d3 - h * h * d1 / den + h * h / (d2 - d3) + g_ab * g_ab * d2 / den;
  p.delta_leading = d3 + g_ab * g_ab / d1;
  p.delta_alternate = d3 + g_ab * g_ab / d2;
  return p;
}

inline NotGateEffective not_gate_params(const LinkageModel& m) {
  detail::require_pattern(m, "1001");
  return not_gate_params(m.couplings[0].strength, m.couplings[1].strength, 2.0 * m.couplings[2].strength,
                         m.detunings[0], m.detunings[1], m.detunings[2]);
}

namespace detail {

/// Position in the effective basis of chain state k, or throws.
inline std::size_t effective_slot(const LinkageModel& m, std::size_t chain_index, const std::string& name) {
  if (chain_index == 0 || chain_index >= m.resonance_pattern.size() || m.resonance_pattern[chain_index] != '1')
    throw ValidationError("effective detunings do not depend on " + name + " (chain state " +
                          std::to_string(chain_index) + " is not retained)");
  return static_cast<std::size_t>(std::count(m.resonance_pattern.begin(),
                                             m.resonance_pattern.begin() + static_cast<long>(chain_index), '1'));
}

}  // namespace detail

/// Sets each named detuning so that the exact effective detuning of the
/// retained state it belongs to vanishes. Newton iteration with a
/// finite-difference Jacobian; one step when the dependence is affine.
inline LinkageModel tune_resonances(LinkageModel m, const std::vector<std::string>& free_detunings,
                                    double tol = 1e-13, int max_iter = 60) {
  const std::size_t n = free_detunings.size();
  if (n == 0) return m;
  std::vector<std::size_t> idx, slot;
  for (const auto& name : free_detunings) {
    idx.push_back(m.detuning_index(name));
    slot.push_back(detail::effective_slot(m, idx.back() + 1, name));
  }
  auto residual = [&](const LinkageModel& mm) {
    const auto eff = effective_system(mm);
    RealVector f(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = static_cast<Eigen::Index>(slot[i]);
      f(static_cast<Eigen::Index>(i)) = (eff.h_eff.entries(s, s) - eff.h_eff.entries(0, 0)).real();
    }
    return f;
  };
  RealVector f = residual(m);
  for (int it = 0; it < max_iter && f.cwiseAbs().maxCoeff() > tol; ++it) {
    RealMatrix jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      LinkageModel mp = m;
      const double x = mp.detunings[idx[j]];
      const double step = 1e-6 * std::max(1.0, std::abs(x));
      mp.detunings[idx[j]] = x + step;
      jac.col(static_cast<Eigen::Index>(j)) = (residual(mp) - f) / step;
    }
    Eigen::FullPivLU<RealMatrix> lu(jac);
    if (!lu.isInvertible() || jac.cwiseAbs().maxCoeff() < 1e-12)
      throw ValidationError("effective detunings do not depend on the chosen free detunings");
    const RealVector dx = lu.solve(-f);
    for (std::size_t j = 0; j < n; ++j) m.detunings[idx[j]] += dx(static_cast<Eigen::Index>(j));
    f = residual(m);
  }
  if (f.cwiseAbs().maxCoeff() > 1e3 * tol) throw NumericalError("resonance tuning did not converge");
  return m;
}

/// Value of one free detuning that zeroes its effective detuning.
inline double solve_resonance(const LinkageModel& m, const std::string& free_detuning) {
  const auto tuned = tune_resonances(m, {free_detuning});
  return tuned.detunings[tuned.detuning_index(free_detuning)];
}

/// One free detuning per retained chain state after the seed.
inline std::vector<std::string> default_free_detunings(const LinkageModel& m) {
  std::vector<std::string> out;
  for (std::size_t k = 1; k < m.resonance_pattern.size(); ++k)
    if (m.resonance_pattern[k] == '1') out.push_back(LinkageModel::detuning_name(k));
  return out;
}

/// Rescales the first (bare) coupling of a three-level pattern to the exact
/// second effective coupling so that the effective chain has equal couplings.
inline LinkageModel spin_j_match(LinkageModel m) {
  if (m.resonance_pattern.size() < 2 || m.resonance_pattern[0] != '1' || m.resonance_pattern[1] != '1')
    throw ValidationError("spin-J matching needs a pattern starting with '11' (first coupling retained)");
  const auto eff = effective_system(m);
  if (eff.g_eff.size() != 2) throw ValidationError("spin-J matching applies to three-level effective systems");
  m.couplings[0].strength = std::abs(eff.g_eff.at("g2"));
  return m;
}

/// Resonance-tunes the default free detunings; with `spin_j`, also equalises
/// the effective couplings and re-tunes (the shift depends on g1).
inline LinkageModel calibrate(LinkageModel m, bool spin_j = false) {
  const auto free = default_free_detunings(m);
  m = tune_resonances(std::move(m), free);
  if (spin_j) m = tune_resonances(spin_j_match(std::move(m)), free);
  return m;
}

}  // namespace cqed
