#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "cqed/dynamics.hpp"

namespace cqed {

/// Cavity decay κ per mode (one value broadcasts to every mode) and atomic
/// decay Γ for each decaying level. Γ is an amplitude rate: the conditional
/// Hamiltonian carries -iΓ on a decaying level, the lowering channel 2Γ.
struct DecoherenceSpec {
  std::vector<double> kappa;
  double gamma = 0.0;
  std::vector<std::string> decaying_levels;
  std::string ground = "a";

  static DecoherenceSpec none() { return {}; }

  static DecoherenceSpec uniform(double kappa, double gamma, std::vector<std::string> levels, std::string ground = "a") {
    return {{kappa}, gamma, std::move(levels), std::move(ground)};
  }

  double kappa_for(std::size_t mode) const {
    if (kappa.empty()) return 0.0;
    if (kappa.size() == 1) return kappa[0];
    return kappa.at(mode);
  }

  bool has_decay() const {
    for (double k : kappa)
      if (k > 0.0) return true;
    return gamma > 0.0 && !decaying_levels.empty();
  }

  void validate(std::size_t mode_count) const {
    if (kappa.size() > 1 && kappa.size() != mode_count)
      throw ValidationError("kappa needs one value or one per mode (" + std::to_string(mode_count) + ")");
    for (double k : kappa)
      if (!(k >= 0.0) || !std::isfinite(k)) throw ValidationError("kappa must be finite and non-negative");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("Gamma must be finite and non-negative");
    for (const auto& l : decaying_levels)
      if (l == ground) throw ValidationError("the ground level cannot decay");
  }
};

/// Sparse jump operator L = Σ amp |to⟩⟨from|, entering the master equation
/// with the given rate.
struct CollapseOperator {
  std::string label;
  double rate = 0.0;
  struct Entry {
    std::size_t from;
    std::size_t to;
    double amplitude;
  };
  std::vector<Entry> entries;

  Matrix dense(std::size_t dim) const {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& e : entries) m(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(e.from)) += e.amplitude;
    return m;
  }
};

/// Mode annihilators (rate κ_j) and lowering |ground⟩⟨μ| for each decaying
/// level μ (rate 2Γ). Channels with zero rate are skipped.
inline std::vector<CollapseOperator> collapse_operators(const DecoherenceSpec& spec, const StateSpace& basis) {
  std::vector<CollapseOperator> out;
  if (basis.empty()) return out;
  const std::size_t modes = basis[0].photons.size();
  spec.validate(modes);
  for (std::size_t j = 0; j < modes; ++j) {
    const double k = spec.kappa_for(j);
    if (k <= 0.0) continue;
    CollapseOperator op{"a_" + std::to_string(j + 1), k, {}};
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const int n = basis[i].photons[j];
      if (n == 0) continue;
      BasisState t = basis[i];
      --t.photons[j];
      auto to = basis.find(t);
      if (!to)
        throw ValidationError("basis is not closed under decay: " + format_state(basis[i]) + " loses a photon to " +
                              format_state(t));
      op.entries.push_back({i, *to, std::sqrt(static_cast<double>(n))});
    }
    out.push_back(std::move(op));
  }
  if (spec.gamma > 0.0) {
    for (const auto& level : spec.decaying_levels) {
      CollapseOperator op{"sigma_" + spec.ground + level, 2.0 * spec.gamma, {}};
      for (std::size_t i = 0; i < basis.size(); ++i) {
        if (basis[i].atom != level) continue;
        BasisState t = basis[i];
        t.atom = spec.ground;
        auto to = basis.find(t);
        if (!to)
          throw ValidationError("basis is not closed under decay: " + format_state(basis[i]) + " relaxes to " +
                                format_state(t));
        op.entries.push_back({i, *to, 1.0});
      }
      out.push_back(std::move(op));
    }
  }
  return out;
}

/// H - i Σ_j (κ_j/2) n_j - i Γ Σ_μ |μ⟩⟨μ|, valid for the no-detection branch.
inline OperatorMatrix conditional_hamiltonian(const OperatorMatrix& h, const DecoherenceSpec& spec) {
  OperatorMatrix out = h;
  if (!spec.has_decay()) return out;
  if (!h.basis.empty()) spec.validate(h.basis[0].photons.size());
  for (std::size_t i = 0; i < h.dim(); ++i) {
    const auto& s = h.basis[i];
    double rate = 0.0;
    for (std::size_t j = 0; j < s.photons.size(); ++j) rate += 0.5 * spec.kappa_for(j) * s.photons[j];
    if (std::find(spec.decaying_levels.begin(), spec.decaying_levels.end(), s.atom) != spec.decaying_levels.end())
      rate += spec.gamma;
    const auto ii = static_cast<Eigen::Index>(i);
    out.entries(ii, ii) -= kI * rate;
  }
  out.notes.push_back("conditional Hamiltonian: valid under the condition that no photon is detected");
  return out;
}

/// Sampled density-matrix evolution.
struct DensityTrajectory {
  StateSpace basis;
  std::vector<double> times;
  std::vector<Matrix> rho;

  RealMatrix populations() const {
    RealMatrix p(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < rho.size(); ++i) p.row(static_cast<Eigen::Index>(i)) = rho[i].diagonal().real();
    return p;
  }
  std::vector<double> traces() const {
    std::vector<double> t;
    for (const auto& r : rho) t.push_back(r.trace().real());
    return t;
  }
};

struct MasterOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
};

namespace detail {

/// Coupling-connected components of an operator: label per basis index.
inline std::vector<std::size_t> operator_components(const Matrix& h) {
  const auto n = static_cast<std::size_t>(h.rows());
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0 ||
          h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) != 0.0)
        parent[root(i)] = root(j);
  std::vector<std::size_t> label(n), id(n, n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = root(i);
    if (id[r] == n) id[r] = next++;
    label[i] = id[r];
  }
  return label;
}

}  // namespace detail

/// dρ/dt = -i(Hc ρ - ρ Hc†) + Σ rate L ρ L†, Hc = H - (i/2) Σ rate L†L,
/// which is the Lindblad form. `h` is the Hermitian Hamiltonian over a
/// decay-closed basis.
///
/// Coherences between two coupling components stay zero unless the initial
/// state or a jump applied on both sides creates them, so only the blocks
/// reachable that way are integrated. Every other entry is exactly zero.
inline DensityTrajectory evolve_master(const OperatorMatrix& h, const Matrix& rho0, const DecoherenceSpec& spec,
                                       std::span<const double> times, MasterOptions opt = {}) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<Complex>;
  using Index = Eigen::Index;
  const auto n = static_cast<Index>(h.dim());
  if (rho0.rows() != n || rho0.cols() != n) throw ValidationError("initial density matrix has the wrong dimension");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-9) throw ValidationError("initial density matrix must have unit trace");
  if (hermiticity_error(rho0) > 1e-12) throw ValidationError("initial density matrix must be Hermitian");
  const auto ops = collapse_operators(spec, h.basis);
  Matrix hc = h.entries;
  for (const auto& op : ops)
    for (const auto& e : op.entries) {
      const auto i = static_cast<Index>(e.from);
      hc(i, i) -= kI * (0.5 * op.rate * e.amplitude * e.amplitude);
    }

  // Components and their member indices.
  const auto comp = detail::operator_components(hc);
  const std::size_t ncomp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<std::vector<Index>> members(ncomp);
  std::vector<Index> local(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < comp.size(); ++i) {
    local[i] = static_cast<Index>(members[comp[i]].size());
    members[comp[i]].push_back(static_cast<Index>(i));
  }

  // Active blocks: closure of the initial support under two-sided jumps.
  std::vector<char> active(ncomp * ncomp, 0);
  std::vector<std::pair<std::size_t, std::size_t>> pending;
  auto activate = [&](std::size_t x, std::size_t y) {
    if (!active[x * ncomp + y]) active[x * ncomp + y] = 1, pending.push_back({x, y});
  };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (rho0(i, j) != 0.0) activate(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
  while (!pending.empty()) {
    const auto [x, y] = pending.back();
    pending.pop_back();
    for (const auto& op : ops)
      for (const auto& a : op.entries)
        if (comp[a.from] == x)
          for (const auto& b : op.entries)
            if (comp[b.from] == y) activate(comp[a.to], comp[b.to]);
  }

  struct Block {
    std::size_t x, y;
    Index offset;
    Matrix hx, hy_adj;  // -i Hc_x and (-i Hc_y)†
  };
  std::vector<Block> blocks;
  std::vector<Index> block_of(ncomp * ncomp, -1);
  Index size = 0;
  auto sub = [&](std::size_t x) {
    const auto& m = members[x];
    Matrix out(static_cast<Index>(m.size()), static_cast<Index>(m.size()));
    for (std::size_t r = 0; r < m.size(); ++r)
      for (std::size_t c = 0; c < m.size(); ++c) out(static_cast<Index>(r), static_cast<Index>(c)) = hc(m[r], m[c]);
    return Matrix(-kI * out);
  };
  for (std::size_t x = 0; x < ncomp; ++x)
    for (std::size_t y = 0; y < ncomp; ++y) {
      if (!active[x * ncomp + y]) continue;
      block_of[x * ncomp + y] = static_cast<Index>(blocks.size());
      blocks.push_back({x, y, size, sub(x), sub(y).adjoint()});
      size += static_cast<Index>(members[x].size() * members[y].size());
    }
  auto flat = [&](std::size_t i, std::size_t j) -> Index {
    const auto bi = block_of[comp[i] * ncomp + comp[j]];
    if (bi < 0) return -1;
    const auto& b = blocks[static_cast<std::size_t>(bi)];
    return b.offset + local[j] * static_cast<Index>(members[b.x].size()) + local[i];
  };

  // Jump feeding terms between active entries.
  struct Feed {
    Index from, to;
    double weight;
  };
  std::vector<Feed> feeds;
  for (const auto& op : ops)
    for (const auto& a : op.entries)
      for (const auto& b : op.entries) {
        const Index src = flat(a.from, b.from);
        if (src < 0) continue;
        feeds.push_back({src, flat(a.to, b.to), op.rate * a.amplitude * b.amplitude});
      }

  auto rhs = [&](const State& x, State& dx, double) {
    for (const auto& b : blocks) {
      const auto rows = static_cast<Index>(members[b.x].size()), cols = static_cast<Index>(members[b.y].size());
      Eigen::Map<const Matrix> r(x.data() + b.offset, rows, cols);
      Eigen::Map<Matrix> d(dx.data() + b.offset, rows, cols);
      d.noalias() = b.hx * r;
      d.noalias() += r * b.hy_adj;
    }
    for (const auto& f : feeds) dx[static_cast<std::size_t>(f.to)] += f.weight * x[static_cast<std::size_t>(f.from)];
  };

  DensityTrajectory out{h.basis, {times.begin(), times.end()}, {}};
  if (times.empty()) return out;
  State x(static_cast<std::size_t>(size));
  for (const auto& b : blocks)
    for (std::size_t c = 0; c < members[b.y].size(); ++c)
      for (std::size_t r = 0; r < members[b.x].size(); ++r)
        x[static_cast<std::size_t>(b.offset + static_cast<Index>(c * members[b.x].size() + r))] =
            rho0(members[b.x][r], members[b.y][c]);
  auto observer = [&](const State& s, double) {
    Matrix rho = Matrix::Zero(n, n);
    for (const auto& b : blocks)
      for (std::size_t c = 0; c < members[b.y].size(); ++c)
        for (std::size_t r = 0; r < members[b.x].size(); ++r)
          rho(members[b.x][r], members[b.y][c]) =
              s[static_cast<std::size_t>(b.offset + static_cast<Index>(c * members[b.x].size() + r))];
    out.rho.push_back(std::move(rho));
  };
  std::vector<double> grid(times.begin(), times.end());
  double dt = 1e-3;
  if (grid.size() > 1) dt = std::max(1e-6, std::abs(grid[1] - grid[0]) / 10.0);
  try {
    ode::integrate_times(ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>()), rhs, x,
                         grid.begin(), grid.end(), dt, observer);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("master-equation integration failed: ") + e.what());
  }
  if (out.rho.size() != grid.size()) throw NumericalError("master-equation integration returned too few samples");
  return out;
}

enum class DampedKind { iswap3, fredkin3 };

inline ThreeLevelDecay decay_profile(DampedKind kind) {
  return kind == DampedKind::iswap3 ? ThreeLevelDecay::iswap() : ThreeLevelDecay::fredkin();
}

/// Damped three-level effective Hamiltonian with equal-photon outer states.
inline Matrix damped_three_level_matrix(double g1, double g2, double kappa, double gamma, ThreeLevelDecay decay) {
  const double alpha = 0.5 * decay.outer_photons * kappa;
  const double beta = 0.5 * decay.inner_photons * kappa + gamma;
  Matrix h(3, 3);
  h << -kI * alpha, g1, 0.0, g1, -kI * beta, g2, 0.0, g2, -kI * alpha;
  return h;
}

/// Closed-form eigenvalues λ = -iE of the damped three-level system:
/// λ1 = -n_outer κ/2 and λ2,3 = -(α+β)/2 ± i sqrt(ḡ² - ((κ-2Γ)/4)²).
inline std::array<Complex, 3> damped_eigenvalues(DampedKind kind, double g_bar, double kappa, double gamma) {
  const auto d = decay_profile(kind);
  const double alpha = 0.5 * d.outer_photons * kappa;
  const double beta = 0.5 * d.inner_photons * kappa + gamma;
  const double delta = 0.5 * (alpha - beta);
  const double w2 = g_bar * g_bar - delta * delta;
  if (w2 < 0.0) throw NumericalError("overdamped: 4 g_bar < |kappa - 2 Gamma|");
  const double w = std::sqrt(w2);
  const double m = 0.5 * (alpha + beta);
  return {Complex(-alpha, 0.0), Complex(-m, w), Complex(-m, -w)};
}

/// Decay-closed basis for a set of inputs: coupling components plus every
/// state reachable by photon loss or atomic relaxation.
inline StateSpace decay_closed_basis(const LinkageModel& model, std::span<const BasisState> inputs,
                                     const DecoherenceSpec& spec) {
  return enumerate_union(model, inputs, true, spec.decaying_levels);
}

}  // namespace cqed
