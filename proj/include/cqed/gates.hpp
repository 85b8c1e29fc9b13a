#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cqed/decoherence.hpp"
#include "cqed/elimination.hpp"
#include "cqed/parallel.hpp"

namespace cqed {

/// Dual-mode qubit: one photon in `one` is logical 1, in `zero` logical 0.
struct QubitModes {
  std::size_t one = 0;
  std::size_t zero = 1;
};

/// Map between logical bitstrings (qubit 1 is the most significant bit) and
/// physical basis states with the ancilla in `atom`.
struct LogicalEncoding {
  std::vector<QubitModes> qubits;
  std::size_t mode_count = 0;
  std::string atom = "a";

  std::size_t qubit_count() const { return qubits.size(); }
  std::size_t dimension() const { return std::size_t{1} << qubits.size(); }

  std::string label(std::size_t index) const {
    std::string s;
    for (std::size_t q = 0; q < qubits.size(); ++q) s += ((index >> (qubits.size() - 1 - q)) & 1U) ? '1' : '0';
    return s;
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < dimension(); ++i) out.push_back(label(i));
    return out;
  }

  BasisState physical(std::size_t index) const {
    BasisState s{atom, std::vector<int>(mode_count, 0)};
    for (std::size_t q = 0; q < qubits.size(); ++q) {
      const bool bit = (index >> (qubits.size() - 1 - q)) & 1U;
      s.photons.at(bit ? qubits[q].one : qubits[q].zero) = 1;
    }
    return s;
  }

  std::optional<std::size_t> logical_index(const BasisState& s) const {
    for (std::size_t i = 0; i < dimension(); ++i)
      if (physical(i) == s) return i;
    return std::nullopt;
  }

  void validate(const LinkageModel& model) const {
    if (qubits.empty()) throw ValidationError("encoding has no qubits");
    if (mode_count != model.mode_count()) throw ValidationError("encoding mode count does not match the model");
    if (!model.has_level(atom)) throw ValidationError("encoding atom level is not a model level");
    std::vector<int> used(mode_count, 0);
    for (const auto& q : qubits) {
      if (q.one >= mode_count || q.zero >= mode_count || q.one == q.zero)
        throw ValidationError("each qubit needs two distinct model modes");
      ++used[q.one];
      ++used[q.zero];
    }
    for (int u : used)
      if (u > 1) throw ValidationError("a mode is shared between two qubits");
  }
};

/// |a 0110⟩ = 00, |a 0101⟩ = 01, |a 1010⟩ = 10, |a 1001⟩ = 11.
inline LogicalEncoding iswap_encoding() { return {{{0, 1}, {3, 2}}, 4, "a"}; }

/// Control (w1, w1'), targets (w2, w3) and (w5, w6): |a 10,01,10⟩ = 101.
inline LogicalEncoding fredkin_encoding() { return {{{0, 1}, {2, 3}, {4, 5}}, 6, "a"}; }

/// |a 10⟩ = 1, |a 01⟩ = 0.
inline LogicalEncoding not_encoding() { return {{{0, 1}}, 2, "a"}; }

inline Matrix iswap_target() {
  Matrix u = Matrix::Zero(4, 4);
  u(0, 0) = 1.0;
  u(2, 1) = kI;
  u(1, 2) = kI;
  u(3, 3) = 1.0;
  return u;
}

inline Matrix fredkin_target() {
  Matrix u = Matrix::Identity(8, 8);
  u(5, 5) = u(6, 6) = 0.0;
  u(6, 5) = u(5, 6) = 1.0;
  return u;
}

/// σx; fidelities use |⟨target|ψ⟩|², so the -i of a π pulse does not matter.
inline Matrix not_target() {
  Matrix x = Matrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  return x;
}

inline Matrix cz_target() {
  Matrix u = Matrix::Identity(4, 4);
  u(3, 3) = -1.0;
  return u;
}

/// R_x(θ) = cos(θ/2) I - i sin(θ/2) σx with θ = g_eff t.
inline Matrix rx_rotation(double g_eff, double t) {
  const double th = 0.5 * g_eff * t;
  Matrix r(2, 2);
  r << std::cos(th), -kI * std::sin(th), -kI * std::sin(th), std::cos(th);
  return r;
}

/// Zeroes amplitudes whose atom is not `level` and renormalises. Returns the
/// projected state and the pre-projection weight.
inline std::pair<Vector, double> condition_on_atom(const Vector& psi, const StateSpace& basis,
                                                   const std::string& level) {
  if (psi.size() != static_cast<Eigen::Index>(basis.size())) throw ValidationError("state does not match the basis");
  Vector out = psi;
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis[i].atom != level) out(static_cast<Eigen::Index>(i)) = 0.0;
  const double p = out.squaredNorm();
  if (p <= 0.0) throw NumericalError("projection onto atomic level '" + level + "' has zero weight");
  return {out / std::sqrt(p), p};
}

enum class Engine { full, effective, master };

inline std::string engine_name(Engine e) {
  switch (e) {
    case Engine::full: return "full";
    case Engine::effective: return "effective";
    case Engine::master: return "master";
  }
  return "?";
}

inline Engine parse_engine(const std::string& s) {
  if (s == "full") return Engine::full;
  if (s == "effective") return Engine::effective;
  if (s == "master") return Engine::master;
  throw ValidationError("unknown engine '" + s + "' (full, effective, master)");
}

struct RunOptions {
  Engine engine = Engine::full;
  std::optional<double> t_int;  // default: closed form of the effective system
  bool refine = true;           // only applies when t_int is not given
  double refine_window = 0.05;
  std::size_t refine_samples = 401;
  bool count_jumps = false;  // require the master engine when rates are nonzero
  std::size_t workers = 1;
  MasterOptions master;  // integrator tolerances for the master engine
};

struct GateResult {
  std::vector<std::string> labels;
  RealMatrix truth_table;  // (input, output) probability
  Matrix amplitudes;       // (input, output) amplitude; empty for the master engine
  std::vector<double> fidelity;
  std::vector<double> conditional_fidelity;
  std::vector<double> success_probability;  // weight on the ancilla ground level
  double t_int = 0.0;
  double t_closed = 0.0;
  std::string engine;
  std::vector<std::string> warnings;

  /// Truth table with each row renormalised to the logical subspace.
  RealMatrix postselected() const {
    RealMatrix out = truth_table;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double s = out.row(r).sum();
      if (s > 0.0) out.row(r) /= s;
    }
    return out;
  }
  double mean_fidelity() const {
    double s = 0.0;
    for (double f : fidelity) s += f;
    return fidelity.empty() ? 0.0 : s / static_cast<double>(fidelity.size());
  }
};

/// Closed-form interaction time: π/(2|g|) for two retained states, π/ḡ for three.
inline double closed_form_time(const EffectiveSystem& eff) {
  const auto dim = eff.h_eff.dim();
  if (dim == 2) {
    const double g = std::abs(eff.g_eff.at("g1"));
    if (g == 0.0) throw NumericalError("effective coupling vanishes");
    return kPi / (2.0 * g);
  }
  if (dim == 3) {
    const double gb = eff.g_bar();
    if (gb == 0.0) throw NumericalError("effective couplings vanish");
    return kPi / gb;
  }
  throw ValidationError("closed-form interaction time needs a two- or three-state effective system");
}

inline double closed_form_time(const LinkageModel& model) { return closed_form_time(effective_system(model)); }

namespace detail {

/// Retained states for the effective engine in the component of `basis`:
/// pattern-marked chain states and logical states, in basis order.
inline Partition effective_partition(const LinkageModel& model, const LogicalEncoding& enc, const StateSpace& basis) {
  const auto chain = model.chain_states();
  std::vector<BasisState> keep;
  for (const auto& s : basis) {
    bool retained = enc.logical_index(s).has_value();
    for (std::size_t k = 0; k < chain.size() && !retained; ++k)
      retained = model.resonance_pattern[k] == '1' && chain[k] == s;
    if (retained) keep.push_back(s);
  }
  return Partition::from_states(basis, keep);
}

struct Propagated {
  StateSpace basis;
  std::optional<Vector> psi;  // pure engines
  std::optional<Matrix> rho;  // master engine
};

inline Propagated propagate_input(const LinkageModel& model, const LogicalEncoding& enc, const DecoherenceSpec& spec,
                                  const BasisState& input, Engine engine, double t,
                                  const MasterOptions& master = {}) {
  const std::array<double, 1> when{t};
  if (engine == Engine::master) {
    const std::array<BasisState, 1> seeds{input};
    const auto basis = decay_closed_basis(model, seeds, spec);
    const auto h = build_chain_hamiltonian(model, basis);
    const Vector v = unit_state(basis, input);
    const Matrix rho0 = v * v.adjoint();
    if (t == 0.0) return {basis, std::nullopt, rho0};
    auto traj = evolve_master(h, rho0, spec, std::array<double, 2>{0.0, t}, master);
    return {basis, std::nullopt, traj.rho.back()};
  }
  const auto basis = enumerate_reachable(model, input, false);
  auto h = conditional_hamiltonian(build_chain_hamiltonian(model, basis), spec);
  if (engine == Engine::effective) {
    auto eff = eliminate(h, effective_partition(model, enc, basis));
    const Vector v = unit_state(eff.basis, input);
    auto traj = evolve(eff.h_eff, v, when);
    return {eff.basis, traj.final_state(), std::nullopt};
  }
  const Vector v = unit_state(basis, input);
  auto traj = evolve(h, v, when);
  return {basis, traj.final_state(), std::nullopt};
}

/// Fidelity of the reference input against its target over a time grid.
inline std::vector<double> reference_curve(const LinkageModel& model, const DecoherenceSpec& spec,
                                           const BasisState& input, const Vector& target_amps,
                                           const LogicalEncoding& enc, std::span<const double> times) {
  const auto basis = enumerate_reachable(model, input, false);
  const auto h = conditional_hamiltonian(build_chain_hamiltonian(model, basis), spec);
  const auto traj = evolve(h, unit_state(basis, input), times);
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    Complex overlap = 0.0;
    for (std::size_t o = 0; o < enc.dimension(); ++o) {
      if (target_amps(static_cast<Eigen::Index>(o)) == 0.0) continue;
      if (auto j = basis.find(enc.physical(o)))
        overlap += std::conj(target_amps(static_cast<Eigen::Index>(o))) *
                   traj.amplitudes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*j));
    }
    out[i] = std::norm(overlap);
  }
  return out;
}

/// Golden-section maximisation of f on [a, b].
inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double a, double b,
                                            double tol = 1e-10) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (std::abs(b - a) > tol * std::max(1.0, std::abs(a))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

/// Grid scan followed by golden-section refinement around the best sample.
inline std::pair<double, double> maximise_on_grid(const std::function<std::vector<double>(std::span<const double>)>& curve,
                                                  double a, double b, std::size_t samples) {
  const auto grid = linspace(a, b, std::max<std::size_t>(samples, 3));
  const auto vals = curve(grid);
  const auto best = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  auto f = [&](double t) {
    const std::array<double, 1> one{t};
    return curve(one)[0];
  };
  auto [x, fx] = golden_max(f, lo, hi);
  if (vals[best] > fx) return {grid[best], vals[best]};
  return {x, fx};
}

}  // namespace detail

/// Propagates every logical input to t_int and tabulates output
/// probabilities and fidelities against `target` (column = input).
inline GateResult run_gate(const LinkageModel& model, const LogicalEncoding& enc, const DecoherenceSpec& spec,
                           const Matrix& target, const RunOptions& opt = {}) {
  model.validate();
  enc.validate(model);
  spec.validate(model.mode_count());
  const auto dim = static_cast<Eigen::Index>(enc.dimension());
  if (target.rows() != dim || target.cols() != dim) throw ValidationError("target gate has the wrong dimension");
  if (opt.count_jumps && spec.has_decay() && opt.engine != Engine::master)
    throw ValidationError("engine '" + engine_name(opt.engine) +
                          "' cannot count decay events; use the master engine when rates are nonzero");
  GateResult res;
  res.labels = enc.labels();
  res.engine = engine_name(opt.engine);
  const auto eff = effective_system(model);
  res.warnings = eff.warnings;
  res.t_closed = closed_form_time(eff);
  res.t_int = opt.t_int.value_or(res.t_closed);
  if (res.t_int < 0.0 || !std::isfinite(res.t_int)) throw ValidationError("interaction time must be finite and >= 0");

  if (!opt.t_int && opt.refine && opt.engine != Engine::effective && opt.refine_window > 0.0) {
    const auto ref = enc.logical_index(model.seed);
    if (!ref) throw ValidationError("model seed is not a logical state of the encoding");
    const Vector col = target.col(static_cast<Eigen::Index>(*ref));
    auto curve = [&](std::span<const double> ts) {
      return detail::reference_curve(model, spec, model.seed, col, enc, ts);
    };
    const double a = res.t_closed * (1.0 - opt.refine_window), b = res.t_closed * (1.0 + opt.refine_window);
    res.t_int = detail::maximise_on_grid(curve, a, b, opt.refine_samples).first;
  }

  res.truth_table = RealMatrix::Zero(dim, dim);
  if (opt.engine != Engine::master) res.amplitudes = Matrix::Zero(dim, dim);
  res.fidelity.assign(enc.dimension(), 0.0);
  res.conditional_fidelity.assign(enc.dimension(), 0.0);
  res.success_probability.assign(enc.dimension(), 0.0);

  parallel_for(enc.dimension(), opt.workers, [&](std::size_t k) {
    const auto in = enc.physical(k);
    const auto out = detail::propagate_input(model, enc, spec, in, opt.engine, res.t_int, opt.master);
    const auto ki = static_cast<Eigen::Index>(k);
    double ground = 0.0;
    for (std::size_t i = 0; i < out.basis.size(); ++i) {
      if (out.basis[i].atom != enc.atom) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      ground += out.psi ? std::norm((*out.psi)(ii)) : out.rho->operator()(ii, ii).real();
    }
    Complex overlap = 0.0;
    double fid_rho = 0.0;
    std::vector<std::pair<Eigen::Index, Complex>> present;
    for (std::size_t o = 0; o < enc.dimension(); ++o) {
      auto j = out.basis.find(enc.physical(o));
      if (!j) continue;
      const auto oi = static_cast<Eigen::Index>(o), ji = static_cast<Eigen::Index>(*j);
      const Complex t = target(oi, ki);
      if (out.psi) {
        const Complex a = (*out.psi)(ji);
        res.amplitudes(ki, oi) = a;
        res.truth_table(ki, oi) = std::norm(a);
        overlap += std::conj(t) * a;
      } else {
        res.truth_table(ki, oi) = (*out.rho)(ji, ji).real();
      }
      present.push_back({ji, t});
    }
    if (out.rho) {
      Complex s = 0.0;
      for (const auto& [ja, ta] : present)
        for (const auto& [jb, tb] : present) s += std::conj(ta) * (*out.rho)(ja, jb) * tb;
      fid_rho = s.real();
    }
    res.fidelity[k] = out.psi ? std::norm(overlap) : fid_rho;
    res.success_probability[k] = ground;
    res.conditional_fidelity[k] = ground > 0.0 ? res.fidelity[k] / ground : 0.0;
  });
  return res;
}

struct PeakResult {
  double value = 0.0;
  double time = 0.0;
};

/// Maximum over (0, t_max] of |⟨target|ψ(t)⟩|² for one input under the
/// conditional full-model Hamiltonian.
inline PeakResult peak_fidelity(const LinkageModel& model, const DecoherenceSpec& spec, const BasisState& input,
                                const BasisState& target, double t_max, std::size_t samples = 4001) {
  const auto basis = enumerate_reachable(model, input, false);
  const auto h = conditional_hamiltonian(build_chain_hamiltonian(model, basis), spec);
  const auto v = unit_state(basis, input);
  const auto j = static_cast<Eigen::Index>(basis.index_of(target));
  auto curve = [&](std::span<const double> ts) {
    const auto traj = evolve(h, v, ts);
    std::vector<double> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out[i] = std::norm(traj.amplitudes(static_cast<Eigen::Index>(i), j));
    return out;
  };
  auto [t, f] = detail::maximise_on_grid(curve, 0.0, t_max, samples);
  return {f, t};
}

struct CzEntry {
  BasisState input;
  Complex amplitude;      // return amplitude on the input state
  Complex relative;       // amplitude divided by the global phase
  int expected_sign = 1;
  double phase_error = 0.0;  // |arg(relative / expected)|
};

struct CzTable {
  double g = 0.0;
  double t = 0.0;
  std::vector<CzEntry> entries;
  double max_phase_error = 0.0;
  double min_return_probability = 1.0;
};

/// Propagates |n,m,x⟩ for n,m ∈ {0,3}, x ∈ {a,b} under the effective two-mode
/// Hamiltonian and reports the acquired signs relative to |0,0,a⟩.
inline CzTable cz_three_photon(double g, double t) {
  const auto model = cz_effective(g, 4);
  CzTable table{g, t, {}, 0.0, 1.0};
  const std::array<double, 1> when{t};
  for (const char* atom : {"a", "b"}) {
    for (auto [n, m] : std::array<std::pair<int, int>, 4>{{{0, 0}, {0, 3}, {3, 0}, {3, 3}}}) {
      const BasisState in{atom, {n, m}};
      const auto basis = enumerate_reachable(model, in, false);
      const auto h = build_chain_hamiltonian(model, basis);
      const auto traj = evolve_hermitian(h, unit_state(basis, in), when);
      CzEntry e;
      e.input = in;
      e.amplitude = traj.amplitudes(0, static_cast<Eigen::Index>(basis.index_of(in)));
      const bool flipped = (std::string(atom) == "a" && n == 0 && m == 3) || (std::string(atom) == "b" && n == 3 && m == 0);
      e.expected_sign = flipped ? -1 : 1;
      table.entries.push_back(e);
    }
  }
  const Complex global = table.entries.front().amplitude / std::abs(table.entries.front().amplitude);
  for (auto& e : table.entries) {
    e.relative = e.amplitude / global;
    e.phase_error = std::abs(std::arg(e.relative / static_cast<double>(e.expected_sign)));
    table.max_phase_error = std::max(table.max_phase_error, e.phase_error);
    table.min_return_probability = std::min(table.min_return_probability, std::norm(e.amplitude));
  }
  return table;
}

/// Φ(n) = (ΔL/2v)(sqrt(1 + 4ng²/Δ²) - 1) for constant coupling g.
inline double dispersive_phase(int n, double g, double delta, double length, double velocity) {
  if (delta == 0.0) throw ValidationError("dispersive phase needs Delta != 0");
  if (velocity <= 0.0) throw ValidationError("atom velocity must be positive");
  if (n < 0) throw ValidationError("photon number must be non-negative");
  return 0.5 * delta * length / velocity * (std::sqrt(1.0 + 4.0 * n * g * g / (delta * delta)) - 1.0);
}

/// Small-coupling limit g²t/Δ of the single-photon dispersive phase.
inline double dispersive_shift(double g, double delta, double t) {
  if (delta == 0.0) throw ValidationError("dispersive shift needs Delta != 0");
  return g * g * t / delta;
}

/// Phase at time t of the detuned two-level JCM amplitude on |a n⟩,
/// from the least-squares slope of its unwrapped phase.
inline double dispersive_phase_numeric(int n, double g, double delta, double t, std::size_t samples = 20001) {
  if (n < 0) throw ValidationError("photon number must be non-negative");
  if (n == 0) return 0.0;
  Matrix h(2, 2);
  const double c = g * std::sqrt(static_cast<double>(n));
  h << 0.0, c, c, delta;
  StateSpace basis({{"a", {n}}, {"b", {n - 1}}});
  OperatorMatrix op{basis, h, {}};
  const auto times = linspace(0.0, t, samples);
  Vector v(2);
  v << 1.0, 0.0;
  const auto traj = evolve_hermitian(op, v, times);
  const auto amp = traj.amplitude_of(basis[0]);
  const std::vector<Complex> ones(samples, Complex(1.0, 0.0));
  return fit_phase_rate(times, amp, ones) * t;
}

}  // namespace cqed
