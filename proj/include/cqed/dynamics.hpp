#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/numeric/odeint.hpp>

#include "cqed/hamiltonian.hpp"

namespace cqed {

/// Sampled pure-state evolution. Row i of `amplitudes` is ψ(times[i]).
struct Trajectory {
  StateSpace basis;
  std::vector<double> times;
  Matrix amplitudes;
  std::string method;

  std::size_t samples() const { return times.size(); }
  Vector state(std::size_t i) const { return amplitudes.row(static_cast<Eigen::Index>(i)).transpose(); }
  Vector final_state() const { return state(samples() - 1); }
  RealMatrix populations() const { return amplitudes.cwiseAbs2(); }
  RealVector norms() const { return amplitudes.cwiseAbs2().rowwise().sum().cwiseSqrt(); }

  std::vector<Complex> amplitude_of(const BasisState& s) const {
    const auto j = static_cast<Eigen::Index>(basis.index_of(s));
    std::vector<Complex> out(samples());
    for (std::size_t i = 0; i < samples(); ++i) out[i] = amplitudes(static_cast<Eigen::Index>(i), j);
    return out;
  }
};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {b};
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

/// Basis vector for `s`.
inline Vector unit_state(const StateSpace& basis, const BasisState& s) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
  v(static_cast<Eigen::Index>(basis.index_of(s))) = 1.0;
  return v;
}

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
};

/// Adaptive Dormand–Prince integration of i dψ/dt = H ψ (H may be non-Hermitian).
inline Trajectory integrate_schrodinger(const OperatorMatrix& h, const Vector& psi0, std::span<const double> times,
                                        IntegratorOptions opt = {}) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<Complex>;
  const auto n = static_cast<Eigen::Index>(h.dim());
  if (psi0.size() != n) throw ValidationError("initial state has the wrong dimension");
  Trajectory out{h.basis, {times.begin(), times.end()}, Matrix(static_cast<Eigen::Index>(times.size()), n),
                 "adaptive-rk45"};
  if (times.empty()) return out;
  const Matrix minus_i_h = -kI * h.entries;
  auto rhs = [&](const State& x, State& dx, double) {
    Eigen::Map<const Vector> xv(x.data(), n);
    Eigen::Map<Vector> dxv(dx.data(), n);
    dxv.noalias() = minus_i_h * xv;
  };
  State x(psi0.data(), psi0.data() + n);
  std::size_t k = 0;
  auto observer = [&](const State& s, double) {
    for (Eigen::Index j = 0; j < n; ++j) out.amplitudes(static_cast<Eigen::Index>(k), j) = s[static_cast<std::size_t>(j)];
    ++k;
  };
  std::vector<double> grid(times.begin(), times.end());
  double dt = 1e-3;
  if (grid.size() > 1) dt = std::max(1e-6, std::abs(grid[1] - grid[0]) / 10.0);
  try {
    ode::integrate_times(ode::make_dense_output(opt.atol, opt.rtol, ode::runge_kutta_dopri5<State>()), rhs, x,
                         grid.begin(), grid.end(), dt, observer);
  } catch (const std::exception& e) {
    throw NumericalError(std::string("adaptive integration failed: ") + e.what());
  }
  if (k != grid.size()) throw NumericalError("adaptive integration returned an incomplete trajectory");
  return out;
}

/// Non-Hermitian propagation by eigendecomposition, falling back to the
/// adaptive integrator when the eigenvector matrix is ill-conditioned.
inline Trajectory evolve_conditional(const OperatorMatrix& h, const Vector& psi0, std::span<const double> times,
                                     double max_condition = 1e8) {
  const auto n = static_cast<Eigen::Index>(h.dim());
  if (psi0.size() != n) throw ValidationError("initial state has the wrong dimension");
  if (psi0.norm() > 1.0 + 1e-9) throw ValidationError("initial state norm exceeds 1");
  Eigen::ComplexEigenSolver<Matrix> es(h.entries);
  if (es.info() != Eigen::Success) return integrate_schrodinger(h, psi0, times);
  const Matrix& v = es.eigenvectors();
  Eigen::JacobiSVD<Matrix> svd(v);
  const auto sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
  if (!(cond <= max_condition)) return integrate_schrodinger(h, psi0, times);
  const Vector c = v.partialPivLu().solve(psi0);
  const Vector& lambda = es.eigenvalues();
  Trajectory out{h.basis, {times.begin(), times.end()}, Matrix(static_cast<Eigen::Index>(times.size()), n),
                 "eigen"};
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Vector phase = (-kI * lambda * times[i]).array().exp();
    out.amplitudes.row(static_cast<Eigen::Index>(i)) = (v * phase.cwiseProduct(c)).transpose();
  }
  return out;
}

/// Spectral propagation ψ(t) = V exp(-iΛt) V† ψ0. Non-Hermitian input is
/// handed to evolve_conditional.
inline Trajectory evolve_hermitian(const OperatorMatrix& h, const Vector& psi0, std::span<const double> times) {
  const auto n = static_cast<Eigen::Index>(h.dim());
  if (psi0.size() != n) throw ValidationError("initial state has the wrong dimension");
  if (std::abs(psi0.norm() - 1.0) > 1e-9) throw ValidationError("initial state must be normalised");
  const double scale = std::max(1.0, h.entries.size() ? h.entries.cwiseAbs().maxCoeff() : 0.0);
  if (hermiticity_error(h.entries) > 1e-12 * scale) return evolve_conditional(h, psi0, times);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.entries);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  const Matrix& v = es.eigenvectors();
  const RealVector& lambda = es.eigenvalues();
  const Vector c = v.adjoint() * psi0;
  Trajectory out{h.basis, {times.begin(), times.end()}, Matrix(static_cast<Eigen::Index>(times.size()), n),
                 "spectral"};
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Vector phase = (-kI * lambda.cast<Complex>() * times[i]).array().exp();
    out.amplitudes.row(static_cast<Eigen::Index>(i)) = (v * phase.cwiseProduct(c)).transpose();
  }
  return out;
}

/// Picks the propagator from the Hamiltonian.
inline Trajectory evolve(const OperatorMatrix& h, const Vector& psi0, std::span<const double> times) {
  const double scale = std::max(1.0, h.entries.size() ? h.entries.cwiseAbs().maxCoeff() : 0.0);
  if (hermiticity_error(h.entries) > 1e-12 * scale) return evolve_conditional(h, psi0, times);
  return evolve_hermitian(h, psi0, times);
}

/// Two-level amplitudes (c_10, c_01) for H = [[0, g], [g, Δ]] with both states
/// decaying at amplitude rate κ, starting in the first state.
inline std::array<Complex, 2> analytic_two_level(double g_eff, double delta_eff, double kappa, double t) {
  const double gt = std::sqrt(g_eff * g_eff + 0.25 * delta_eff * delta_eff);
  const Complex env = std::exp(-kappa * t) * std::exp(-kI * (0.5 * delta_eff * t));
  if (gt == 0.0) return {env, 0.0};
  const double s = std::sin(gt * t), c = std::cos(gt * t);
  return {env * (c + kI * (0.5 * delta_eff / gt) * s), -kI * (g_eff / gt) * s * env};
}

/// Photon numbers of the outer (first/last) and inner (middle) states of a
/// damped three-level chain. The paper models are iswap (2, 1) and fredkin (3, 2).
struct ThreeLevelDecay {
  int outer_photons = 2;
  int inner_photons = 1;

  static ThreeLevelDecay iswap() { return {2, 1}; }
  static ThreeLevelDecay fredkin() { return {3, 2}; }
};

/// Three-level amplitudes for H = [[-iα, g1, 0], [g1, -iβ, g2], [0, g2, -iα]]
/// with α = n_outer κ/2, β = n_inner κ/2 + Γ, starting in the first state; the
/// third amplitude carries the global phase factor exp(iηt).
inline std::array<Complex, 3> analytic_three_level(double g1, double g2, double eta, double gamma, double kappa,
                                                   double t, ThreeLevelDecay decay = {}) {
  const double gbar2 = g1 * g1 + g2 * g2;
  if (gbar2 == 0.0) return {std::exp(-0.5 * decay.outer_photons * kappa * t), 0.0, 0.0};
  const double alpha = 0.5 * decay.outer_photons * kappa;
  const double beta = 0.5 * decay.inner_photons * kappa + gamma;
  const double m = 0.5 * (alpha + beta);
  const double delta = 0.5 * (alpha - beta);
  const double w2 = gbar2 - delta * delta;
  if (w2 < -1e-15 * gbar2)
    throw NumericalError("overdamped three-level system (4 g_bar < |kappa - 2 Gamma|); use the numeric propagator");
  const double w = std::sqrt(std::max(w2, 0.0));
  // sin(wt)/w -> t as w -> 0
  const double sinc = w > 1e-12 ? std::sin(w * t) / w : t;
  const double bright = std::exp(-m * t) * (std::cos(w * t) - delta * sinc);
  const double dark = std::exp(-alpha * t);
  const Complex c1 = (g1 * g1 / gbar2) * bright + (g2 * g2 / gbar2) * dark;
  const Complex c2 = -kI * g1 * std::exp(-m * t) * sinc;
  const Complex c3 = (g1 * g2 / gbar2) * (bright - dark) * std::exp(kI * (eta * t));
  return {c1, c2, c3};
}

/// Spin-J coupling schedule g0 sqrt(n(N-n)), n = 1..N-1, for an N-level chain.
inline std::vector<double> spin_j_couplings(int n_levels, double g0) {
  if (n_levels < 2) throw ValidationError("spin-J schedule needs N >= 2");
  std::vector<double> out;
  for (int n = 1; n < n_levels; ++n) out.push_back(g0 * std::sqrt(static_cast<double>(n * (n_levels - n))));
  return out;
}

/// One term of the two-mode Lambda general solution.
struct FockAmplitude {
  int n1 = 0;
  int n2 = 0;
  std::string atom;
  Complex amplitude;
};

/// Amplitudes of |n,m,a⟩, |n+1,m-1,b⟩, |n,m,b⟩, |n-1,m+1,a⟩ evolved under the
/// effective Lambda Hamiltonian from c_a|n,m,a⟩ + c_b|n,m,b⟩. Terms that
/// would need a negative occupation are omitted.
inline std::vector<FockAmplitude> lambda_general_amplitudes(int n, int m, Complex c_a, Complex c_b, double g,
                                                            double t) {
  if (n < 0 || m < 0) throw ValidationError("Fock indices must be non-negative");
  std::vector<FockAmplitude> out;
  const double wa = g * t * std::sqrt(static_cast<double>((n + 1) * m));
  const double wb = g * t * std::sqrt(static_cast<double>((m + 1) * n));
  out.push_back({n, m, "a", c_a * std::cos(wa)});
  if (m > 0) out.push_back({n + 1, m - 1, "b", -kI * c_a * std::sin(wa)});
  out.push_back({n, m, "b", c_b * std::cos(wb)});
  if (n > 0) out.push_back({n - 1, m + 1, "a", -kI * c_b * std::sin(wb)});
  return out;
}

inline std::vector<double> unwrap_phase(std::span<const Complex> z) {
  std::vector<double> out;
  out.reserve(z.size());
  double offset = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double a = std::arg(z[i]);
    if (i > 0) {
      double d = a - prev;
      if (d > kPi) offset -= 2.0 * kPi;
      if (d < -kPi) offset += 2.0 * kPi;
    }
    prev = a;
    out.push_back(a + offset);
  }
  return out;
}

/// Least-squares slope of the unwrapped phase of numeric/reference.
inline double fit_phase_rate(std::span<const double> times, std::span<const Complex> numeric,
                             std::span<const Complex> reference) {
  if (times.size() != numeric.size() || times.size() != reference.size() || times.size() < 2)
    throw ValidationError("phase fit needs matching series of at least two samples");
  std::vector<Complex> ratio(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(numeric[i]) == 0.0 || std::abs(reference[i]) == 0.0)
      throw NumericalError("phase fit through a zero amplitude");
    ratio[i] = numeric[i] / reference[i];
  }
  const auto phi = unwrap_phase(ratio);
  double st = 0, sp = 0, stt = 0, stp = 0;
  const double n = static_cast<double>(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    st += times[i];
    sp += phi[i];
    stt += times[i] * times[i];
    stp += times[i] * phi[i];
  }
  const double den = n * stt - st * st;
  if (den == 0.0) throw ValidationError("phase fit needs distinct sample times");
  return (n * stp - st * sp) / den;
}

}  // namespace cqed
