#include "common.hpp"

using namespace cqed;
using test::uniform;

namespace {

OperatorMatrix two_by_two(const Matrix& h) { return {StateSpace({{"a", {1, 0}}, {"a", {0, 1}}}), h, {}}; }

OperatorMatrix three_by_three(const Matrix& h) {
  return {StateSpace({{"a", {1, 0}}, {"b", {0, 0}}, {"a", {0, 1}}}), h, {}};
}

Vector first(Eigen::Index n) {
  Vector v = Vector::Zero(n);
  v(0) = 1.0;
  return v;
}

/// Chain with the given nearest-neighbour couplings and zero diagonal.
OperatorMatrix chain(const std::vector<double>& g) {
  const auto n = static_cast<Eigen::Index>(g.size() + 1);
  Matrix h = Matrix::Zero(n, n);
  std::vector<BasisState> states;
  for (Eigen::Index i = 0; i < n; ++i) states.push_back({"a", {static_cast<int>(i)}});
  for (Eigen::Index i = 0; i + 1 < n; ++i) h(i, i + 1) = h(i + 1, i) = g[static_cast<std::size_t>(i)];
  return {StateSpace(states), h, {}};
}

}  // namespace

TEST(Dynamics, ZeroHamiltonianIsStationary) {
  const auto h = two_by_two(Matrix::Zero(2, 2));
  Vector psi(2);
  psi << Complex(0.6, 0.0), Complex(0.0, 0.8);
  const auto tr = evolve(h, psi, linspace(0, 50, 11));
  for (std::size_t i = 0; i < tr.samples(); ++i) EXPECT_LT((tr.state(i) - psi).norm(), 1e-15);
}

TEST(Dynamics, ResonantRabi) {
  Matrix m(2, 2);
  m << 0, 1.3, 1.3, 0;
  const auto times = linspace(0, 10, 101);
  const auto tr = evolve(two_by_two(m), first(2), times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(tr.populations()(static_cast<Eigen::Index>(i), 0), std::pow(std::cos(1.3 * times[i]), 2), 1e-12);
    EXPECT_NEAR(tr.populations()(static_cast<Eigen::Index>(i), 1), std::pow(std::sin(1.3 * times[i]), 2), 1e-12);
  }
}

TEST(Dynamics, Iswap10001SlowSwapWithRipple) {
  const auto m = test::iswap10001();
  const auto h = build_chain_hamiltonian(m);
  const double t_half = kPi / (2.0 * std::abs(effective_system(m).g_eff.at("g1")));
  const auto times = linspace(0, t_half, 4001);
  const auto tr = evolve(h, unit_state(h.basis, m.seed), times);
  const auto target = test::population(tr, {"a", {0, 1, 0, 1}});
  EXPECT_GT(*std::max_element(target.begin(), target.end()), 0.99);
  // Fast ripple: the seed population is not monotone on a fine grid.
  const auto seed = test::population(tr, m.seed);
  int rises = 0;
  for (std::size_t i = 1; i < seed.size(); ++i) rises += seed[i] > seed[i - 1];
  EXPECT_GT(rises, 10);
}

TEST(Dynamics, ConditionalEqualsHermitianWithoutDecay) {
  const auto m = test::iswap11001(20.0);
  const auto h = build_chain_hamiltonian(m);
  const auto v = unit_state(h.basis, m.seed);
  const auto times = linspace(0, 500, 51);
  const auto a = evolve_hermitian(h, v, times);
  const auto b = evolve_conditional(h, v, times);
  EXPECT_LT(test::max_abs(a.amplitudes - b.amplitudes), 1e-9);
}

TEST(Dynamics, NonHermitianRoutedToConditional) {
  Matrix m(2, 2);
  m << Complex(0, -0.1), 1.0, 1.0, Complex(0, -0.1);
  const auto tr = evolve_hermitian(two_by_two(m), first(2), linspace(0, 3, 4));
  EXPECT_NE(tr.method, "spectral");
  EXPECT_LT(tr.norms()(3), 1.0);
}

TEST(Dynamics, AnalyticTwoLevelSpecialCases) {
  const double g = 0.37;
  const auto c = analytic_two_level(g, 0.0, 0.0, kPi / (2.0 * g));
  EXPECT_LT(std::abs(c[0]), 1e-15);
  EXPECT_LT(std::abs(c[1] - Complex(0.0, -1.0)), 1e-15);
  const auto z = analytic_two_level(0.0, 0.3, 0.0, 12.0);
  EXPECT_NEAR(std::abs(z[0]), 1.0, 1e-15);
  EXPECT_EQ(std::abs(z[1]), 0.0);
}

TEST(Dynamics, AnalyticTwoLevelMatchesConditional) {
  for (int k = 0; k < 100; ++k) {
    const double g = uniform(-2.0, 2.0), d = uniform(-1.0, 1.0), kappa = uniform(0.0, 0.5);
    Matrix h(2, 2);
    h << Complex(0, -kappa), g, g, Complex(d, -kappa);
    const auto times = linspace(0.0, uniform(1.0, 20.0), 9);
    const auto tr = evolve_conditional(two_by_two(h), first(2), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto c = analytic_two_level(g, d, kappa, times[i]);
      EXPECT_LT(std::abs(c[0] - tr.amplitudes(static_cast<Eigen::Index>(i), 0)), 1e-9);
      EXPECT_LT(std::abs(c[1] - tr.amplitudes(static_cast<Eigen::Index>(i), 1)), 1e-9);
    }
  }
}

TEST(Dynamics, AnalyticThreeLevelSpecialCases) {
  const double g = 0.8, gbar = std::sqrt(2.0) * g;
  const auto full = analytic_three_level(g, g, 0.0, 0.0, 0.0, kPi / gbar);
  EXPECT_NEAR(std::abs(full[2]), 1.0, 1e-14);
  const auto half = analytic_three_level(g, g, 0.0, 0.0, 0.0, kPi / (2.0 * gbar));
  EXPECT_NEAR(std::norm(half[1]), 0.5, 1e-14);
  // A global phase rate leaves magnitudes unchanged.
  const auto phased = analytic_three_level(g, g, 0.3, 0.0, 0.0, 1.7);
  const auto plain = analytic_three_level(g, g, 0.0, 0.0, 0.0, 1.7);
  EXPECT_NEAR(std::abs(phased[2]), std::abs(plain[2]), 1e-15);
  EXPECT_THROW((void)analytic_three_level(0.01, 0.01, 0.0, 0.0, 1.0, 1.0), NumericalError);
}

TEST(Dynamics, AnalyticThreeLevelMatchesConditional) {
  for (auto decay : {ThreeLevelDecay::iswap(), ThreeLevelDecay::fredkin()}) {
    for (int k = 0; k < 100; ++k) {
      const double g1 = uniform(0.2, 1.5), g2 = uniform(0.2, 1.5);
      const double kappa = uniform(0.0, 0.3), gamma = uniform(0.0, 0.3);
      const auto h = three_by_three(damped_three_level_matrix(g1, g2, kappa, gamma, decay));
      const auto times = linspace(0.0, uniform(1.0, 15.0), 7);
      const auto tr = evolve_conditional(h, first(3), times);
      for (std::size_t i = 0; i < times.size(); ++i) {
        const auto c = analytic_three_level(g1, g2, 0.0, gamma, kappa, times[i], decay);
        for (Eigen::Index j = 0; j < 3; ++j)
          EXPECT_LT(std::abs(c[static_cast<std::size_t>(j)] - tr.amplitudes(static_cast<Eigen::Index>(i), j)), 1e-6);
      }
    }
  }
}

TEST(Dynamics, Iswap10001DampedOracle) {
  // Effective two-level system: both retained states hold two photons, so
  // each carries -iκ in the conditional Hamiltonian.
  const auto m = test::iswap10001();
  const auto eff = effective_system(m);
  const double g = eff.g_eff.at("g1");
  for (double kappa : {0.033 * std::abs(g), 0.24 * std::abs(g)}) {
    Matrix h = eff.h_eff.entries;
    h.diagonal().array() -= kI * kappa;
    const auto times = linspace(0, kPi / std::abs(g), 201);
    const auto tr = evolve_conditional({eff.basis, h, {}}, unit_state(eff.basis, m.seed), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto c = analytic_two_level(g, eff.delta_eff.at("Delta1"), kappa, times[i]);
      EXPECT_LT(std::abs(std::abs(c[1]) - std::abs(tr.amplitudes(static_cast<Eigen::Index>(i), 1))), 1e-6);
    }
  }
}

TEST(Dynamics, IsolatedStateDecay) {
  const auto m = test::iswap10001();
  const BasisState blocked{"a", {0, 1, 1, 0}};
  const double kappa = 0.01;
  const auto h = conditional_hamiltonian(build_chain_hamiltonian(m, enumerate_reachable(m, blocked, false)),
                                         DecoherenceSpec::uniform(kappa, 0.0, {}));
  const auto times = linspace(0, 100, 11);
  const auto tr = evolve(h, unit_state(h.basis, blocked), times);
  for (std::size_t i = 0; i < times.size(); ++i)
    EXPECT_NEAR(std::pow(tr.norms()(static_cast<Eigen::Index>(i)), 2), std::exp(-2.0 * kappa * times[i]), 1e-12);
}

TEST(Dynamics, SpinJCouplings) {
  const auto c3 = spin_j_couplings(3, 1.0);
  ASSERT_EQ(c3.size(), 2u);
  EXPECT_DOUBLE_EQ(c3[0], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(c3[1], std::sqrt(2.0));
  EXPECT_EQ(spin_j_couplings(2, 0.5), std::vector<double>{0.5});
  const auto c5 = spin_j_couplings(5, 1.0);
  EXPECT_NEAR(c5[0], 2.0, 1e-15);
  EXPECT_NEAR(c5[1], std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(c5[2], std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(c5[3], 2.0, 1e-15);
  EXPECT_THROW((void)spin_j_couplings(1, 1.0), ValidationError);
}

TEST(Dynamics, SpinJCompleteTransfer) {
  for (int n : {2, 3, 4, 5, 7}) {
    const double g0 = 0.3;
    const auto h = chain(spin_j_couplings(n, g0));
    const std::array<double, 1> t{kPi / (2.0 * g0)};
    const auto tr = evolve(h, first(n), t);
    EXPECT_GT(tr.populations()(0, n - 1), 1.0 - 1e-9) << "N = " << n;
  }
}

TEST(Dynamics, LambdaGeneralAmplitudes) {
  const double g = 0.4;
  const auto model = cz_effective(g, 4);
  for (auto [n, m] : std::vector<std::pair<int, int>>{{1, 1}, {0, 1}, {3, 3}, {0, 3}, {2, 0}, {1, 2}}) {
    const Complex ca(0.6, 0.0), cb(0.0, 0.8);
    const BasisState sa{"a", {n, m}}, sb{"b", {n, m}};
    const auto basis = enumerate_union(model, std::array<BasisState, 2>{sa, sb}, false, {});
    const auto h = build_chain_hamiltonian(model, basis);
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
    psi(static_cast<Eigen::Index>(basis.index_of(sa))) = ca;
    psi(static_cast<Eigen::Index>(basis.index_of(sb))) = cb;
    const double t = 2.3;
    const auto tr = evolve(h, psi, std::array<double, 1>{t});
    for (const auto& a : lambda_general_amplitudes(n, m, ca, cb, g, t)) {
      const auto j = basis.index_of({a.atom, {a.n1, a.n2}});
      EXPECT_LT(std::abs(tr.amplitudes(0, static_cast<Eigen::Index>(j)) - a.amplitude), 1e-12)
          << "n=" << n << " m=" << m << " " << a.atom;
    }
  }
  // Frequencies g√2, g, 2g√3, g√3, and no motion for m = 0 from |a>.
  auto freq = [&](int n, int m) {
    const auto amps = lambda_general_amplitudes(n, m, 1.0, 0.0, g, kPi / 2.0);
    return std::abs(amps[0].amplitude);
  };
  EXPECT_NEAR(freq(1, 1), std::abs(std::cos(g * std::sqrt(2.0) * kPi / 2.0)), 1e-15);
  EXPECT_NEAR(freq(0, 1), std::abs(std::cos(g * kPi / 2.0)), 1e-15);
  EXPECT_NEAR(freq(3, 3), std::abs(std::cos(2.0 * std::sqrt(3.0) * g * kPi / 2.0)), 1e-15);
  EXPECT_NEAR(freq(0, 3), std::abs(std::cos(std::sqrt(3.0) * g * kPi / 2.0)), 1e-15);
  EXPECT_EQ(freq(2, 0), 1.0);
}

TEST(Dynamics, NormConservedOverManyPeriods) {
  const auto m = test::iswap10001();
  const auto h = build_chain_hamiltonian(m);
  const auto tr = evolve(h, unit_state(h.basis, m.seed), linspace(0, 1e4 * 2.0 * kPi, 1001));
  const auto norms = tr.norms();
  EXPECT_LT((norms.array() - 1.0).abs().maxCoeff(), 1e-9);
  // Populations sum to the squared norm.
  const RealVector sums = tr.populations().rowwise().sum();
  EXPECT_LT((sums.array() - norms.array().square()).abs().maxCoeff(), 1e-12);
}

TEST(Dynamics, ConditionalNormMonotone) {
  const auto m = test::iswap11001(20.0, true);
  const auto spec = DecoherenceSpec::uniform(0.002, 0.003, m.decaying_levels);
  const auto h = conditional_hamiltonian(build_chain_hamiltonian(m), spec);
  const auto tr = evolve(h, unit_state(h.basis, m.seed), linspace(0, 2000, 4001));
  const auto n = tr.norms();
  for (Eigen::Index i = 1; i < n.size(); ++i) EXPECT_LE(n(i), n(i - 1) + 1e-10);
  EXPECT_LE(n(0), 1.0 + 1e-9);
}

TEST(Dynamics, SpectralMatchesIntegratorOnModels) {
  std::vector<LinkageModel> models{test::iswap10001(), test::iswap11001(20.0), test::fredkin_model(20.0),
                                   calibrate(builtin_model("not-gate"))};
  for (const auto& m : models) {
    const auto h = build_chain_hamiltonian(m);
    const auto v = unit_state(h.basis, m.seed);
    const auto times = linspace(0, 60, 7);
    const auto a = evolve(h, v, times);
    const auto b = integrate_schrodinger(h, v, times);
    EXPECT_LT(test::max_abs(a.amplitudes - b.amplitudes), 1e-8) << m.name;
  }
}

TEST(Dynamics, TimeReversal) {
  const auto m = test::fredkin_model(20.0);
  const auto h = build_chain_hamiltonian(m);
  const auto v = unit_state(h.basis, m.seed);
  for (double t : {1.0, 37.5, 900.0}) {
    const auto fwd = evolve(h, v, std::array<double, 1>{t}).final_state();
    const auto back = evolve(h, fwd, std::array<double, 1>{-t}).final_state();
    EXPECT_LT((back - v).norm(), 1e-9) << t;
  }
}

TEST(Dynamics, InputValidation) {
  const auto h = two_by_two(Matrix::Identity(2, 2));
  EXPECT_THROW((void)evolve_hermitian(h, Vector::Ones(2), std::array<double, 1>{1.0}), ValidationError);
  EXPECT_THROW((void)evolve_hermitian(h, first(3), std::array<double, 1>{1.0}), ValidationError);
}

TEST(Dynamics, PhaseFit) {
  const auto times = linspace(0, 10, 201);
  std::vector<Complex> z, ones(times.size(), 1.0);
  for (double t : times) z.push_back(std::exp(kI * (0.9 * t)));
  EXPECT_NEAR(fit_phase_rate(times, z, ones), 0.9, 1e-12);
  const auto u = unwrap_phase(z);
  EXPECT_NEAR(u.back(), 9.0, 1e-12);
}
