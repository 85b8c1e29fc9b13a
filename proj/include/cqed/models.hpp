#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "cqed/linkage_model.hpp"

namespace cqed {

/// Two-mode Lambda system: |a⟩ absorbs from mode 2 to reach |c⟩, |c⟩ emits
/// into mode 1 to reach |b⟩. Seed |a n1 n2⟩; |c⟩ sits at Δ, |b⟩ at the
/// two-photon detuning.
inline LinkageModel two_mode_lambda(double g_ac, double g_bc, double delta, double two_photon = 0.0,
                                    int n1 = 0, int n2 = 1) {
  LinkageModel m;
  m.name = "two-mode-lambda";
  m.levels = {{"a"}, {"b"}, {"c"}};
  m.modes = {"w1", "w2"};
  m.couplings = {
      {"a", "c", {{1, -1}}, g_ac, "g_ac"},
      {"c", "b", {{0, +1}}, g_bc, "g_bc"},
  };
  m.detunings = {delta, two_photon};
  m.resonance_pattern = "101";
  m.seed = {"a", {n1, n2}};
  m.decaying_levels = {"c"};
  return m;
}

struct IswapParams {
  std::array<double, 4> g{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> delta{10.0, 10.0, 10.0, 0.0};
};

/// Four-level atom, four modes. a -(absorb w1)-> b -(emit w2)-> c -(absorb w3)-> d
/// -(emit w4)-> a. Seed |a 1010⟩; the pattern only labels which chain states
/// are retained on elimination ("10001" or "11001").
inline LinkageModel iswap(const IswapParams& p, const std::string& pattern = "10001") {
  LinkageModel m;
  m.name = "iswap-" + pattern;
  m.levels = {{"a"}, {"b"}, {"c"}, {"d"}};
  m.modes = {"w1", "w2", "w3", "w4"};
  m.couplings = {
      {"a", "b", {{0, -1}}, p.g[0], "g1_ab"},
      {"b", "c", {{1, +1}}, p.g[1], "g2_bc"},
      {"c", "d", {{2, -1}}, p.g[2], "g3_cd"},
      {"d", "a", {{3, +1}}, p.g[3], "g4_da"},
  };
  m.detunings.assign(p.delta.begin(), p.delta.end());
  m.resonance_pattern = pattern;
  m.seed = {"a", {1, 0, 1, 0}};
  m.decaying_levels = {"b", "d"};
  return m;
}

struct FredkinParams {
  // g[3] is the second coupling on the repeated mode w1 (d -> e).
  std::array<double, 6> g{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  std::array<double, 6> delta{20.0, 20.0, 0.05, 20.0, 20.0, 0.05};
};

/// Six-level atom. Modes in order (w1, w1', w2, w3, w5, w6); w1' is the idle
/// partner of w1 that completes the control qubit. Seed |a 10,01,10⟩.
inline LinkageModel fredkin(const FredkinParams& p) {
  LinkageModel m;
  m.name = "fredkin-1001001";
  m.levels = {{"a"}, {"b"}, {"c"}, {"d"}, {"e"}, {"f"}};
  m.modes = {"w1", "w1p", "w2", "w3", "w5", "w6"};
  m.couplings = {
      {"a", "b", {{0, -1}}, p.g[0], "g1_ab"},
      {"b", "c", {{2, +1}}, p.g[1], "g2_bc"},
      {"c", "d", {{3, -1}}, p.g[2], "g3_cd"},
      {"d", "e", {{0, +1}}, p.g[3], "g1_de"},
      {"e", "f", {{4, -1}}, p.g[4], "g5_ef"},
      {"f", "a", {{5, +1}}, p.g[5], "g6_fa"},
  };
  m.detunings.assign(p.delta.begin(), p.delta.end());
  m.resonance_pattern = "1001001";
  m.seed = {"a", {1, 0, 0, 1, 1, 0}};
  m.decaying_levels = {"b", "c", "d", "e", "f"};
  m.mode_groups = {2, 2, 2};
  return m;
}

struct NotGateParams {
  double g_ab = 1.0;
  double g_bc = 1.0;
  double omega = 2.0;  // Rabi frequency; the matrix element is omega/2
  double delta1 = 20.0;
  double delta2 = 20.0;
  double delta3 = 0.0;
};

/// Lambda atom with a classical drive on c <-> a. Seed |a 10⟩; the drive also
/// reaches the off-chain state |c 10⟩ from the seed.
inline LinkageModel not_gate(const NotGateParams& p) {
  LinkageModel m;
  m.name = "not-gate";
  m.levels = {{"a"}, {"b"}, {"c"}};
  m.modes = {"w1", "w2"};
  m.couplings = {
      {"a", "b", {{0, -1}}, p.g_ab, "g1_ab"},
      {"b", "c", {{1, +1}}, p.g_bc, "g2_bc"},
      {"c", "a", {}, p.omega / 2.0, "Omega/2"},
  };
  m.detunings = {p.delta1, p.delta2, p.delta3};
  m.resonance_pattern = "1001";
  m.seed = {"a", {1, 0}};
  m.decaying_levels = {"b", "c"};
  return m;
}

/// Effective two-mode model after eliminating |c⟩: |n,m,a⟩ <-> |n+1,m-1,b⟩.
inline LinkageModel cz_effective(double g, int fock_cutoff = 4) {
  LinkageModel m;
  m.name = "cz-effective";
  m.levels = {{"a"}, {"b"}};
  m.modes = {"w1", "w2"};
  m.couplings = {{"a", "b", {{0, +1}, {1, -1}}, g, "g"}};
  m.detunings = {0.0};
  m.resonance_pattern = "11";
  m.seed = {"a", {0, 1}};
  m.fock_cutoff = fock_cutoff;
  return m;
}

inline const std::vector<std::string>& builtin_model_names() {
  static const std::vector<std::string> names{"two-mode-lambda", "iswap-10001", "iswap-11001", "fredkin-1001001",
                                              "not-gate"};
  return names;
}

namespace detail {
inline double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}
}  // namespace detail

/// Built-in model by name. Recognised keys: g, Delta (uniform defaults), then
/// per-element overrides g1.., Delta1.., plus Omega, g_ab, g_bc, g_ac for the
/// Lambda models. Unrecognised keys are rejected.
inline LinkageModel builtin_model(const std::string& name, const std::map<std::string, double>& p = {}) {
  using detail::param;
  auto check_keys = [&](std::vector<std::string> allowed) {
    for (const auto& [k, v] : p) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        throw ValidationError("parameter '" + k + "' does not apply to model '" + name + "'");
    }
  };
  const double g = param(p, "g", 1.0);
  if (name == "two-mode-lambda") {
    check_keys({"g", "Delta", "g_ac", "g_bc", "Delta2"});
    return two_mode_lambda(param(p, "g_ac", g), param(p, "g_bc", g), param(p, "Delta", 10.0), param(p, "Delta2", 0.0));
  }
  if (name == "iswap-10001" || name == "iswap-11001") {
    check_keys({"g", "Delta", "g1", "g2", "g3", "g4", "Delta1", "Delta2", "Delta3", "Delta4"});
    const bool fast = name == "iswap-11001";
    const double d = param(p, "Delta", fast ? 20.0 : 10.0);
    IswapParams ip;
    for (int k = 0; k < 4; ++k) ip.g[k] = param(p, "g" + std::to_string(k + 1), g);
    ip.delta = {fast ? 0.0 : d, d, d, 0.0};
    for (int k = 0; k < 4; ++k) ip.delta[k] = param(p, "Delta" + std::to_string(k + 1), ip.delta[k]);
    return iswap(ip, fast ? "11001" : "10001");
  }
  if (name == "fredkin-1001001") {
    check_keys({"g", "Delta", "g1", "g2", "g3", "g4", "g5", "g6", "Delta1", "Delta2", "Delta3", "Delta4", "Delta5",
                "Delta6"});
    const double d = param(p, "Delta", 20.0);
    FredkinParams fp;
    for (int k = 0; k < 6; ++k) fp.g[k] = param(p, "g" + std::to_string(k + 1), g);
    fp.delta = {d, d, 0.0, d, d, 0.0};
    for (int k = 0; k < 6; ++k) fp.delta[k] = param(p, "Delta" + std::to_string(k + 1), fp.delta[k]);
    return fredkin(fp);
  }
  if (name == "not-gate") {
    check_keys({"g", "Delta", "g_ab", "g_bc", "Omega", "Delta1", "Delta2", "Delta3"});
    const double d = param(p, "Delta", 20.0);
    NotGateParams np{param(p, "g_ab", g), param(p, "g_bc", g), param(p, "Omega", 2.0 * g),
                     param(p, "Delta1", d),  param(p, "Delta2", d), param(p, "Delta3", 0.0)};
    return not_gate(np);
  }
  std::string known;
  for (const auto& n : builtin_model_names()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown model '" + name + "' (built-ins: " + known + ")");
}

}  // namespace cqed
