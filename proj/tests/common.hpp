#pragma once

#include <random>

#include <gtest/gtest.h>

#include "cqed/cqed.hpp"

namespace cqed::test {

/// Fixed-seed generator so property draws are reproducible.
inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240521);
  return gen;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Tuned built-in iSWAP (10001) at detuning `delta`.
inline LinkageModel iswap10001(double delta = 10.0) {
  return calibrate(builtin_model("iswap-10001", {{"Delta", delta}}));
}

/// Tuned built-in iSWAP (11001); spin-J matched on request.
inline LinkageModel iswap11001(double delta = 20.0, bool spin_j = false) {
  return calibrate(builtin_model("iswap-11001", {{"Delta", delta}}), spin_j);
}

inline LinkageModel fredkin_model(double delta = 20.0) {
  return calibrate(builtin_model("fredkin-1001001", {{"Delta", delta}}));
}

/// Populations of `s` along a trajectory.
inline std::vector<double> population(const Trajectory& tr, const BasisState& s) {
  std::vector<double> out;
  for (const auto& a : tr.amplitude_of(s)) out.push_back(std::norm(a));
  return out;
}

}  // namespace cqed::test
