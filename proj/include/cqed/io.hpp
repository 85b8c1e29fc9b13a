#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqed/gates.hpp"

namespace cqed {

using Json = nlohmann::ordered_json;

/// Fixed 12-significant-digit formatting used for every CSV number.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Time axis conversion for reports: dimensionless g·t, or milliseconds when
/// g/2π is given in Hz.
struct UnitSystem {
  std::optional<double> g_over_2pi_hz;

  bool si() const { return g_over_2pi_hz.has_value(); }
  double to_ms(double gt) const { return gt / (2.0 * kPi * *g_over_2pi_hz) * 1e3; }
};

inline Json to_json(const Matrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ri = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"real", re}, {"imag", im}};
}

inline Json to_json(const RealMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

inline Json basis_json(const StateSpace& basis, std::span<const int> groups = {}) {
  Json out = Json::array();
  for (const auto& s : basis) out.push_back(format_state(s, groups));
  return out;
}

inline Json to_json(const OperatorMatrix& h, std::span<const int> groups = {}) {
  Json j{{"basis", basis_json(h.basis, groups)}, {"matrix", to_json(h.entries)}};
  if (!h.notes.empty()) j["notes"] = h.notes;
  return j;
}

inline Json to_json(const LinkageModel& m) {
  Json couplings = Json::array();
  for (const auto& c : m.couplings) {
    Json photons = Json::array();
    for (const auto& p : c.photons) photons.push_back({{"mode", m.modes.at(p.mode)}, {"delta", p.delta}});
    couplings.push_back(
        {{"label", c.label}, {"from", c.from}, {"to", c.to}, {"strength", c.strength}, {"photons", photons}});
  }
  Json levels = Json::array();
  for (const auto& l : m.levels) levels.push_back(l.label);
  return {{"name", m.name},
          {"levels", levels},
          {"modes", m.modes},
          {"couplings", couplings},
          {"detunings", m.detunings},
          {"resonance_pattern", m.resonance_pattern},
          {"seed", m.format(m.seed)},
          {"fock_cutoff", m.fock_cutoff},
          {"decaying_levels", m.decaying_levels}};
}

inline Json to_json(const EffectiveSystem& e, std::span<const int> groups = {}) {
  Json j{{"basis", basis_json(e.basis, groups)},
         {"h_eff", to_json(e.h_eff.entries)},
         {"g_eff", e.g_eff},
         {"delta_eff", e.delta_eff},
         {"eta", e.eta},
         {"asymmetry_before_symmetrisation", e.asymmetry},
         {"min_abs_eig_A", e.min_abs_eig_a},
         {"max_abs_eig_W0", e.max_abs_eig_w0},
         {"coupling_norm", e.coupling_norm}};
  j["warnings"] = e.warnings;
  return j;
}

inline Json to_json(const DecoherenceSpec& s) {
  return {{"kappa", s.kappa}, {"gamma", s.gamma}, {"decaying_levels", s.decaying_levels}, {"ground", s.ground}};
}

inline Json to_json(const GateResult& r, const UnitSystem& units = {}) {
  Json j{{"engine", r.engine}, {"labels", r.labels}, {"t_int", r.t_int}, {"t_closed_form", r.t_closed}};
  if (units.si()) {
    j["t_int_ms"] = units.to_ms(r.t_int);
    j["t_closed_form_ms"] = units.to_ms(r.t_closed);
  }
  j["truth_table"] = to_json(r.truth_table);
  j["truth_table_postselected"] = to_json(r.postselected());
  j["fidelity"] = r.fidelity;
  j["conditional_fidelity"] = r.conditional_fidelity;
  j["success_probability"] = r.success_probability;
  j["mean_fidelity"] = r.mean_fidelity();
  if (r.amplitudes.size()) j["amplitudes"] = to_json(r.amplitudes);
  j["warnings"] = r.warnings;
  return j;
}

/// CSV: time columns, then re/im/pop per basis state, then the norm.
inline void write_csv(std::ostream& os, const Trajectory& tr, const UnitSystem& units = {},
                      std::span<const int> groups = {}) {
  os << "gt";
  if (units.si()) os << ",t_ms";
  for (const auto& s : tr.basis) {
    const auto l = format_state(s, groups);
    os << ",re " << l << ",im " << l << ",pop " << l;
  }
  os << ",norm\n";
  const auto norms = tr.norms();
  for (std::size_t i = 0; i < tr.samples(); ++i) {
    os << fmt(tr.times[i]);
    if (units.si()) os << ',' << fmt(units.to_ms(tr.times[i]));
    for (Eigen::Index j = 0; j < tr.amplitudes.cols(); ++j) {
      const Complex a = tr.amplitudes(static_cast<Eigen::Index>(i), j);
      os << ',' << fmt(a.real()) << ',' << fmt(a.imag()) << ',' << fmt(std::norm(a));
    }
    os << ',' << fmt(norms(static_cast<Eigen::Index>(i))) << '\n';
  }
}

/// CSV: time columns, density-matrix diagonal per basis state, then the trace.
inline void write_csv(std::ostream& os, const DensityTrajectory& tr, const UnitSystem& units = {},
                      std::span<const int> groups = {}) {
  os << "gt";
  if (units.si()) os << ",t_ms";
  for (const auto& s : tr.basis) os << ",pop " << format_state(s, groups);
  os << ",trace\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    os << fmt(tr.times[i]);
    if (units.si()) os << ',' << fmt(units.to_ms(tr.times[i]));
    for (Eigen::Index j = 0; j < tr.rho[i].rows(); ++j) os << ',' << fmt(tr.rho[i](j, j).real());
    os << ',' << fmt(tr.rho[i].trace().real()) << '\n';
  }
}

/// CSV: input label, then one probability column per output label.
inline void write_truth_table_csv(std::ostream& os, const GateResult& r) {
  os << "input";
  for (const auto& l : r.labels) os << ",p_" << l;
  os << ",fidelity,conditional_fidelity\n";
  for (Eigen::Index i = 0; i < r.truth_table.rows(); ++i) {
    os << r.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < r.truth_table.cols(); ++j) os << ',' << fmt(r.truth_table(i, j));
    os << ',' << fmt(r.fidelity[static_cast<std::size_t>(i)]) << ','
       << fmt(r.conditional_fidelity[static_cast<std::size_t>(i)]) << '\n';
  }
}

}  // namespace cqed
