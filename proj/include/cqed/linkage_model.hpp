#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cqed/core.hpp"

namespace cqed {

struct AtomLevel {
  std::string label;
  double energy = 0.0;  // informational; the builder works from detunings
};

/// Atom level plus per-mode photon occupations.
struct BasisState {
  std::string atom;
  std::vector<int> photons;

  auto operator<=>(const BasisState&) const = default;
  bool operator==(const BasisState&) const = default;

  int total_photons() const {
    int n = 0;
    for (int p : photons) n += p;
    return n;
  }
};

/// "|a 1010>" or, with groups {2,2,2}, "|a 10,01,10>".
inline std::string format_state(const BasisState& s, std::span<const int> groups = {}) {
  std::string out = "|" + s.atom + " ";
  std::size_t group = 0, in_group = 0;
  for (int n : s.photons) {
    if (!groups.empty() && group < groups.size() && in_group == static_cast<std::size_t>(groups[group])) {
      out += ',';
      ++group;
      in_group = 0;
    }
    out += std::to_string(n);
    ++in_group;
  }
  return out + ">";
}

/// One photon created (+1) or destroyed (-1) in `mode` when the atom goes
/// from -> to. The reverse transition applies the opposite change.
struct PhotonChange {
  std::size_t mode = 0;
  int delta = 0;
};

struct Transition {
  BasisState target;
  double amplitude = 0.0;  // coupling strength times Fock factors
};

/// Interaction term g |to><from| (x) photon operators + h.c.
/// An empty photon list is a classical drive (strength = Omega/2).
struct Coupling {
  std::string from;
  std::string to;
  std::vector<PhotonChange> photons;
  double strength = 0.0;
  std::string label;

  bool is_drive() const { return photons.empty(); }

  Coupling reversed() const {
    Coupling r{to, from, photons, strength, label};
    for (auto& p : r.photons) p.delta = -p.delta;
    return r;
  }

  /// Applies the term (forward) or its conjugate (backward) to `s`.
  /// Throws FockOverflowError if an occupation would exceed `cutoff`.
  std::optional<Transition> apply(const BasisState& s, bool forward, int cutoff) const {
    const std::string& need = forward ? from : to;
    if (s.atom != need) return std::nullopt;
    Transition t{s, strength};
    t.target.atom = forward ? to : from;
    for (const auto& p : photons) {
      if (p.mode >= s.photons.size()) throw ValidationError("coupling '" + label + "' references a missing mode");
      const int delta = forward ? p.delta : -p.delta;
      const int before = t.target.photons[p.mode];
      const int after = before + delta;
      if (after < 0) return std::nullopt;
      if (after > cutoff) {
        BasisState bad = t.target;
        bad.photons[p.mode] = after;
        throw FockOverflowError("Fock cutoff " + std::to_string(cutoff) + " exceeded by " + format_state(bad) +
                                " (reached from " + format_state(s) + " via " + label + ")");
      }
      t.target.photons[p.mode] = after;
      t.amplitude *= std::sqrt(static_cast<double>(std::max(before, after)));
    }
    return t;
  }
};

/// Declarative chain: couplings in chain order, with detunings[k-1] the
/// interaction-picture energy of chain state k (chain state 0 = seed = 0).
struct LinkageModel {
  std::string name;
  std::vector<AtomLevel> levels;
  std::vector<std::string> modes;
  std::vector<Coupling> couplings;
  std::vector<double> detunings;
  std::string resonance_pattern;
  BasisState seed;
  int fock_cutoff = 2;
  std::string ground = "a";
  std::vector<std::string> decaying_levels;
  std::vector<int> mode_groups;

  std::size_t mode_count() const { return modes.size(); }

  bool has_level(const std::string& label) const {
    return std::any_of(levels.begin(), levels.end(), [&](const AtomLevel& l) { return l.label == label; });
  }

  std::size_t level_index(const std::string& label) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i].label == label) return i;
    throw ValidationError("unknown level '" + label + "' in model '" + name + "'");
  }

  static std::string detuning_name(std::size_t k) { return "Delta" + std::to_string(k); }

  /// Index into `detunings` for a name like "Delta4" (1-based).
  std::size_t detuning_index(const std::string& name) const {
    if (name.rfind("Delta", 0) == 0) {
      try {
        const std::size_t k = std::stoul(name.substr(5));
        if (k >= 1 && k <= detunings.size()) return k - 1;
      } catch (const std::exception&) {
      }
    }
    throw ValidationError("unknown detuning '" + name + "' (model has Delta1..Delta" +
                          std::to_string(detunings.size()) + ")");
  }

  std::string format(const BasisState& s) const { return format_state(s, mode_groups); }

  /// Energy change when coupling k is traversed in chain direction.
  double detuning_step(std::size_t k) const { return detunings[k] - (k == 0 ? 0.0 : detunings[k - 1]); }

  void validate() const {
    std::set<std::string> labels;
    for (const auto& l : levels) {
      if (l.label.empty()) throw ValidationError("empty level label");
      if (!labels.insert(l.label).second) throw ValidationError("duplicate level label '" + l.label + "'");
    }
    if (!has_level(ground)) throw ValidationError("ground level '" + ground + "' is not a model level");
    if (fock_cutoff < 1) throw ValidationError("Fock cutoff must be at least 1");
    if (seed.photons.size() != modes.size())
      throw ValidationError("seed has " + std::to_string(seed.photons.size()) + " occupations, model has " +
                            std::to_string(modes.size()) + " modes");
    if (!has_level(seed.atom)) throw ValidationError("seed level '" + seed.atom + "' is not a model level");
    for (int n : seed.photons)
      if (n < 0 || n > fock_cutoff) throw ValidationError("seed occupation outside [0, cutoff]");
    if (detunings.size() != couplings.size())
      throw ValidationError("need one detuning per coupling: " + std::to_string(couplings.size()) + " couplings, " +
                            std::to_string(detunings.size()) + " detunings");
    if (resonance_pattern.size() != couplings.size() + 1)
      throw ValidationError("resonance pattern '" + resonance_pattern + "' must have " +
                            std::to_string(couplings.size() + 1) + " characters (one per chain state)");
    for (char c : resonance_pattern)
      if (c != '0' && c != '1') throw ValidationError("resonance pattern '" + resonance_pattern + "' must use only 0/1");
    for (const auto& c : couplings) {
      if (!has_level(c.from) || !has_level(c.to))
        throw ValidationError("coupling '" + c.label + "' references an unknown level");
      if (c.from == c.to) throw ValidationError("coupling '" + c.label + "' does not change the atomic level");
      if (!(c.strength >= 0.0) || !std::isfinite(c.strength))
        throw ValidationError("coupling '" + c.label + "' strength must be finite and non-negative");
      for (const auto& p : c.photons) {
        if (p.mode >= modes.size()) throw ValidationError("coupling '" + c.label + "' references a missing mode");
        if (p.delta != 1 && p.delta != -1) throw ValidationError("photon change must be +1 or -1");
      }
    }
    for (double d : detunings)
      if (!std::isfinite(d)) throw ValidationError("detunings must be finite");
    for (const auto& l : decaying_levels) {
      if (!has_level(l)) throw ValidationError("decaying level '" + l + "' is not a model level");
      if (l == ground) throw ValidationError("the ground level cannot decay");
    }
    (void)chain_states();
  }

  /// +1 when coupling k acts forward along the chain, -1 when it is written
  /// in the conjugate direction.
  std::vector<int> chain_orientation() const {
    std::vector<int> orientation;
    walk_chain(&orientation);
    return orientation;
  }

  /// Chain states 0..K obtained by applying each coupling once from the seed.
  std::vector<BasisState> chain_states() const { return walk_chain(nullptr); }

 private:
  std::vector<BasisState> walk_chain(std::vector<int>* orientation) const {
    std::vector<BasisState> chain{seed};
    for (const auto& c : couplings) {
      const BasisState& cur = chain.back();
      auto next = c.apply(cur, true, fock_cutoff);
      int dir = 1;
      if (!next) {
        next = c.apply(cur, false, fock_cutoff);
        dir = -1;
      }
      if (!next)
        throw ValidationError("couplings do not form a chain: '" + c.label + "' cannot act on " + format(cur));
      chain.push_back(next->target);
      if (orientation) orientation->push_back(dir);
    }
    return chain;
  }
};

}  // namespace cqed
