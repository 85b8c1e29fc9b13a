#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqed/linkage_model.hpp"

namespace cqed {

/// Ordered, duplicate-free list of basis states with an index.
/// `seeds` records the states enumeration started from; the Hamiltonian
/// builder uses the first seed of each component as its zero of energy.
class StateSpace {
 public:
  StateSpace() = default;

  explicit StateSpace(std::vector<BasisState> states, std::vector<BasisState> seeds = {})
      : states_(std::move(states)), seeds_(std::move(seeds)) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (!index_.emplace(states_[i], i).second) throw ValidationError("duplicate basis state");
    }
    for (const auto& s : seeds_)
      if (!contains(s)) throw ValidationError("seed is not a member of the state space");
  }

  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const BasisState& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<BasisState>& states() const { return states_; }
  const std::vector<BasisState>& seeds() const { return seeds_; }
  auto begin() const { return states_.begin(); }
  auto end() const { return states_.end(); }

  bool contains(const BasisState& s) const { return index_.count(s) != 0; }

  std::optional<std::size_t> find(const BasisState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const BasisState& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw ValidationError("state " + format_state(s) + " is not in the basis");
    return it->second;
  }

  /// Appends the states of `other` not already present.
  StateSpace merged(const StateSpace& other) const {
    auto states = states_;
    auto seeds = seeds_;
    for (const auto& s : other.states_)
      if (!contains(s)) states.push_back(s);
    for (const auto& s : other.seeds_)
      if (std::find(seeds.begin(), seeds.end(), s) == seeds.end()) seeds.push_back(s);
    return StateSpace(std::move(states), std::move(seeds));
  }

  /// Same set of states in the order given.
  StateSpace permuted(std::span<const BasisState> order) const {
    if (order.size() != size()) throw ValidationError("permutation has the wrong number of states");
    std::vector<BasisState> states(order.begin(), order.end());
    for (const auto& s : states)
      if (!contains(s)) throw ValidationError("permutation introduces " + format_state(s));
    return StateSpace(std::move(states), seeds_);
  }

  /// Sub-basis of the given indices; seeds outside it are dropped.
  StateSpace subset(std::span<const std::size_t> indices) const {
    std::vector<BasisState> states;
    states.reserve(indices.size());
    for (std::size_t i : indices) states.push_back(states_.at(i));
    std::vector<BasisState> seeds;
    for (const auto& s : seeds_)
      if (std::find(states.begin(), states.end(), s) != states.end()) seeds.push_back(s);
    return StateSpace(std::move(states), std::move(seeds));
  }

 private:
  std::vector<BasisState> states_;
  std::vector<BasisState> seeds_;
  std::map<BasisState, std::size_t> index_;
};

struct Neighbor {
  BasisState state;
  double amplitude = 0.0;
  std::size_t coupling = 0;
  bool forward = true;
};

/// States one coupling step away from `s`, sorted by (atom, occupations).
inline std::vector<Neighbor> coupling_neighbors(const LinkageModel& model, const BasisState& s) {
  std::vector<Neighbor> out;
  for (std::size_t k = 0; k < model.couplings.size(); ++k) {
    for (bool forward : {true, false}) {
      if (auto t = model.couplings[k].apply(s, forward, model.fock_cutoff))
        out.push_back({std::move(t->target), t->amplitude, k, forward});
    }
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) { return a.state < b.state; });
  return out;
}

/// States one decay event away: one photon lost from a mode, or a decaying
/// level relaxed to the ground level.
inline std::vector<BasisState> decay_neighbors(const LinkageModel& model, const BasisState& s,
                                               std::span<const std::string> decaying_levels) {
  std::vector<BasisState> out;
  for (std::size_t j = 0; j < s.photons.size(); ++j) {
    if (s.photons[j] > 0) {
      BasisState t = s;
      --t.photons[j];
      out.push_back(std::move(t));
    }
  }
  if (std::find(decaying_levels.begin(), decaying_levels.end(), s.atom) != decaying_levels.end()) {
    BasisState t = s;
    t.atom = model.ground;
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Connected component of `seed` under the model couplings (breadth first,
/// neighbours visited in sorted order). With `close_under_decay`, photon
/// loss and atomic relaxation of `decaying_levels` are followed as well.
inline StateSpace enumerate_reachable(const LinkageModel& model, const BasisState& seed, bool close_under_decay,
                                      std::span<const std::string> decaying_levels) {
  if (seed.photons.size() != model.mode_count())
    throw ValidationError("seed " + format_state(seed) + " does not match the model mode count");
  if (!model.has_level(seed.atom)) throw ValidationError("seed level '" + seed.atom + "' is not a model level");
  for (int n : seed.photons) {
    if (n < 0) throw ValidationError("negative occupation in seed");
    if (n > model.fock_cutoff)
      throw FockOverflowError("seed " + format_state(seed) + " exceeds the Fock cutoff " +
                              std::to_string(model.fock_cutoff));
  }
  std::vector<BasisState> order{seed};
  std::map<BasisState, bool> seen{{seed, true}};
  std::deque<BasisState> queue{seed};
  while (!queue.empty()) {
    BasisState cur = std::move(queue.front());
    queue.pop_front();
    std::vector<BasisState> next;
    for (auto& n : coupling_neighbors(model, cur)) next.push_back(std::move(n.state));
    if (close_under_decay) {
      for (auto& d : decay_neighbors(model, cur, decaying_levels)) next.push_back(std::move(d));
    }
    for (auto& n : next) {
      if (seen.emplace(n, true).second) {
        order.push_back(n);
        queue.push_back(std::move(n));
      }
    }
  }
  return StateSpace(std::move(order), {seed});
}

inline StateSpace enumerate_reachable(const LinkageModel& model, const BasisState& seed, bool close_under_decay) {
  return enumerate_reachable(model, seed, close_under_decay, model.decaying_levels);
}

/// Union of the components of several seeds, in seed order.
inline StateSpace enumerate_union(const LinkageModel& model, std::span<const BasisState> seeds,
                                  bool close_under_decay, std::span<const std::string> decaying_levels) {
  StateSpace out;
  for (const auto& s : seeds) {
    if (out.contains(s)) {
      out = out.merged(StateSpace({s}, {s}));
      continue;
    }
    out = out.merged(enumerate_reachable(model, s, close_under_decay, decaying_levels));
  }
  return out;
}

/// Reorders a component whose coupling graph is a simple path into path
/// order, starting from the seed when it is an end point, otherwise from the
/// smaller end point.
inline StateSpace chain_ordered(const LinkageModel& model, const StateSpace& basis) {
  const std::size_t n = basis.size();
  if (n == 0) return basis;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& nb : coupling_neighbors(model, basis[i])) {
      auto j = basis.find(nb.state);
      if (!j) throw ValidationError("basis is not closed under the model couplings");
      if (std::find(adj[i].begin(), adj[i].end(), *j) == adj[i].end()) adj[i].push_back(*j);
    }
  }
  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < n; ++i) {
    if (adj[i].size() > 2) throw ValidationError("component is not a chain: " + model.format(basis[i]) + " branches");
    if (adj[i].size() <= 1) ends.push_back(i);
  }
  if (ends.empty() || (n > 1 && ends.size() != 2)) throw ValidationError("component is not a simple chain");
  std::size_t start = ends.front();
  if (ends.size() == 2 && basis[ends[1]] < basis[ends[0]]) start = ends[1];
  if (!basis.seeds().empty()) {
    auto s = basis.find(basis.seeds().front());
    if (s && adj[*s].size() <= 1) start = *s;
  }
  std::vector<BasisState> order;
  std::vector<bool> used(n, false);
  std::size_t cur = start;
  for (;;) {
    order.push_back(basis[cur]);
    used[cur] = true;
    auto it = std::find_if(adj[cur].begin(), adj[cur].end(), [&](std::size_t j) { return !used[j]; });
    if (it == adj[cur].end()) break;
    cur = *it;
  }
  if (order.size() != n) throw ValidationError("component is not connected");
  return basis.permuted(order);
}

}  // namespace cqed
