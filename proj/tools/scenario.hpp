#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "cqed/cqed.hpp"
#include "cqed/io.hpp"

namespace cqed::cli {

inline constexpr int kSchemaVersion = 1;

/// Config problem, with the source position already in the message.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct ModelSpec {
  std::string builtin;                   // empty for inline models
  std::map<std::string, double> params;  // built-in parameters (g, Delta, Delta1, ...)
  std::optional<LinkageModel> inline_model;
  bool calibrate = true;
  bool spin_j = false;
  std::vector<std::string> free_detunings;  // empty: one per retained state
};

struct GateSpec {
  std::optional<LogicalEncoding> encoding;  // default from the built-in model
  std::string target;                       // iswap | fredkin | not | cz | identity
};

struct RunSpec {
  std::optional<BasisState> input;  // default: model seed
  std::optional<double> t_max;      // default: 2 x closed-form time
  std::size_t samples = 2001;
};

struct SweepAxis {
  std::string parameter;
  double from = 0.0;
  double to = 0.0;
  std::size_t points = 0;
  bool log = false;

  std::vector<double> values() const {
    if (points == 1) return {from};
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(points - 1);
      out[i] = log ? std::exp(std::log(from) + u * (std::log(to) - std::log(from))) : from + u * (to - from);
    }
    out.front() = from;
    out.back() = to;
    return out;
  }
};

struct Scenario {
  int schema_version = kSchemaVersion;
  std::string name = "scenario";
  ModelSpec model;
  Engine engine = Engine::full;
  std::vector<double> kappa;
  double gamma = 0.0;
  std::optional<std::vector<std::string>> decaying_levels;  // default: the model's
  std::optional<double> t_int;
  bool refine = true;
  MasterOptions tolerances;
  GateSpec gate;
  RunSpec run;
  std::optional<SweepAxis> sweep;
  std::string output_dir = "out";
  std::size_t workers = 1;
  UnitSystem units;
  std::string source;  // config file path, for messages
};

namespace detail {

inline std::string where(const std::string& file, const YAML::Mark& m) {
  if (m.is_null()) return file;
  return file + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

/// Typed access with positioned errors.
class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
    throw ConfigError(where(file_, n.Mark()) + ": " + msg);
  }

  template <class T>
  T as(const YAML::Node& n, const std::string& what) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, "'" + what + "' has the wrong type");
    }
  }

  double number(const YAML::Node& n, const std::string& what) const {
    const auto v = as<double>(n, what);
    if (!std::isfinite(v)) fail(n, "'" + what + "' must be finite");
    return v;
  }

  void keys(const YAML::Node& n, const std::string& what, const std::vector<std::string>& allowed) const {
    if (!n.IsMap()) fail(n, "'" + what + "' must be a mapping");
    for (const auto& kv : n) {
      const auto k = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        fail(kv.first, "unknown key '" + k + "' in '" + what + "'");
    }
  }

  std::vector<std::string> strings(const YAML::Node& n, const std::string& what) const {
    if (!n.IsSequence()) fail(n, "'" + what + "' must be a list");
    std::vector<std::string> out;
    for (const auto& e : n) out.push_back(as<std::string>(e, what));
    return out;
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& what) const {
    if (n.IsScalar()) return {number(n, what)};
    if (!n.IsSequence()) fail(n, "'" + what + "' must be a number or a list");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(number(e, what));
    return out;
  }

  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

/// "a 1010", "|a 10,01,10>" or {atom: a, photons: [1, 0, 1, 0]}.
inline BasisState parse_state(const Reader& r, const YAML::Node& n, const std::string& what) {
  BasisState s;
  if (n.IsMap()) {
    r.keys(n, what, {"atom", "photons"});
    if (!n["atom"] || !n["photons"]) r.fail(n, "'" + what + "' needs 'atom' and 'photons'");
    s.atom = r.as<std::string>(n["atom"], what + ".atom");
    s.photons = r.as<std::vector<int>>(n["photons"], what + ".photons");
    return s;
  }
  std::string text = r.as<std::string>(n, what);
  std::erase_if(text, [](char c) { return c == '|' || c == '>' || c == ','; });
  const auto space = text.find(' ');
  if (space == std::string::npos || space == 0) r.fail(n, "'" + what + "' must look like 'a 1010'");
  s.atom = text.substr(0, space);
  for (char c : text.substr(space + 1)) {
    if (c == ' ') continue;
    if (c < '0' || c > '9') r.fail(n, "'" + what + "' has a non-digit occupation '" + std::string(1, c) + "'");
    s.photons.push_back(c - '0');
  }
  return s;
}

inline void check_pattern(const Reader& r, const YAML::Node& n, const std::string& pattern, std::size_t couplings) {
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] != '0' && pattern[i] != '1') {
      YAML::Mark m = n.Mark();
      // Plain and quoted scalars both start at the mark; quotes add one column.
      if (!m.is_null()) m.column += static_cast<int>(i) + (n.Tag() == "!" ? 1 : 0);
      throw ConfigError(where(r.file(), m) + ": pattern '" + pattern + "' has '" + std::string(1, pattern[i]) +
                        "' at position " + std::to_string(i + 1) + " (only 0 and 1 are allowed)");
    }
  }
  if (pattern.size() != couplings + 1)
    r.fail(n, "pattern '" + pattern + "' must have " + std::to_string(couplings + 1) +
                  " characters (one per chain state)");
}

inline LinkageModel parse_inline_model(const Reader& r, const YAML::Node& n) {
  r.keys(n, "model.inline", {"name", "levels", "modes", "couplings", "detunings", "pattern", "seed", "fock_cutoff",
                             "ground", "decaying_levels", "mode_groups"});
  for (const char* k : {"levels", "modes", "couplings", "detunings", "pattern", "seed"})
    if (!n[k]) r.fail(n, std::string("inline model needs '") + k + "'");
  LinkageModel m;
  m.name = n["name"] ? r.as<std::string>(n["name"], "name") : "inline";
  for (const auto& l : r.strings(n["levels"], "levels")) m.levels.push_back({l});
  m.modes = r.strings(n["modes"], "modes");
  if (!n["couplings"].IsSequence()) r.fail(n["couplings"], "'couplings' must be a list");
  std::size_t k = 0;
  for (const auto& c : n["couplings"]) {
    ++k;
    r.keys(c, "coupling", {"from", "to", "g", "label", "photons"});
    if (!c["from"] || !c["to"] || !c["g"]) r.fail(c, "coupling needs 'from', 'to' and 'g'");
    Coupling cp;
    cp.from = r.as<std::string>(c["from"], "from");
    cp.to = r.as<std::string>(c["to"], "to");
    cp.strength = r.number(c["g"], "g");
    cp.label = c["label"] ? r.as<std::string>(c["label"], "label") : "g" + std::to_string(k);
    if (c["photons"]) {
      if (!c["photons"].IsSequence()) r.fail(c["photons"], "'photons' must be a list");
      for (const auto& p : c["photons"]) {
        r.keys(p, "photons", {"mode", "delta"});
        if (!p["mode"] || !p["delta"]) r.fail(p, "photon change needs 'mode' and 'delta'");
        const auto mode = r.as<std::string>(p["mode"], "mode");
        const auto it = std::find(m.modes.begin(), m.modes.end(), mode);
        if (it == m.modes.end()) r.fail(p["mode"], "unknown mode '" + mode + "'");
        const int delta = r.as<int>(p["delta"], "delta");
        if (delta != 1 && delta != -1) r.fail(p["delta"], "'delta' must be +1 (emit) or -1 (absorb)");
        cp.photons.push_back({static_cast<std::size_t>(it - m.modes.begin()), delta});
      }
    }
    m.couplings.push_back(cp);
  }
  m.detunings = r.numbers(n["detunings"], "detunings");
  m.resonance_pattern = r.as<std::string>(n["pattern"], "pattern");
  check_pattern(r, n["pattern"], m.resonance_pattern, m.couplings.size());
  m.seed = parse_state(r, n["seed"], "seed");
  if (n["fock_cutoff"]) m.fock_cutoff = r.as<int>(n["fock_cutoff"], "fock_cutoff");
  if (n["ground"]) m.ground = r.as<std::string>(n["ground"], "ground");
  if (n["decaying_levels"]) m.decaying_levels = r.strings(n["decaying_levels"], "decaying_levels");
  if (n["mode_groups"]) m.mode_groups = r.as<std::vector<int>>(n["mode_groups"], "mode_groups");
  try {
    m.validate();
  } catch (const ValidationError& e) {
    r.fail(n, e.what());
  }
  return m;
}

inline LogicalEncoding parse_encoding(const Reader& r, const YAML::Node& n, const LinkageModel* model) {
  r.keys(n, "gate.encoding", {"qubits", "atom"});
  if (!n["qubits"] || !n["qubits"].IsSequence()) r.fail(n, "encoding needs a 'qubits' list of [one, zero] mode pairs");
  LogicalEncoding enc;
  if (n["atom"]) enc.atom = r.as<std::string>(n["atom"], "atom");
  auto mode_index = [&](const YAML::Node& m) -> std::size_t {
    if (model) {
      const auto name = r.as<std::string>(m, "mode");
      const auto it = std::find(model->modes.begin(), model->modes.end(), name);
      if (it != model->modes.end()) return static_cast<std::size_t>(it - model->modes.begin());
    }
    const int i = r.as<int>(m, "mode index");
    if (i < 0) r.fail(m, "mode index must be non-negative");
    return static_cast<std::size_t>(i);
  };
  for (const auto& q : n["qubits"]) {
    if (!q.IsSequence() || q.size() != 2) r.fail(q, "each qubit is a [one, zero] pair of modes");
    enc.qubits.push_back({mode_index(q[0]), mode_index(q[1])});
  }
  if (model) enc.mode_count = model->mode_count();
  return enc;
}

}  // namespace detail

/// Parses a scenario document. Every problem is reported as
/// "file:line:column: message".
inline Scenario parse_scenario(const YAML::Node& root, const std::string& file = "<config>") {
  const detail::Reader r(file);
  if (!root.IsMap()) r.fail(root, "config must be a mapping");
  r.keys(root, "config", {"schema_version", "name", "model", "engine", "decoherence", "gate", "run", "sweep",
                          "output", "units", "workers", "tolerances"});
  Scenario sc;
  sc.source = file;
  if (!root["schema_version"]) r.fail(root, "missing 'schema_version'");
  sc.schema_version = r.as<int>(root["schema_version"], "schema_version");
  if (sc.schema_version != kSchemaVersion)
    r.fail(root["schema_version"], "unsupported schema_version " + std::to_string(sc.schema_version) +
                                       " (expected " + std::to_string(kSchemaVersion) + ")");
  if (root["name"]) sc.name = r.as<std::string>(root["name"], "name");

  const auto model = root["model"];
  if (!model) r.fail(root, "missing 'model'");
  if (model.IsScalar()) {
    sc.model.builtin = r.as<std::string>(model, "model");
  } else {
    r.keys(model, "model", {"builtin", "inline", "params", "calibrate", "spin_j", "free_detunings"});
    if (model["builtin"].IsDefined() == model["inline"].IsDefined())
      r.fail(model, "model needs exactly one of 'builtin' and 'inline'");
    if (model["builtin"]) sc.model.builtin = r.as<std::string>(model["builtin"], "builtin");
    if (model["inline"]) sc.model.inline_model = detail::parse_inline_model(r, model["inline"]);
    if (model["params"]) {
      if (!model["params"].IsMap()) r.fail(model["params"], "'params' must be a mapping");
      if (sc.model.builtin.empty()) r.fail(model["params"], "'params' applies to built-in models only");
      for (const auto& kv : model["params"])
        sc.model.params[kv.first.as<std::string>()] = r.number(kv.second, kv.first.as<std::string>());
    }
    if (model["calibrate"]) sc.model.calibrate = r.as<bool>(model["calibrate"], "calibrate");
    if (model["spin_j"]) sc.model.spin_j = r.as<bool>(model["spin_j"], "spin_j");
    if (model["free_detunings"]) sc.model.free_detunings = r.strings(model["free_detunings"], "free_detunings");
  }
  if (!sc.model.builtin.empty()) {
    const auto& names = builtin_model_names();
    if (std::find(names.begin(), names.end(), sc.model.builtin) == names.end()) {
      const auto n = model.IsScalar() ? model : model["builtin"];
      std::string known;
      for (const auto& s : names) known += (known.empty() ? "" : ", ") + s;
      r.fail(n, "unknown built-in model '" + sc.model.builtin + "' (" + known + ")");
    }
  }

  if (root["engine"]) {
    try {
      sc.engine = parse_engine(r.as<std::string>(root["engine"], "engine"));
    } catch (const ValidationError& e) {
      r.fail(root["engine"], e.what());
    }
  }

  if (const auto d = root["decoherence"]) {
    r.keys(d, "decoherence", {"kappa", "gamma", "decaying_levels"});
    if (d["kappa"]) sc.kappa = r.numbers(d["kappa"], "kappa");
    if (d["gamma"]) sc.gamma = r.number(d["gamma"], "gamma");
    if (d["decaying_levels"]) sc.decaying_levels = r.strings(d["decaying_levels"], "decaying_levels");
    for (double k : sc.kappa)
      if (k < 0.0) r.fail(d["kappa"], "'kappa' must be non-negative");
    if (sc.gamma < 0.0) r.fail(d["gamma"], "'gamma' must be non-negative");
  }

  if (const auto g = root["gate"]) {
    r.keys(g, "gate", {"encoding", "target", "t_int", "refine"});
    if (g["target"]) sc.gate.target = r.as<std::string>(g["target"], "target");
    if (g["encoding"]) {
      // Mode names resolve against the model; the built-in structure does not depend on params.
      const LinkageModel m = sc.model.inline_model ? *sc.model.inline_model : builtin_model(sc.model.builtin);
      sc.gate.encoding = detail::parse_encoding(r, g["encoding"], &m);
    }
    if (g["t_int"]) {
      sc.t_int = r.number(g["t_int"], "t_int");
      if (*sc.t_int < 0.0) r.fail(g["t_int"], "'t_int' must be non-negative");
    }
    if (g["refine"]) sc.refine = r.as<bool>(g["refine"], "refine");
  }

  if (const auto run = root["run"]) {
    r.keys(run, "run", {"input", "t_max", "samples"});
    if (run["input"]) sc.run.input = detail::parse_state(r, run["input"], "input");
    if (run["t_max"]) {
      sc.run.t_max = r.number(run["t_max"], "t_max");
      if (*sc.run.t_max <= 0.0) r.fail(run["t_max"], "'t_max' must be positive");
    }
    if (run["samples"]) {
      const int s = r.as<int>(run["samples"], "samples");
      if (s < 2) r.fail(run["samples"], "'samples' must be at least 2");
      sc.run.samples = static_cast<std::size_t>(s);
    }
  }

  if (const auto s = root["sweep"]) {
    r.keys(s, "sweep", {"parameter", "from", "to", "points", "spacing"});
    for (const char* k : {"parameter", "from", "to", "points"})
      if (!s[k]) r.fail(s, std::string("sweep needs '") + k + "'");
    SweepAxis ax;
    ax.parameter = r.as<std::string>(s["parameter"], "parameter");
    ax.from = r.number(s["from"], "from");
    ax.to = r.number(s["to"], "to");
    const int pts = r.as<int>(s["points"], "points");
    if (pts < 1) r.fail(s["points"], "'points' must be at least 1");
    ax.points = static_cast<std::size_t>(pts);
    if (s["spacing"]) {
      const auto sp = r.as<std::string>(s["spacing"], "spacing");
      if (sp != "linear" && sp != "log") r.fail(s["spacing"], "'spacing' must be 'linear' or 'log'");
      ax.log = sp == "log";
    }
    if (ax.log && (ax.from <= 0.0 || ax.to <= 0.0)) r.fail(s, "log spacing needs a positive range");
    if (ax.points > 1 && ax.from == ax.to) r.fail(s, "sweep range is empty");
    sc.sweep = ax;
  }

  if (const auto o = root["output"]) {
    r.keys(o, "output", {"dir"});
    if (o["dir"]) sc.output_dir = r.as<std::string>(o["dir"], "dir");
  }

  if (const auto u = root["units"]) {
    r.keys(u, "units", {"system", "g_over_2pi_hz"});
    const auto system = u["system"] ? r.as<std::string>(u["system"], "system") : std::string("dimensionless");
    if (system == "si") {
      if (!u["g_over_2pi_hz"]) r.fail(u, "SI units need 'g_over_2pi_hz'");
      const double hz = r.number(u["g_over_2pi_hz"], "g_over_2pi_hz");
      if (hz <= 0.0) r.fail(u["g_over_2pi_hz"], "'g_over_2pi_hz' must be positive");
      sc.units.g_over_2pi_hz = hz;
    } else if (system != "dimensionless") {
      r.fail(u["system"], "'system' must be 'dimensionless' or 'si'");
    }
  }

  if (root["workers"]) {
    const int w = r.as<int>(root["workers"], "workers");
    if (w < 1) r.fail(root["workers"], "'workers' must be at least 1");
    sc.workers = static_cast<std::size_t>(w);
  }

  if (const auto t = root["tolerances"]) {
    r.keys(t, "tolerances", {"rtol", "atol"});
    if (t["rtol"]) sc.tolerances.rtol = r.number(t["rtol"], "rtol");
    if (t["atol"]) sc.tolerances.atol = r.number(t["atol"], "atol");
    if (!(sc.tolerances.rtol > 0.0) || !(sc.tolerances.atol > 0.0)) r.fail(t, "tolerances must be positive");
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path + ": cannot open config file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(detail::where(path, e.mark) + ": " + e.msg);
  }
  return parse_scenario(root, path);
}

/// Built-in parameters, with `name = value` overriding.
inline LinkageModel build_model(const Scenario& sc, const std::map<std::string, double>& overrides = {}) {
  LinkageModel m;
  if (sc.model.inline_model) {
    m = *sc.model.inline_model;
    for (const auto& [k, v] : overrides) {
      if (k.rfind("Delta", 0) == 0) {
        m.detunings[m.detuning_index(k)] = v;
      } else if (k.size() > 1 && k[0] == 'g' && std::isdigit(static_cast<unsigned char>(k[1]))) {
        const auto i = std::stoul(k.substr(1));
        if (i < 1 || i > m.couplings.size()) throw ValidationError("inline model has no coupling '" + k + "'");
        m.couplings[i - 1].strength = v;
      } else {
        throw ValidationError("inline models accept Delta<k> and g<k> parameters, not '" + k + "'");
      }
    }
  } else {
    auto p = sc.model.params;
    for (const auto& [k, v] : overrides) p[k] = v;
    m = builtin_model(sc.model.builtin, p);
  }
  if (!sc.model.calibrate) return m;
  const auto free = sc.model.free_detunings.empty() ? default_free_detunings(m) : sc.model.free_detunings;
  m = tune_resonances(std::move(m), free);
  if (sc.model.spin_j) m = tune_resonances(spin_j_match(std::move(m)), free);
  return m;
}

inline DecoherenceSpec decoherence(const Scenario& sc, const LinkageModel& m) {
  DecoherenceSpec d;
  d.kappa = sc.kappa;
  d.gamma = sc.gamma;
  d.decaying_levels = sc.decaying_levels.value_or(m.decaying_levels);
  d.ground = m.ground;
  return d;
}

/// Logical encoding and target gate for the scenario's model.
inline std::pair<LogicalEncoding, Matrix> gate_for(const Scenario& sc, const LinkageModel& m) {
  std::string target = sc.gate.target;
  std::optional<LogicalEncoding> enc = sc.gate.encoding;
  const std::string& b = sc.model.builtin;
  if (b == "iswap-10001" || b == "iswap-11001") {
    if (!enc) enc = iswap_encoding();
    if (target.empty()) target = "iswap";
  } else if (b == "fredkin-1001001") {
    if (!enc) enc = fredkin_encoding();
    if (target.empty()) target = "fredkin";
  } else if (b == "not-gate") {
    if (!enc) enc = not_encoding();
    if (target.empty()) target = "not";
  }
  if (!enc) throw ValidationError("model '" + m.name + "' has no logical encoding; set gate.encoding");
  if (target.empty()) throw ValidationError("model '" + m.name + "' has no target gate; set gate.target");
  if (enc->mode_count == 0) enc->mode_count = m.mode_count();
  Matrix u;
  if (target == "iswap") u = iswap_target();
  else if (target == "fredkin") u = fredkin_target();
  else if (target == "not") u = not_target();
  else if (target == "cz") u = cz_target();
  else if (target == "identity") u = Matrix::Identity(static_cast<Eigen::Index>(enc->dimension()),
                                                      static_cast<Eigen::Index>(enc->dimension()));
  else throw ValidationError("unknown gate target '" + target + "' (iswap, fredkin, not, cz, identity)");
  if (u.rows() != static_cast<Eigen::Index>(enc->dimension()))
    throw ValidationError("target '" + target + "' does not match a " + std::to_string(enc->qubit_count()) +
                          "-qubit encoding");
  return {*enc, u};
}

inline RunOptions run_options(const Scenario& sc) {
  RunOptions o;
  o.engine = sc.engine;
  o.t_int = sc.t_int;
  o.refine = sc.refine;
  o.master = sc.tolerances;
  return o;
}

/// Fully resolved parameters for JSON sidecars.
inline Json scenario_json(const Scenario& sc) {
  Json j{{"schema_version", sc.schema_version}, {"name", sc.name}, {"source", sc.source}};
  Json model{{"calibrate", sc.model.calibrate}, {"spin_j", sc.model.spin_j}};
  if (!sc.model.builtin.empty()) {
    model["builtin"] = sc.model.builtin;
    model["params"] = sc.model.params;
  } else {
    model["inline"] = true;
  }
  if (!sc.model.free_detunings.empty()) model["free_detunings"] = sc.model.free_detunings;
  j["model"] = model;
  j["engine"] = engine_name(sc.engine);
  j["tolerances"] = {{"rtol", sc.tolerances.rtol}, {"atol", sc.tolerances.atol}};
  if (sc.t_int) j["t_int_requested"] = *sc.t_int;
  j["refine"] = sc.refine;
  j["units"] = sc.units.si() ? Json{{"system", "si"}, {"g_over_2pi_hz", *sc.units.g_over_2pi_hz}}
                             : Json{{"system", "dimensionless"}};
  j["workers"] = sc.workers;
  if (sc.sweep)
    j["sweep"] = {{"parameter", sc.sweep->parameter}, {"from", sc.sweep->from}, {"to", sc.sweep->to},
                  {"points", sc.sweep->points}, {"spacing", sc.sweep->log ? "log" : "linear"}};
  return j;
}

}  // namespace cqed::cli
