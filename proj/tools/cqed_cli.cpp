// Batch front-end: eliminate, run, sweep and truth-table on YAML scenarios.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace cqed;
using namespace cqed::cli;

namespace {

enum Exit { kOk = 0, kValidation = 2, kNumerical = 3 };

struct Overrides {
  std::string engine;
  std::optional<double> rtol, atol;
  std::string output_dir;
  std::optional<std::size_t> workers;
  bool quiet = false;
};

Scenario load(const std::string& path, const Overrides& o) {
  Scenario sc = load_scenario(path);
  if (!o.engine.empty()) sc.engine = parse_engine(o.engine);
  if (o.rtol) sc.tolerances.rtol = *o.rtol;
  if (o.atol) sc.tolerances.atol = *o.atol;
  if (!o.output_dir.empty()) sc.output_dir = o.output_dir;
  if (o.workers) sc.workers = *o.workers;
  return sc;
}

fs::path prepare_output(const Scenario& sc) {
  const fs::path dir(sc.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw ValidationError("write to '" + path.string() + "' failed");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json time_json(double gt, const UnitSystem& u) {
  Json j{{"gt", gt}};
  if (u.si()) j["ms"] = u.to_ms(gt);
  return j;
}

/// Full Hamiltonian on the seed component in chain order.
OperatorMatrix seed_hamiltonian(const LinkageModel& m) {
  return build_chain_hamiltonian(m, chain_ordered(m, enumerate_reachable(m, m.seed, false)));
}

Json closed_forms(const LinkageModel& m) {
  if (m.resonance_pattern == "10001") {
    const auto p = iswap_two_level_params(m);
    return {{"g1", {{"exact", p.g_exact}, {"approx", p.g_approx}}},
            {"Delta1", {{"exact", p.delta_exact}, {"approx", p.delta_approx}}}};
  }
  if (m.resonance_pattern == "11001" || m.resonance_pattern == "1001001") {
    const auto p = m.resonance_pattern == "11001" ? iswap_three_level_params(m) : fredkin_three_level_params(m);
    return {{"g1", {{"exact", p.g1_exact}, {"approx", p.g1_approx}}},
            {"g2", {{"exact", p.g2_exact}, {"approx", p.g2_approx}}},
            {"Delta1", {{"exact", p.delta1_exact}, {"approx", p.delta1_approx}}},
            {"Delta2", {{"exact", p.delta2_exact}, {"approx", p.delta2_approx}}}};
  }
  if (m.name == "not-gate") {
    const auto p = not_gate_params(m);
    return {{"g1", {{"exact", p.g_exact}, {"approx", p.g_approx}}},
            {"Delta1", {{"exact", p.delta_exact}, {"leading", p.delta_leading}, {"alternate", p.delta_alternate}}}};
  }
  return nullptr;
}

int cmd_eliminate(const Scenario& sc) {
  const LinkageModel m = build_model(sc);
  const auto h = seed_hamiltonian(m);
  const auto part = Partition::from_pattern(m, h.basis);
  const auto eff = eliminate(h, part);

  Json retained = Json::array(), eliminated = Json::array();
  for (auto i : part.p) retained.push_back(m.format(h.basis[i]));
  for (auto i : part.q) eliminated.push_back(m.format(h.basis[i]));

  // Resonance solutions for the free detunings.
  const auto free = sc.model.free_detunings.empty() ? default_free_detunings(m) : sc.model.free_detunings;
  Json resonance = Json::object();
  try {
    const auto tuned = tune_resonances(m, free);
    for (const auto& name : free) resonance[name] = tuned.detunings[tuned.detuning_index(name)];
  } catch (const ValidationError& e) {
    resonance["error"] = e.what();
  }

  Json out{{"scenario", scenario_json(sc)},
           {"model", to_json(m)},
           {"hamiltonian", to_json(h, m.mode_groups)},
           {"partition", {{"retained", retained}, {"eliminated", eliminated}}},
           {"effective", to_json(eff, m.mode_groups)},
           {"closed_form", closed_forms(m)},
           {"resonance", resonance}};
  try {
    out["t_closed_form"] = time_json(closed_form_time(eff), sc.units);
  } catch (const ValidationError&) {
    out["t_closed_form"] = nullptr;
  }
  std::cout << dump(out);
  for (const auto& w : eff.warnings) std::cerr << "warning: " << w << '\n';
  return kOk;
}

int cmd_run(const Scenario& sc, const Overrides& o) {
  const LinkageModel m = build_model(sc);
  const auto spec = decoherence(sc, m);
  spec.validate(m.mode_count());
  const BasisState input = sc.run.input.value_or(m.seed);
  if (input.photons.size() != m.mode_count())
    throw ValidationError("input " + m.format(input) + " does not match the model's " +
                          std::to_string(m.mode_count()) + " modes");

  const auto eff = effective_system(m);
  double t_closed = 0.0;
  try {
    t_closed = closed_form_time(eff);
  } catch (const ValidationError&) {
    if (!sc.run.t_max) throw ValidationError("model has no closed-form time; set run.t_max");
  }
  const double t_max = sc.run.t_max.value_or(2.0 * t_closed);
  const auto times = linspace(0.0, t_max, sc.run.samples);

  const auto dir = prepare_output(sc);
  const auto csv_path = dir / (sc.name + "_run.csv");
  std::ostringstream csv;
  Json final_pop = Json::object();
  std::vector<double> track;
  StateSpace basis;
  double final_norm = 0.0;

  // Peak population of the chain's last state, reported as the transfer time.
  const auto chain = m.chain_states();
  const BasisState output = chain.back();

  if (sc.engine == Engine::master) {
    const std::array<BasisState, 1> seeds{input};
    basis = decay_closed_basis(m, seeds, spec);
    const auto h = build_chain_hamiltonian(m, basis);
    const Vector v = unit_state(basis, input);
    const auto tr = evolve_master(h, v * v.adjoint(), spec, times, sc.tolerances);
    write_csv(csv, tr, sc.units, m.mode_groups);
    final_norm = tr.rho.back().trace().real();
    for (std::size_t i = 0; i < basis.size(); ++i)
      final_pop[m.format(basis[i])] = tr.rho.back()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    if (auto j = basis.find(output))
      for (const auto& r : tr.rho) track.push_back(r(static_cast<Eigen::Index>(*j), static_cast<Eigen::Index>(*j)).real());
  } else {
    const auto full = enumerate_reachable(m, input, false);
    auto h = conditional_hamiltonian(build_chain_hamiltonian(m, full), spec);
    if (sc.engine == Engine::effective) {
      const auto e = eliminate(h, Partition::from_pattern(m, full));
      for (const auto& w : e.warnings) std::cerr << "warning: " << w << '\n';
      h = e.h_eff;
    }
    basis = h.basis;
    if (!basis.find(input)) throw ValidationError("input " + m.format(input) + " is not a retained state");
    const auto tr = evolve(h, unit_state(basis, input), times);
    write_csv(csv, tr, sc.units, m.mode_groups);
    final_norm = tr.norms()(tr.norms().size() - 1);
    const Vector last = tr.final_state();
    for (std::size_t i = 0; i < basis.size(); ++i)
      final_pop[m.format(basis[i])] = std::norm(last(static_cast<Eigen::Index>(i)));
    if (basis.find(output))
      for (const auto& a : tr.amplitude_of(output)) track.push_back(std::norm(a));
  }
  write_file(csv_path, csv.str());

  Json summary{{"scenario", scenario_json(sc)},
               {"model", to_json(m)},
               {"decoherence", to_json(spec)},
               {"engine", engine_name(sc.engine)},
               {"input", m.format(input)},
               {"basis_size", basis.size()},
               {"samples", times.size()},
               {"t_max", time_json(t_max, sc.units)},
               {"effective", to_json(eff, m.mode_groups)}};
  if (t_closed > 0.0) summary["t_closed_form"] = time_json(t_closed, sc.units);
  if (!track.empty()) {
    const auto it = std::max_element(track.begin(), track.end());
    const auto i = static_cast<std::size_t>(it - track.begin());
    summary["transfer"] = {{"state", m.format(output)}, {"peak_population", *it}, {"t_peak", time_json(times[i], sc.units)}};
  }
  summary["final_norm"] = final_norm;
  summary["final_populations"] = final_pop;
  summary["csv"] = csv_path.filename().string();
  const auto json_path = dir / (sc.name + "_run.json");
  write_file(json_path, dump(summary));

  if (!o.quiet) {
    std::cout << "wrote " << csv_path.string() << " and " << json_path.string() << '\n';
    if (t_closed > 0.0) {
      std::cout << "closed-form interaction time: gt = " << fmt(t_closed);
      if (sc.units.si()) std::cout << " (" << fmt(sc.units.to_ms(t_closed)) << " ms)";
      std::cout << '\n';
    }
  }
  return kOk;
}

/// Applies one sweep value to a copy of the scenario.
std::pair<LinkageModel, Scenario> sweep_point(const Scenario& sc, const std::string& p, double v) {
  Scenario s = sc;
  if (p == "kappa") {
    s.kappa = {v};
    return {build_model(s), s};
  }
  if (p == "gamma") {
    s.gamma = v;
    return {build_model(s), s};
  }
  if (p == "t_int") {
    s.t_int = v;
    return {build_model(s), s};
  }
  return {build_model(s, {{p, v}}), s};
}

int cmd_sweep(const Scenario& sc, const Overrides& o) {
  if (!sc.sweep) throw ValidationError(sc.source + ": sweep needs a 'sweep' section");
  const auto& ax = *sc.sweep;
  const auto values = ax.values();
  // Validate the axis and the gate once before spending time on the pool.
  {
    const auto [m, s] = sweep_point(sc, ax.parameter, values.front());
    (void)gate_for(s, m);
  }

  std::vector<GateResult> results(values.size());
  parallel_for(values.size(), sc.workers, [&](std::size_t i) {
    const auto [m, s] = sweep_point(sc, ax.parameter, values[i]);
    const auto [enc, target] = gate_for(s, m);
    auto opt = run_options(s);
    opt.workers = 1;
    results[i] = run_gate(m, enc, decoherence(s, m), target, opt);
  });

  const auto& labels = results.front().labels;
  std::ostringstream csv;
  csv << ax.parameter << ",t_int";
  if (sc.units.si()) csv << ",t_int_ms";
  csv << ",mean_fidelity,min_fidelity,mean_conditional_fidelity";
  for (const auto& l : labels) csv << ",fidelity_" << l;
  for (const auto& l : labels) csv << ",conditional_fidelity_" << l;
  csv << '\n';
  Json warnings = Json::object();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& r = results[i];
    double cond = 0.0;
    for (double c : r.conditional_fidelity) cond += c;
    cond /= static_cast<double>(r.conditional_fidelity.size());
    csv << fmt(values[i]) << ',' << fmt(r.t_int);
    if (sc.units.si()) csv << ',' << fmt(sc.units.to_ms(r.t_int));
    csv << ',' << fmt(r.mean_fidelity()) << ',' << fmt(*std::min_element(r.fidelity.begin(), r.fidelity.end())) << ','
        << fmt(cond);
    for (double f : r.fidelity) csv << ',' << fmt(f);
    for (double f : r.conditional_fidelity) csv << ',' << fmt(f);
    csv << '\n';
    if (!r.warnings.empty()) warnings[fmt(values[i])] = r.warnings;
  }

  const auto dir = prepare_output(sc);
  const auto csv_path = dir / (sc.name + "_sweep.csv");
  write_file(csv_path, csv.str());
  const auto [m0, s0] = sweep_point(sc, ax.parameter, values.front());
  Json sidecar{{"scenario", scenario_json(sc)},
               {"model_at_first_point", to_json(m0)},
               {"decoherence_at_first_point", to_json(decoherence(s0, m0))},
               {"values", values},
               {"warnings", warnings},
               {"csv", csv_path.filename().string()}};
  const auto json_path = dir / (sc.name + "_sweep.json");
  write_file(json_path, dump(sidecar));
  if (!o.quiet) std::cout << "wrote " << csv_path.string() << " and " << json_path.string() << '\n';
  return kOk;
}

int cmd_truth_table(const Scenario& sc, const Overrides& o) {
  const LinkageModel m = build_model(sc);
  const auto [enc, target] = gate_for(sc, m);
  const auto spec = decoherence(sc, m);
  auto opt = run_options(sc);
  opt.workers = sc.workers;
  const auto r = run_gate(m, enc, spec, target, opt);

  const auto dir = prepare_output(sc);
  std::ostringstream csv;
  write_truth_table_csv(csv, r);
  const auto csv_path = dir / (sc.name + "_truth_table.csv");
  write_file(csv_path, csv.str());
  Json sidecar{{"scenario", scenario_json(sc)},
               {"model", to_json(m)},
               {"decoherence", to_json(spec)},
               {"result", to_json(r, sc.units)},
               {"csv", csv_path.filename().string()}};
  const auto json_path = dir / (sc.name + "_truth_table.json");
  write_file(json_path, dump(sidecar));

  if (!o.quiet) {
    std::cout << "in\\out";
    for (const auto& l : r.labels) std::cout << '\t' << l;
    std::cout << "\tfidelity\n";
    for (Eigen::Index i = 0; i < r.truth_table.rows(); ++i) {
      std::cout << r.labels[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < r.truth_table.cols(); ++j) std::cout << '\t' << fmt(r.truth_table(i, j));
      std::cout << '\t' << fmt(r.fidelity[static_cast<std::size_t>(i)]) << '\n';
    }
    std::cout << "t_int: gt = " << fmt(r.t_int);
    if (sc.units.si()) std::cout << " (" << fmt(sc.units.to_ms(r.t_int)) << " ms)";
    std::cout << "\nwrote " << csv_path.string() << " and " << json_path.string() << '\n';
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity-QED photonic gate simulator"};
  app.require_subcommand(1);
  Overrides o;
  std::string config;
  const std::vector<std::string> engines{"full", "effective", "master"};

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "Scenario YAML file")->required();
    sub->add_option("--engine", o.engine, "Override the engine")->check(CLI::IsMember(engines));
    sub->add_option("--rtol", o.rtol, "Master-equation relative tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--atol", o.atol, "Master-equation absolute tolerance")->check(CLI::PositiveNumber);
    sub->add_option("-o,--output-dir", o.output_dir, "Directory for CSV and JSON output");
    sub->add_option("-j,--workers", o.workers, "Worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    sub->add_flag("-q,--quiet", o.quiet, "Do not print a summary");
    return sub;
  };
  auto* elim = add("eliminate", "Print H, the partition, H_eff and effective parameters as JSON");
  auto* run = add("run", "Integrate one input and write a trajectory CSV with a JSON summary");
  auto* sweep = add("sweep", "Gate fidelity against one parameter");
  auto* table = add("truth-table", "Gate truth table and fidelities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    const Scenario sc = load(config, o);
    if (elim->parsed()) return cmd_eliminate(sc);
    if (run->parsed()) return cmd_run(sc, o);
    if (sweep->parsed()) return cmd_sweep(sc, o);
    if (table->parsed()) return cmd_truth_table(sc, o);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  }
  return kValidation;
}
