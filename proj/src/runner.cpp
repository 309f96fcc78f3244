// Copyright 2026 The qsep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qsep/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <thread>

#include "qsep/approx.hpp"
#include "qsep/csv.hpp"
#include "qsep/entropy.hpp"
#include "qsep/error.hpp"
#include "qsep/fixtures.hpp"
#include "qsep/gibbs.hpp"
#include "qsep/qmat_json.hpp"
#include "qsep/relent.hpp"
#include "qsep/spectra.hpp"

#ifndef QSEP_VERSION
#define QSEP_VERSION "0.0.0"
#endif

namespace qsep {

using nlohmann::json;

const char* version_string() { return QSEP_VERSION; }

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> cmds{"entropy", "gibbs", "zeta",   "approx", "er",
                                             "er-reg",  "er-energy", "fda", "verify", "theorem2"};
  return cmds;
}

// ---------------------------------------------------------------------------
// config

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  ExperimentConfig c;
  c.base_dir = base_dir;
  if (!j.contains("command") || !j.at("command").is_string()) throw UsageError("config.command: missing or not a string");
  c.command = j.at("command").get<std::string>();
  const auto& cmds = known_commands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end()) {
    throw UsageError("config.command: unknown command '" + c.command + "'");
  }
  for (const char* key : {"inputs", "params"}) {
    if (j.contains(key) && !j.at(key).is_object()) throw UsageError(std::string("config.") + key + ": expected an object");
  }
  if (j.contains("inputs")) c.inputs = j.at("inputs");
  if (j.contains("params")) c.params = j.at("params");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw UsageError("config.seed: expected a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw UsageError("config.output: expected a string");
    c.output = j.at("output").get<std::string>();
  }
  if (c.output.empty()) c.output = c.command;
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

json ExperimentConfig::to_json() const {
  return {{"command", command}, {"inputs", inputs}, {"params", params}, {"seed", seed}, {"output", output}};
}

json RunRecord::to_json() const {
  return {{"version", version},       {"config", config},     {"results", results},
          {"violations", violations}, {"errors", errors},     {"wall_time_s", wall_time}};
}

DensityOp resolve_state(const json& ref, const std::filesystem::path& base_dir) {
  if (ref.is_object()) return state_from_json(ref);
  if (!ref.is_string()) throw UsageError("inputs.state: expected a string or a state object");
  const std::string s = ref.get<std::string>();
  if (s.rfind("fixture:", 0) == 0) return load_fixture(s.substr(8));
  const std::filesystem::path p = std::filesystem::path(s).is_absolute() ? std::filesystem::path(s) : base_dir / s;
  if (!std::filesystem::exists(p)) throw UsageError("inputs.state: file not found: " + p.string());
  return load_state(p);
}

void save_record(const RunRecord& record, const std::string& stem, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [suffix, text] : record.tables) {
    std::ofstream f(dir / (stem + suffix + ".csv"), std::ios::binary);
    if (!f) throw Error("cannot write into " + dir.string());
    f << text;
  }
  std::ofstream f(dir / (stem + ".json"), std::ios::binary);
  if (!f) throw Error("cannot write into " + dir.string());
  f << record.to_json().dump(2) << "\n";
}

namespace {

// ---------------------------------------------------------------------------
// parameter access

template <class T>
T param(const json& obj, const std::string& key, const T& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(where + "." + key + ": wrong type");
  }
}

template <class T>
T required(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw UsageError(where + "." + key + ": missing");
  T v = param<T>(obj, key, T{}, where);
  if constexpr (requires { v.empty(); }) {
    if (v.empty()) throw UsageError(where + "." + key + ": must be nonempty");
  }
  return v;
}

SolverOptions solver_options(const ExperimentConfig& c) {
  SolverOptions o;
  const json s = c.params.value("solver", json::object());
  o.max_iters = param(s, "max_iters", o.max_iters, "params.solver");
  o.tol = param(s, "tol", o.tol, "params.solver");
  o.restarts = param(s, "restarts", o.restarts, "params.solver");
  o.max_sweeps = param(s, "max_sweeps", o.max_sweeps, "params.solver");
  o.inner_steps = param(s, "inner_steps", o.inner_steps, "params.solver");
  o.seed = c.seed;
  return o;
}

Partition partition_of(const ExperimentConfig& c, const DensityOp& rho) {
  if (!c.params.contains("partition")) return Partition::finest(static_cast<int>(rho.sig().parties()));
  const auto groups = param<std::vector<std::vector<int>>>(c.params, "partition", {}, "params");
  try {
    Partition p(groups);
    if (p.parties() != static_cast<int>(rho.sig().parties())) throw InvalidArgument("wrong number of parties");
    return p;
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("params.partition: ") + e.what());
  }
}

DensityOp input_state(const ExperimentConfig& c) {
  if (!c.inputs.contains("state")) throw UsageError("inputs.state: missing");
  try {
    return resolve_state(c.inputs.at("state"), c.base_dir);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(std::string("inputs.state: ") + e.what());
  }
}

template <class F>
auto literal(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw UsageError(where + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// per-cell evaluation, optionally concurrent; assembly order is the cell index

struct Cell {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> violations;
  json extra;
  std::string error;
};

std::vector<Cell> run_cells(std::size_t n, int jobs, const std::function<void(std::size_t, Cell&)>& body) {
  std::vector<Cell> cells(n);
  auto guarded = [&](std::size_t i) {
    try {
      body(i, cells[i]);
    } catch (const std::exception& e) {
      cells[i].rows.clear();
      cells[i].error = e.what();
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
    return cells;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) guarded(i);
    });
  }
  for (auto& t : pool) t.join();
  return cells;
}

void collect(RunRecord& rec, CsvTable& table, const std::vector<Cell>& cells, const std::string& label) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (const auto& r : cells[i].rows) table.add_row(r);
    for (const auto& v : cells[i].violations) rec.violations.push_back(v);
    if (!cells[i].error.empty()) rec.errors.push_back(label + " " + std::to_string(i) + ": " + cells[i].error);
  }
}

void check_expected(RunRecord& rec, const json& params, double value, const std::string& what) {
  if (!params.contains("expected")) return;
  const double expected = param<double>(params, "expected", 0.0, "params");
  const double tol = param<double>(params, "tolerance", 1e-6, "params");
  if (!(std::abs(value - expected) <= tol)) {
    rec.violations.push_back(what + " = " + format_double(value) + " outside " + format_double(expected) +
                             " +- " + format_double(tol));
  }
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t stream, std::size_t i) {
  return seed * 1000003ULL + stream * 7919ULL * 1000003ULL + i;
}

// ---------------------------------------------------------------------------
// commands

double chain_sum(const DensityOp& rho) {
  const int n = static_cast<int>(rho.sig().parties());
  double sum = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    std::vector<int> keep(static_cast<std::size_t>(n - k));
    std::iota(keep.begin(), keep.end(), k);
    const DensityOp tail = partial_trace(rho, keep);
    std::vector<int> rest(static_cast<std::size_t>(n - k - 1));
    std::iota(rest.begin(), rest.end(), 1);
    sum += mutual_information(tail, {{0}, rest});
  }
  return sum;
}

void entropy_rows(const DensityOp& rho, const DensityOp& sigma, double p, const std::string& label, Cell& out) {
  const double s = von_neumann_entropy(rho);
  const double qmi = mutual_information(rho);
  const double chain = std::abs(chain_sum(rho) - qmi);
  const DensityOp mix = DensityOp::sanitized(rho.sig(), p * rho.mat() + (1.0 - p) * sigma.mat());
  const double wk = p * s + (1.0 - p) * von_neumann_entropy(sigma) + binary_entropy(p) - von_neumann_entropy(mix);
  const int n = static_cast<int>(rho.sig().parties());
  double nmi = std::numeric_limits<double>::infinity();
  if (n >= 2) {
    std::vector<double> marg;
    for (int k = 0; k < n; ++k) marg.push_back(von_neumann_entropy(marginal(rho, k)));
    const double total = std::accumulate(marg.begin(), marg.end(), 0.0);
    for (int k = 0; k < n; ++k) nmi = std::min(nmi, 2.0 * (total - marg[static_cast<std::size_t>(k)]) - qmi);
  }
  out.rows.push_back({label, cell(s), cell(qmi), cell(chain), cell(wk), cell(nmi)});
  if (chain > 1e-8) out.violations.push_back(label + ": chain rule residual " + format_double(chain));
  if (wk < -1e-8) out.violations.push_back(label + ": concavity bound fails by " + format_double(-wk));
  if (nmi < -1e-8) out.violations.push_back(label + ": mutual information bound fails by " + format_double(-nmi));
}

void cmd_entropy(const ExperimentConfig& c, RunRecord& rec, int jobs) {
  const auto dims = param<std::vector<int>>(c.params, "dims", {2, 2, 2}, "params");
  const auto samples = param<std::size_t>(c.params, "samples", 100, "params");
  const DimSig sig = literal("params.dims", [&] { return DimSig(dims); });
  std::vector<DensityOp> listed;
  std::vector<std::string> names;
  if (c.inputs.contains("states")) {
    for (const auto& ref : c.inputs.at("states")) {
      listed.push_back(resolve_state(ref, c.base_dir));
      names.push_back(ref.is_string() ? ref.get<std::string>() : "inline");
    }
  }
  CsvTable table({"sample", "S", "qmi", "chain_residual", "wk_margin", "nmi_margin"});
  const auto cells = run_cells(listed.size() + samples, jobs, [&](std::size_t i, Cell& out) {
    if (i < listed.size()) {
      entropy_rows(listed[i], DensityOp::maximally_mixed(listed[i].sig()), 0.5, names[i], out);
      return;
    }
    const std::size_t k = i - listed.size();
    const std::uint64_t s = sample_seed(c.seed, 1, k);
    std::mt19937_64 gen(s);
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    entropy_rows(random_density(sig, sig.total(), s), random_density(sig, sig.total(), s ^ 0xABCDEFULL), p,
                 std::to_string(k), out);
  });
  collect(rec, table, cells, "sample");
  rec.tables[""] = table.str();
}

void cmd_gibbs(const ExperimentConfig& c, RunRecord& rec, int jobs) {
  const auto lit = required<std::string>(c.params, "hamiltonian", "params");
  const HamiltonianSpec h = literal("params.hamiltonian", [&] { return parse_hamiltonian(lit); });
  const auto energies = required<std::vector<double>>(c.params, "energies", "params");
  const auto dim = param<std::int64_t>(c.params, "dim", 0, "params");
  const auto growth = param<std::string>(c.params, "growth", "linear", "params");
  if (growth != "linear" && growth != "sqrt") throw UsageError("params.growth: expected 'linear' or 'sqrt'");

  CsvTable table({"E", "beta", "F_H", "ratio"});
  const auto cells = run_cells(energies.size(), jobs, [&](std::size_t i, Cell& out) {
    const double e = energies[i];
    const GibbsSolution g = solve_beta(h, e, dim);
    const double ratio = growth == "linear" ? g.entropy / e : g.entropy / std::sqrt(e);
    out.rows.push_back({cell(e), cell(g.beta), cell(g.entropy), cell(ratio)});
  });
  collect(rec, table, cells, "energy");
  rec.tables[""] = table.str();

  if (param<bool>(c.params, "lemma1", false, "params")) {
    CsvTable lt({"E", "F_H2", "F_H_sqrt", "holds"});
    const auto lc = run_cells(energies.size(), jobs, [&](std::size_t i, Cell& out) {
      for (const auto& r : lemma1_check(h, {energies[i]}, dim)) {
        out.rows.push_back({cell(r.E), cell(r.f_squared), cell(r.f_root), cell(r.holds)});
        if (!r.holds) out.violations.push_back("F_{H^2}(E) <= F_H(sqrt E) fails at E = " + format_double(r.E));
      }
    });
    collect(rec, lt, lc, "lemma1");
    rec.tables["_lemma1"] = lt.str();
  }
  if (c.params.contains("bound")) {
    const json& b = c.params.at("bound");
    BoundParams bp;
    bp.C = param<double>(b, "C", 0.0, "params.bound");
    bp.D = param<double>(b, "D", 0.0, "params.bound");
    bp.m = param<int>(b, "m", 1, "params.bound");
    bp.E = required<double>(b, "E", "params.bound");
    for (const auto& s : param<std::vector<std::string>>(b, "hamiltonians", {lit}, "params.bound")) {
      bp.hams.push_back(literal("params.bound.hamiltonians", [&] { return parse_hamiltonian(s); }));
    }
    const auto eps = required<std::vector<double>>(b, "eps", "params.bound");
    CsvTable bt({"eps", "bound"});
    const auto bc = run_cells(eps.size(), jobs, [&](std::size_t i, Cell& out) {
      out.rows.push_back({cell(eps[i]), cell(fcb_bound(bp, eps[i]))});
    });
    collect(rec, bt, bc, "eps");
    rec.tables["_bound"] = bt.str();
  }
}

void cmd_zeta(const ExperimentConfig& c, RunRecord& rec, int) {
  const auto lit = required<std::string>(c.params, "hamiltonian", "params");
  const HamiltonianSpec h = literal("params.hamiltonian", [&] { return parse_hamiltonian(lit); });
  const auto betas = param<std::vector<double>>(c.params, "betas", default_zeta_betas(), "params");
  const ZetaResult z = zeta_limit(h, betas);
  CsvTable table({"beta", "value"});
  for (std::size_t i = 0; i < z.betas.size(); ++i) table.add_row({cell(z.betas[i]), cell(z.values[i])});
  rec.tables[""] = table.str();
  rec.results["extrapolated"] = format_double(z.extrapolated);
  check_expected(rec, c.params, z.extrapolated, "zeta limit");
}

double state_function(const std::string& name, const DensityOp& rho) {
  if (name == "qmi") return mutual_information(rho);
  if (name == "entropy") return von_neumann_entropy(rho);
  throw UsageError("params.function: unknown function '" + name + "'");
}

void cmd_approx(const ExperimentConfig& c, RunRecord& rec, int jobs) {
  const DensityOp rho = input_state(c);
  const int n = static_cast<int>(rho.sig().parties());
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  const auto subset = param<std::vector<int>>(c.params, "subset", all, "params");
  const auto r_grid = required<std::vector<int>>(c.params, "r_grid", "params");
  const auto fname = param<std::string>(c.params, "function", "qmi", "params");
  (void)state_function(fname, DensityOp::maximally_mixed(DimSig({1})));
  std::vector<LocalChannel> channels;
  if (c.params.contains("channels")) {
    for (const auto& s : param<std::vector<std::string>>(c.params, "channels", {}, "params")) {
      channels.push_back(literal("params.channels", [&] { return LocalChannel::parse(s); }));
    }
  } else {
    channels = channel_registry();
  }
  std::optional<EnvelopeInputs> env;
  if (c.params.contains("envelope")) {
    const json& e = c.params.at("envelope");
    EnvelopeInputs in;
    in.C = required<double>(e, "C", "params.envelope");
    in.D = required<double>(e, "D", "params.envelope");
    in.m = required<int>(e, "m", "params.envelope");
    for (const auto& s : required<std::vector<std::string>>(e, "witnesses", "params.envelope")) {
      const SpectrumFamily fam = literal("params.envelope.witnesses", [&] { return parse_spectrum(s); });
      in.witnesses.push_back(build_fa_witness(fam).hamiltonian);
    }
    env = std::move(in);
  }
  CsvTable table({"channel", "r", "c_r", "eps_r", "gentle_bound", "Y_r", "f_exact", "f_trunc", "diff"});
  const auto cells = run_cells(channels.size(), jobs, [&](std::size_t i, Cell& out) {
    const std::vector<LocalChannel> chs(static_cast<std::size_t>(n), channels[i]);
    const StateFunction f = [&](const DensityOp& s) { return state_function(fname, apply_product_channel(s, chs)); };
    const ApproxReport report = theorem1_experiment(rho, f, subset, r_grid, env);
    for (const auto& r : report.rows) {
      out.rows.push_back({channels[i].describe(), cell(r.r), cell(r.c_r), cell(r.eps_r), cell(r.gentle_bound),
                           r.y ? cell(*r.y) : std::string(), cell(r.f_exact), cell(r.f_trunc), cell(r.diff)});
      if (!r.holds) {
        out.violations.push_back(channels[i].describe() + ": |f diff| exceeds Y_r at r = " + std::to_string(r.r));
      }
    }
  });
  collect(rec, table, cells, "channel");
  rec.tables[""] = table.str();
}

json solution_json(const ERSolution& s) {
  json atoms = json::array();
  for (const auto& a : s.atoms) {
    json factors = json::array();
    for (const auto& f : a.atom.factors) {
      json re = json::array();
      json im = json::array();
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        re.push_back(f(i).real());
        im.push_back(f(i).imag());
      }
      factors.push_back({{"re", re}, {"im", im}});
    }
    atoms.push_back({{"weight", a.weight}, {"factors", factors}});
  }
  return {{"value", s.value},       {"gap", s.gap},         {"gap_kind", "heuristic"},
          {"iterations", s.iterations}, {"converged", s.converged}, {"restart_spread", s.restart_spread},
          {"atoms", atoms}};
}

void cmd_er(const ExperimentConfig& c, RunRecord& rec, int) {
  const DensityOp rho = input_state(c);
  const Partition pi = partition_of(c, rho);
  const ERSolution s = relent_entanglement(rho, pi, solver_options(c));
  CsvTable table({"value", "gap", "iters"});
  table.add_row({cell(s.value), cell(s.gap), cell(s.iterations)});
  rec.tables[""] = table.str();
  rec.results["partition"] = pi.describe();
  rec.results["solution"] = solution_json(s);
  check_expected(rec, c.params, s.value, "relative entropy of entanglement");
}

void cmd_er_reg(const ExperimentConfig& c, RunRecord& rec, int) {
  const DensityOp rho = input_state(c);
  const Partition pi = partition_of(c, rho);
  const int k_max = param<int>(c.params, "k_max", 2, "params");
  if (k_max < 1) throw UsageError("params.k_max: must be positive");
  std::vector<RegularizedPoint> pts;
  try {
    pts = regularized_estimate(rho, pi, k_max, solver_options(c));
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("params.k_max: ") + e.what());
  }
  CsvTable table({"k", "value", "gap", "iters"});
  for (const auto& p : pts) {
    table.add_row({cell(p.k), cell(p.per_copy), cell(p.gap), cell(p.iterations)});
    if (p.per_copy > pts.front().per_copy + kInequalitySlack) {
      rec.violations.push_back("per-copy estimate at k = " + std::to_string(p.k) + " exceeds k = 1");
    }
  }
  rec.tables[""] = table.str();
}

void cmd_er_energy(const ExperimentConfig& c, RunRecord& rec, int) {
  const DensityOp rho = input_state(c);
  const Partition pi = partition_of(c, rho);
  std::vector<std::string> lits;
  if (c.params.contains("hamiltonians")) {
    lits = param<std::vector<std::string>>(c.params, "hamiltonians", {}, "params");
  } else if (c.inputs.at("state").is_string() && c.inputs.at("state").get<std::string>().rfind("fixture:", 0) == 0) {
    lits = find_fixture(c.inputs.at("state").get<std::string>().substr(8)).hamiltonians;
  } else {
    throw UsageError("params.hamiltonians: missing");
  }
  if (lits.size() != rho.sig().parties()) throw UsageError("params.hamiltonians: need one per party");
  std::vector<HamiltonianSpec> hams;
  for (const auto& s : lits) hams.push_back(literal("params.hamiltonians", [&] { return parse_hamiltonian(s); }));
  const auto energies = required<std::vector<double>>(c.params, "energies", "params");
  const SolverOptions opts = solver_options(c);
  const auto sweep = energy_sweep(rho, pi, hams, energies, opts);
  CsvTable table({"E", "value", "gap", "iters"});
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    table.add_row({cell(energies[i]), cell(sweep[i].value), cell(sweep[i].gap), cell(sweep[i].iterations)});
    if (i > 0 && sweep[i].value > sweep[i - 1].value + kInequalitySlack) {
      rec.violations.push_back("sweep value increases at E = " + format_double(energies[i]));
    }
  }
  rec.tables[""] = table.str();
  const ERSolution free = relent_entanglement(rho, pi, opts);
  rec.results["unconstrained"] = format_double(free.value);
  rec.results["terminal_difference"] = format_double(sweep.back().value - free.value);
}

void cmd_fda(const ExperimentConfig& c, RunRecord& rec, int) {
  const DensityOp rho = input_state(c);
  const int n = static_cast<int>(rho.sig().parties());
  int dmin = rho.sig().dim(0);
  for (int s = 1; s < n; ++s) dmin = std::min(dmin, rho.sig().dim(static_cast<std::size_t>(s)));
  std::vector<int> ranks(static_cast<std::size_t>(dmin));
  std::iota(ranks.begin(), ranks.end(), 1);
  ranks = param(c.params, "ranks", ranks, "params");
  const auto m_grid = param<std::vector<int>>(c.params, "m_grid", {n}, "params");
  const FdaReport report =
      literal("params", [&] { return fda_experiment(rho, spectral_projector_sequence(rho, ranks), m_grid, solver_options(c)); });
  CsvTable table({"k", "m", "c_k", "value", "gap", "qmi_scaled", "qmi", "skipped"});
  for (const auto& r : report.rows) {
    table.add_row({cell(r.k), cell(r.m), cell(r.c_k), cell(r.value), cell(r.gap), cell(r.qmi_scaled), cell(r.qmi),
                   cell(r.skipped)});
  }
  rec.tables[""] = table.str();
  if (report.violations) rec.violations.push_back(std::to_string(report.violations) + " rows with c_k I(rho_k) > I(rho)");
  json changes = json::object();
  for (const auto& [m, change] : report.last_change) {
    changes[std::to_string(m)] = format_double(change);
    if (c.params.contains("max_last_change") && change > c.params.at("max_last_change").get<double>()) {
      rec.violations.push_back("last-step change " + format_double(change) + " at m = " + std::to_string(m));
    }
  }
  rec.results["last_change"] = changes;
}

void cmd_verify(const ExperimentConfig& c, RunRecord& rec, int jobs) {
  const SolverOptions opts = solver_options(c);
  struct Job {
    std::string kind;
    std::size_t index;
    DimSig sig;
  };
  std::vector<Job> todo;
  const std::vector<std::pair<std::string, std::vector<int>>> kinds{
      {"upper_bound", {3, 3}}, {"mixture", {2, 2}}, {"conditional", {2, 2}}, {"pure_tripartite", {2, 2, 2}}};
  for (const auto& [kind, dims] : kinds) {
    if (!c.params.contains(kind)) continue;
    const json& k = c.params.at(kind);
    const auto count = param<std::size_t>(k, "count", 0, "params." + kind);
    const auto d = kind == "pure_tripartite" ? dims : param<std::vector<int>>(k, "dims", dims, "params." + kind);
    const DimSig sig = literal("params." + kind + ".dims", [&] { return DimSig(d); });
    for (std::size_t i = 0; i < count; ++i) todo.push_back({kind, i, sig});
  }
  CsvTable table({"check", "sample", "small", "large", "allowance", "violated"});
  const auto cells = run_cells(todo.size(), jobs, [&](std::size_t i, Cell& out) {
    const Job& job = todo[i];
    const std::uint64_t s = sample_seed(c.seed, static_cast<std::uint64_t>(job.kind.size()), job.index);
    std::vector<InequalityResult> results;
    const Partition pi = Partition::finest(static_cast<int>(job.sig.parties()));
    if (job.kind == "upper_bound") {
      results.push_back(check_er_upper_bound(random_density(job.sig, job.sig.total(), s), pi, opts));
    } else if (job.kind == "mixture") {
      std::mt19937_64 gen(s);
      const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
      results.push_back(check_mixture_bound(random_density(job.sig, job.sig.total(), s),
                                            random_density(job.sig, job.sig.total(), s ^ 0x5EEDULL), p, pi, opts));
    } else if (job.kind == "conditional") {
      results.push_back(check_conditional_lower_bound(random_density(job.sig, job.sig.total(), s), opts));
    } else {
      const DensityOp psi = random_pure(job.sig, s);
      for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
        results.push_back(check_pair_lower_bound(psi, a, b, opts));
      }
    }
    for (const auto& r : results) {
      out.rows.push_back({r.name, cell(job.index), cell(r.small_side), cell(r.large_side), cell(r.allowance),
                          cell(r.violated)});
      if (r.violated) out.violations.push_back(r.name + " violated on " + job.kind + " sample " + std::to_string(job.index));
    }
  });
  collect(rec, table, cells, "sample");
  rec.tables[""] = table.str();
  rec.results["checks"] = table.size();
}

void cmd_theorem2(const ExperimentConfig& c, RunRecord& rec, int) {
  const DensityOp rho0 = input_state(c);
  const Partition pi = partition_of(c, rho0);
  const int steps = param<int>(c.params, "steps", 6, "params");
  const int k_max = param<int>(c.params, "k_max", 1, "params");
  if (steps < 1) throw UsageError("params.steps: must be positive");
  const auto rows = theorem2_demo(depolarized_sequence(rho0, steps), rho0, pi, k_max, solver_options(c));
  CsvTable table({"k", "distance", "qmi", "er", "er_reg"});
  for (const auto& r : rows) table.add_row({cell(r.k), cell(r.distance), cell(r.qmi), cell(r.er), cell(r.er_reg)});
  rec.tables[""] = table.str();
}

}  // namespace

RunRecord run(const ExperimentConfig& config, int jobs) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.version = version_string();
  rec.config = config.to_json();
  using Handler = void (*)(const ExperimentConfig&, RunRecord&, int);
  static const std::map<std::string, Handler> handlers{
      {"entropy", cmd_entropy}, {"gibbs", cmd_gibbs},         {"zeta", cmd_zeta}, {"approx", cmd_approx},
      {"er", cmd_er},           {"er-reg", cmd_er_reg},       {"er-energy", cmd_er_energy},
      {"fda", cmd_fda},         {"verify", cmd_verify},       {"theorem2", cmd_theorem2}};
  const auto it = handlers.find(config.command);
  if (it == handlers.end()) throw UsageError("config.command: unknown command '" + config.command + "'");
  try {
    it->second(config, rec, jobs);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    rec.errors.push_back(e.what());
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace qsep
