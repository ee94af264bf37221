// Configuration-driven stages: gs, strings, sweep, braid, codesim.
#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "ryd/anyons.hpp"
#include "ryd/codesim.hpp"
#include "ryd/config.hpp"
#include "ryd/io.hpp"
#include "ryd/observables.hpp"
#include "ryd/operators.hpp"
#include "ryd/spectra.hpp"

namespace ryd {

inline const std::vector<std::string> kStages = {"gs", "strings", "sweep", "braid", "codesim"};

// ---------------------------------------------------------------------------
// Ruby-lattice system

inline Lattice build_lattice(const ExperimentConfig& cfg) {
  Lattice lat = build_ruby_lattice(cfg.lattice, cfg.model.trunc_radius);
  for (const auto& p : cfg.punctures) lat = apply_puncture(lat, p);
  return lat;
}

struct System {
  Lattice lat;
  OccupationBasis basis;
  SparseOperator H;
};

inline System build_system(const ExperimentConfig& cfg, double detuning) {
  Lattice lat = build_lattice(cfg);
  OccupationBasis basis(lat, cfg.basis);
  ModelParams m = cfg.model;
  m.detuning = detuning;
  SparseOperator H = build_hamiltonian(lat, m, basis);
  return {std::move(lat), std::move(basis), std::move(H)};
}

inline LanczosOptions lanczos_options(const SolverSettings& s) {
  LanczosOptions o;
  o.max_krylov = s.max_krylov;
  o.max_rounds = s.max_rounds;
  o.degeneracy_tol = s.degeneracy_tol;
  return o;
}

// ---------------------------------------------------------------------------
// Measurements on one state

struct StateObservables {
  std::vector<StringMeasurement> rows;  // every measured path / family
  std::vector<std::string> kinds;       // parallel to rows
  std::optional<StringMeasurement> closed_z, closed_x, open_z, open_x;
  PhaseLabel label = PhaseLabel::indeterminate;
};

// Single closed loops per column, their normalised families, the largest
// open string of each kind, and any configured connectors.
inline StateObservables measure_state(const StateVector& psi, const Lattice& lat, const OccupationBasis& basis,
                                      const ExperimentConfig& cfg) {
  StateObservables out;
  auto add = [&](StringMeasurement m, const char* kind) {
    out.rows.push_back(std::move(m));
    out.kinds.push_back(kind);
  };
  StateVector frame;  // dual frame, computed once on demand
  auto dual = [&]() -> const StateVector& {
    if (frame.size() == 0) frame = dual_frame(psi, lat, basis, cfg.evolution);
    return frame;
  };

  if (cfg.measure.closed_loops && lat.periodic()) {
    std::vector<StringPath> zf, xf;
    for (int c = 0; c < lat.spec.cells_x; ++c) {
      try {
        zf.push_back(loop_path(lat, c, StringKind::Z));
        xf.push_back(loop_path(lat, c, StringKind::Xdual));
      } catch (const ValidationError&) {
        // column crosses a puncture
      }
    }
    for (auto* fam : {&zf, &xf}) {
      if (fam->empty()) continue;
      const bool is_z = fam == &zf;
      std::vector<double> singles, joints;
      std::vector<std::uint64_t> masks;
      for (const auto& s : *fam) masks.push_back(site_mask(is_z ? s : dual_path(lat, s)));
      const StateVector& f = is_z ? psi : dual();
      for (std::size_t i = 0; i < masks.size(); ++i) {
        singles.push_back(expect_z_mask(f, basis, masks[i]));
        add(StringMeasurement::exact(singles.back(), (*fam)[i].id), is_z ? "Z" : "Xdual");
      }
      StringMeasurement agg;
      if (masks.size() >= 2) {
        for (std::size_t i = 0; i + 1 < masks.size(); ++i) joints.push_back(expect_z_mask(f, basis, masks[i] ^ masks[i + 1]));
        agg = normalize_family(singles, joints, is_z ? "closed_Z" : "closed_X");
      } else {
        agg = StringMeasurement::exact(singles[0], is_z ? "closed_Z" : "closed_X");
      }
      add(agg, is_z ? "Z" : "Xdual");
      (is_z ? out.closed_z : out.closed_x) = agg;
    }
  }

  if (cfg.measure.open_strings) {
    for (auto kind : {StringKind::Z, StringKind::Xdual}) {
      const auto strings = open_strings(lat, kind);
      if (strings.empty()) continue;
      StringMeasurement best = StringMeasurement::exact(0.0);
      for (const auto& s : strings) {
        const double v = kind == StringKind::Z ? expect_z_string(psi, basis, s)
                                               : expect_z_mask(dual(), basis, site_mask(dual_path(lat, s)));
        if (std::abs(v) >= std::abs(best.raw)) best = StringMeasurement::exact(v, s.id);
      }
      const bool z = kind == StringKind::Z;
      best.path_id = z ? "open_Z_max" : "open_X_max";
      add(best, z ? "Z" : "Xdual");
      (z ? out.open_z : out.open_x) = best;
    }
  }

  for (auto kind : {StringKind::Z, StringKind::Xdual}) {
    const auto& list = kind == StringKind::Z ? cfg.measure.z_connectors : cfg.measure.x_connectors;
    for (const auto& [a, b] : list) {
      StringPath s = connector_path(lat, Anchor::parse(a), Anchor::parse(b), kind);
      const double v = kind == StringKind::Z ? expect_z_string(psi, basis, s)
                                             : expect_z_mask(dual(), basis, site_mask(dual_path(lat, s)));
      add(StringMeasurement::exact(v, std::string(to_string(kind)) + ":" + a + "->" + b), to_string(kind));
    }
  }

  if (out.closed_z && out.closed_x && out.open_z && out.open_x)
    out.label = classify_phase(*out.closed_z, *out.closed_x, *out.open_z, *out.open_x, cfg.measure.thresholds);
  return out;
}

// ---------------------------------------------------------------------------
// Stage implementations

struct StageContext {
  const ExperimentConfig& cfg;
  ArtifactWriter& out;
  RunManifest& manifest;
  std::uint64_t seed;
};

inline json model_json(const ModelParams& m) {
  return {{"rabi", m.rabi},
          {"detuning", m.detuning},
          {"phase", m.phase},
          {"blockade_radius", m.blockade_radius},
          {"trunc_radius", m.trunc_radius}};
}

// Ground states for every configured seed.  Eigenvectors of the first seed
// are returned for the measurement stage.
inline EigenResult stage_gs(StageContext& ctx, const System& sys, const std::string& prefix = "") {
  const auto& cfg = ctx.cfg;
  std::vector<std::uint64_t> seeds = cfg.solver.seeds;
  if (ctx.seed) seeds = {ctx.seed};
  ctx.out.json_file(prefix + "lattice.json", lattice_to_json(sys.lat));
  ctx.out.text(prefix + "lattice.svg", lattice_svg(sys.lat));

  CsvTable table({"seed", "level", "energy", "residual", "manifold"});
  json dumps = json::array();
  EigenResult first;
  bool all_converged = true;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    EigenResult r = ground_states(sys.H, cfg.solver.k, cfg.solver.tol, seeds[si], lanczos_options(cfg.solver));
    all_converged = all_converged && r.converged;
    std::vector<int> manifold_of(r.values.size(), -1);
    for (std::size_t m = 0; m < r.manifolds.size(); ++m)
      for (int i : r.manifolds[m]) manifold_of[i] = static_cast<int>(m);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      table.row({std::to_string(seeds[si]), std::to_string(i), fmt(r.values[i]), fmt(r.residuals[i]),
                 std::to_string(manifold_of[i])});
      const std::string name = prefix + "eigen/seed" + std::to_string(seeds[si]) + "_level" + std::to_string(i) + ".bin";
      ctx.out.amplitudes(name, r.vectors[i]);
      dumps.push_back({{"file", name}, {"seed", seeds[si]}, {"level", i}, {"energy", r.values[i]},
                       {"residual", r.residuals[i]}, {"dim", sys.basis.dim()}});
    }
    if (si == 0) first = std::move(r);
  }
  ctx.out.text(prefix + "energies.csv", table.str());
  ctx.out.json_file(prefix + "eigen/manifest.json",
                    {{"basis", sys.basis.mode() == BasisMode::full ? "full" : "triangle_restricted"},
                     {"dim", sys.basis.dim()},
                     {"layout", "little-endian float64 pairs (re, im), basis index order"},
                     {"model", model_json(cfg.model)},
                     {"k", cfg.solver.k},
                     {"tol", cfg.solver.tol},
                     {"vectors", dumps}});
  if (!all_converged) throw NumericalError("eigensolver did not converge to tol " + fmt(cfg.solver.tol));
  return first;
}

inline json observables_json(const StateObservables& o) {
  auto val = [](const std::optional<StringMeasurement>& m) -> json {
    if (!m) return nullptr;
    return {{"value", m->value()}, {"stderr", m->error()}};
  };
  return {{"closed_Z", val(o.closed_z)}, {"closed_X", val(o.closed_x)}, {"open_Z", val(o.open_z)},
          {"open_X", val(o.open_x)},     {"label", to_string(o.label)}};
}

inline void stage_strings(StageContext& ctx, const System& sys, const EigenResult& gs) {
  CsvTable table({"state", "path", "kind", "raw", "normalized", "stderr"});
  json states = json::array();
  for (std::size_t s = 0; s < gs.vectors.size(); ++s) {
    const auto obs = measure_state(gs.vectors[s], sys.lat, sys.basis, ctx.cfg);
    for (std::size_t i = 0; i < obs.rows.size(); ++i) {
      const auto& m = obs.rows[i];
      table.row({std::to_string(s), m.path_id, obs.kinds[i], fmt(m.raw), m.has_normalized ? fmt(m.normalized) : "",
                 m.has_normalized ? fmt(m.stderr_) : ""});
    }
    json j = observables_json(obs);
    j["state"] = s;
    j["energy"] = gs.values[s];
    states.push_back(j);
  }
  ctx.out.text("measurements.csv", table.str());
  const json summary{{"thresholds", {{"vanishing", ctx.cfg.measure.thresholds.vanishing},
                                     {"finite", ctx.cfg.measure.thresholds.finite}}},
                     {"states", states}};
  ctx.out.json_file("summary.json", summary);
  ctx.manifest.summary["strings"] = states;
}

inline void stage_sweep(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  CsvTable table(
      {"detuning", "energy", "closed_Z", "closed_X", "open_Z", "open_X", "closed_Z_raw", "closed_X_raw", "label"});
  json points = json::array();
  const std::uint64_t seed = ctx.seed ? ctx.seed : cfg.solver.seeds.front();
  for (double d : cfg.sweep_detunings) {
    const System sys = build_system(cfg, d);
    EigenResult r = ground_states(sys.H, 1, cfg.solver.tol, seed, lanczos_options(cfg.solver));
    if (!r.converged) throw NumericalError("sweep: eigensolver did not converge at detuning " + fmt(d));
    const auto obs = measure_state(r.vectors[0], sys.lat, sys.basis, cfg);
    auto v = [](const std::optional<StringMeasurement>& m) { return m ? fmt(m->value()) : std::string(); };
    // Mean |<loop>| over columns, before normalisation.
    auto mean_abs = [](const std::optional<StringMeasurement>& m) {
      if (!m) return std::string();
      double a = 0;
      for (double x : m->raw_values) a += std::abs(x);
      return fmt(a / m->raw_values.size());
    };
    table.row({fmt(d), fmt(r.values[0]), v(obs.closed_z), v(obs.closed_x), v(obs.open_z), v(obs.open_x),
               mean_abs(obs.closed_z), mean_abs(obs.closed_x), to_string(obs.label)});
    json p = observables_json(obs);
    p["detuning"] = d;
    p["energy"] = r.values[0];
    points.push_back(p);
  }
  ctx.out.text("sweep.csv", table.str());
  ctx.out.json_file("sweep.json", {{"points", points}});
  ctx.manifest.summary["sweep"] = points;
}

// Names a 2x2 logical matrix when it matches a standard gate up to phase.
inline std::string identify_gate(const Matrix& m) {
  if (m.rows() != 2) return "";
  Matrix I = Matrix::Identity(2, 2), X(2, 2), Y(2, 2), Z(2, 2);
  X << 0, 1, 1, 0;
  Y << 0, cplx(0, -1), cplx(0, 1), 0;
  Z << 1, 0, 0, -1;
  const std::vector<std::pair<std::string, Matrix>> gates = {
      {"I", I}, {"X", X}, {"Y", Y}, {"Z", Z}, {"H", fusion_matrix()}};
  for (const auto& [name, g] : gates)
    if (phase_distance(m, g) < 1e-10) return name;
  return "";
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline json complex_json(cplx z) { return {z.real(), z.imag()}; }

inline void stage_braid(StageContext& ctx) {
  const auto& b = ctx.cfg.braid;
  const auto compiled = compile_braid(BraidWord::parse(b.word), b.N);
  const std::string gate = identify_gate(compiled.logical);
  json report{{"word", compiled.word.str()},
              {"N", b.N},
              {"global_phase", complex_json(compiled.global_phase)},
              {"logical", matrix_json(compiled.logical)},
              {"lattice", matrix_json(compiled.lattice)},
              {"leakage", compiled.leakage},
              {"matrix_layout", "entries are [re, im]; logical[j][k] = <j|W|k> / global_phase"},
              {"identified_gate", gate.empty() ? json(nullptr) : json(gate)}};
  if (b.controlled_z) {
    const auto rep = controlled_z_decomposition();
    json checks = json::array();
    for (const auto& c : rep.checks)
      checks.push_back({{"exchange", c.exchange},
                        {"holds", c.holds},
                        {"residual", c.residual},
                        {"c", complex_json(c.c)},
                        {"global_phase", complex_json(c.g)},
                        {"lattice", matrix_json(c.lattice)}});
    report["controlled_z"] = {{"r12", matrix_json(rep.r12)}, {"checks", checks}};
  }
  ctx.out.json_file("braid.json", report);
  ctx.manifest.summary["braid"] = {{"word", compiled.word.str()},
                                   {"global_phase", complex_json(compiled.global_phase)},
                                   {"identified_gate", report["identified_gate"]}};
}

// ---------------------------------------------------------------------------
// Protocol scripts

inline Table1State table1_state(const std::string& s) {
  if (s == "I") return Table1State::I;
  if (s == "e") return Table1State::e;
  if (s == "m") return Table1State::m;
  if (s == "epsilon") return Table1State::epsilon;
  if (s == "plus") return Table1State::plus;
  if (s == "minus") return Table1State::minus;
  throw ValidationError("unknown reference state '" + s + "'");
}

struct SignatureRecord {
  int step = 0;
  int p = 1, q = 2;  // 1-based punctures
  std::array<int, 4> values{};
  GroundStateKind kind = GroundStateKind::indeterminate;
};

// Executes a script on `sim`; returns every "signature" step in order.
template <class State>
std::vector<SignatureRecord> run_protocol(CodeSim<State>& sim, const std::vector<ProtocolStep>& script) {
  const auto& patch = sim.patch();
  std::vector<SignatureRecord> sigs;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& st = script[i];
    try {
      if (st.op == "prepare_identity") {
        sim.prepare_identity_sector();
      } else if (st.op == "prepare_reference") {
        prepare_reference(sim, table1_state(st.target));
      } else if (st.op == "prep_plus") {
        sim.prepare_ancilla_plus(st.ancillas[0] - 1);
      } else if (st.op == "cx_string" || st.op == "cz_string") {
        const bool x = st.op == "cx_string";
        sim.controlled_string(st.ancillas[0] - 1, patch.named(st.target), x ? StringKind::Xdual : StringKind::Z,
                              st.target);
      } else if (st.op == "pauli") {
        sim.apply(patch.named(st.target), st.target);
      } else if (st.op == "measure") {
        if (st.force != 0)
          sim.force(patch.named(st.target), st.force, st.target);
        else
          sim.measure(patch.named(st.target), st.target);
      } else if (st.op == "bell") {
        sim.bell_measure(st.ancillas[0] - 1, st.ancillas[1] - 1);
      } else if (st.op == "signature") {
        SignatureRecord r;
        if (!st.punctures.empty()) r.p = st.punctures[0], r.q = st.punctures[1];
        r.values = sim.signature(r.p - 1, r.q - 1);
        const auto lab = sim.label(r.p - 1, r.q - 1);
        r.kind = lab.kind;
        r.step = static_cast<int>(sim.log().size());
        std::string note = std::string("label=") + to_string(lab.kind) + " values=";
        for (int k = 0; k < 4; ++k) note += (k ? "," : "") + std::to_string(r.values[k]);
        sim.record("signature", "p" + std::to_string(r.p) + ",p" + std::to_string(r.q), 0, true, note);
        sigs.push_back(r);
      }
    } catch (const ValidationError& e) {
      throw ValidationError("codesim.script[" + std::to_string(i) + "] (" + st.op + "): " + e.what());
    }
  }
  return sigs;
}

template <class State>
void stage_codesim_impl(StageContext& ctx, const CodePatch& patch) {
  const auto& cs = ctx.cfg.codesim;
  const std::uint64_t base = ctx.seed ? ctx.seed : ctx.cfg.solver.seeds.front();
  std::string log;
  CsvTable table({"run", "step", "p", "q", "Z_C", "X_C", "Z_S", "X_S", "label"});
  std::map<std::string, int> counts;
  for (int run = 0; run < cs.runs; ++run) {
    CodeSim<State> sim(patch, base + static_cast<std::uint64_t>(run));
    const auto sigs = run_protocol(sim, cs.script);
    log += protocol_jsonl(sim.log(), cs.runs > 1 ? run : -1);
    for (const auto& s : sigs) {
      table.row({std::to_string(run), std::to_string(s.step), std::to_string(s.p), std::to_string(s.q),
                 std::to_string(s.values[0]), std::to_string(s.values[1]), std::to_string(s.values[2]),
                 std::to_string(s.values[3]), to_string(s.kind)});
      ++counts[to_string(s.kind)];
    }
  }
  ctx.out.text("protocol.jsonl", log);
  ctx.out.text("signatures.csv", table.str());
  json c = json::object();
  for (const auto& [k, v] : counts) c[k] = v;
  ctx.manifest.summary["codesim"] = {{"qubits", patch.num_qubits()},
                                     {"logical_qubits", patch.logical_qubits()},
                                     {"runs", cs.runs},
                                     {"label_counts", c}};
}

inline void stage_codesim(StageContext& ctx) {
  const CodePatch patch(ctx.cfg.codesim.layout);
  if (ctx.cfg.codesim.backend == "dense") {
    require(patch.num_qubits() <= 26, "codesim.backend: dense backend needs <= 26 qubits, layout has " +
                                          std::to_string(patch.num_qubits()));
    stage_codesim_impl<DenseState>(ctx, patch);
  } else {
    stage_codesim_impl<Tableau>(ctx, patch);
  }
}

// ---------------------------------------------------------------------------
// Driver

// Runs one stage ("gs", "strings", "sweep", "braid", "codesim") into
// `out_dir`.  Failures are recorded in the manifest rather than thrown;
// stage exit codes follow the error class (1 validation, 2 numerical).
inline RunManifest run(const ExperimentConfig& cfg, const std::string& stage, std::uint64_t seed_override = 0,
                       const std::string& out_dir = "") {
  require(std::find(kStages.begin(), kStages.end(), stage) != kStages.end(), "run: unknown stage '" + stage + "'");
  RunManifest man;
  man.config_hash = config_hash(cfg);
  man.started = utc_now();
  man.seed = seed_override ? seed_override : cfg.solver.seeds.front();
  ArtifactWriter out(out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir));
  out.json_file("config.json", config_to_json(cfg));
  const auto t0 = std::chrono::steady_clock::now();
  StageContext ctx{cfg, out, man, seed_override};

  auto attempt = [&](const std::string& name, auto&& body) {
    StageStatus s{name};
    try {
      body();
    } catch (const ValidationError& e) {
      s = {name, false, e.what(), 1};
    } catch (const NumericalError& e) {
      s = {name, false, e.what(), 2};
    }
    man.stages.push_back(s);
    return s.ok;
  };

  if (stage == "gs" || stage == "strings") {
    std::optional<System> sys;
    EigenResult gs;
    bool ok = attempt("build", [&] { sys.emplace(build_system(cfg, cfg.model.detuning)); });
    ok = ok && attempt("gs", [&] {
      gs = stage_gs(ctx, *sys);
      json levels = json::array();
      for (double e : gs.values) levels.push_back(e);
      man.summary["gs"] = {{"energies", levels}, {"dim", sys->basis.dim()}, {"matvecs", gs.iterations}};
    });
    if (ok && stage == "strings") attempt("strings", [&] { stage_strings(ctx, *sys, gs); });
  } else if (stage == "sweep") {
    attempt("sweep", [&] { stage_sweep(ctx); });
  } else if (stage == "braid") {
    attempt("braid", [&] { stage_braid(ctx); });
  } else {
    attempt("codesim", [&] { stage_codesim(ctx); });
  }
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.files = out.files();
  write_manifest(out.dir(), man);
  return man;
}

inline int exit_code(const RunManifest& m) {
  int code = 0;
  for (const auto& s : m.stages) code = std::max(code, s.exit_code);
  return code;
}

}  // namespace ryd
