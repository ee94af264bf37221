// Experiment configuration: JSON parsing with field-level validation.
//
// Needs nlohmann/json (vendor/json.hpp) on the include path; the physics
// headers do not.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ryd/basis.hpp"
#include "ryd/codesim.hpp"
#include "ryd/geometry.hpp"
#include "ryd/observables.hpp"
#include "ryd/operators.hpp"

namespace ryd {

using json = nlohmann::json;

struct SolverSettings {
  int k = 1;
  double tol = 1e-9;
  std::vector<std::uint64_t> seeds{1};
  int max_krylov = 600;
  int max_rounds = 16;
  double degeneracy_tol = 1e-6;
};

struct MeasurementPlan {
  bool closed_loops = true;
  bool open_strings = true;
  // Anchor pairs such as ("p0:m", "p1:m"); Z connectors join m-segments, X
  // connectors e-segments.
  std::vector<std::pair<std::string, std::string>> z_connectors;
  std::vector<std::pair<std::string, std::string>> x_connectors;
  PhaseThresholds thresholds;
};

struct BraidSettings {
  int N = 1;
  std::string word = "R2 R2";
  bool controlled_z = false;  // also report the N = 2 controlled-Z decomposition
};

struct ProtocolStep {
  std::string op;                 // see kProtocolOps
  std::string target;             // operator word or reference-state name
  std::vector<int> ancillas;      // 1-based
  std::vector<int> punctures;     // 1-based, for "signature"
  int force = 0;                  // 0 = sample, +-1 = project
};

inline const std::set<std::string> kProtocolOps = {
    "prepare_identity", "prepare_reference", "prep_plus", "cx_string", "cz_string",
    "pauli",            "measure",           "bell",      "signature"};

struct CodesimSettings {
  PatchLayout layout;
  std::string backend = "tableau";  // or "dense" (<= 26 qubits)
  int runs = 1;
  std::vector<ProtocolStep> script;
};

struct ExperimentConfig {
  std::string name = "default";
  LatticeSpec lattice{2, 2, BoundaryY::periodic, 1.0};
  std::vector<PunctureSpec> punctures;
  double edge_detuning_ratio = 0.48;  // Delta'/Delta
  ModelParams model;
  ModelParams evolution = ModelParams::evolution();
  BasisMode basis = BasisMode::triangle_restricted;
  SolverSettings solver;
  std::vector<double> sweep_detunings{1.0, 1.75, 3.5, 5.25};
  MeasurementPlan measure;
  BraidSettings braid;
  CodesimSettings codesim;
  std::string output_dir = "out";
};

inline ExperimentConfig default_config() { return {}; }

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

// Walks a JSON object, reporting errors with the dotted field path and
// rejecting keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), where("") + "must be an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  std::string where(const std::string& k) const {
    std::string p = path_;
    if (!k.empty()) p += (p.empty() ? "" : ".") + k;
    return (p.empty() ? std::string("config") : p) + ": ";
  }
  std::string child(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  template <class T>
  void get(const std::string& k, T& out) {
    if (!has(k)) return;
    const json& v = raw(k);
    if constexpr (std::is_same_v<T, bool>) {
      require(v.is_boolean(), where(k) + "must be true or false");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      require(v.is_number_integer(), where(k) + "must be an integer");
      if constexpr (std::is_unsigned_v<T>) require(v.get<long long>() >= 0, where(k) + "must be non-negative");
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      require(v.is_number(), where(k) + "must be a number");
      out = v.get<double>();
      require(std::isfinite(out), where(k) + "must be finite");
    } else {
      require(v.is_string(), where(k) + "must be a string");
      out = v.get<std::string>();
    }
  }

  void positive(const std::string& k, double v) { require(v > 0, where(k) + "must be positive"); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      require(seen_.count(it.key()), where(it.key()) + "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::pair<int, int> parse_cell(const json& v, const std::string& where) {
  require(v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer(),
          where + "expected a pair of integers [x, y]");
  return {v[0].get<int>(), v[1].get<int>()};
}

inline LatticeSpec parse_lattice(const json& j, const std::string& path) {
  LatticeSpec s{2, 2, BoundaryY::periodic, 1.0};
  Fields f(j, path);
  f.get("cells_x", s.cells_x);
  f.get("cells_y", s.cells_y);
  f.get("spacing", s.spacing);
  std::string b = "periodic";
  f.get("boundary_y", b);
  require(b == "open" || b == "periodic", f.where("boundary_y") + "must be \"open\" or \"periodic\"");
  s.boundary_y = b == "open" ? BoundaryY::open : BoundaryY::periodic;
  require(s.cells_x >= 1, f.where("cells_x") + "must be >= 1");
  require(s.cells_y >= 1, f.where("cells_y") + "must be >= 1");
  f.positive("spacing", s.spacing);
  f.finish();
  return s;
}

inline PunctureSpec parse_puncture(const json& j, const std::string& path, double default_ratio) {
  PunctureSpec p;
  p.edge_detuning_ratio = default_ratio;
  Fields f(j, path);
  require(f.has("cells"), f.where("cells") + "required");
  const json& cells = f.raw("cells");
  require(cells.is_array() && !cells.empty(), f.where("cells") + "must be a non-empty array of [x, y]");
  for (std::size_t i = 0; i < cells.size(); ++i)
    p.removed_cells.push_back(parse_cell(cells[i], f.where("cells[" + std::to_string(i) + "]")));
  std::string rule = "half";
  f.get("rule", rule);
  if (rule == "all_m") p.rule = SegmentRule::all_m;
  else if (rule == "all_e") p.rule = SegmentRule::all_e;
  else if (rule == "half") p.rule = SegmentRule::half;
  else if (rule == "explicit") p.rule = SegmentRule::explicit_sites;
  else throw ValidationError(f.where("rule") + "must be one of all_m, all_e, half, explicit");
  if (f.has("e_sites")) {
    const json& es = f.raw("e_sites");
    require(es.is_array(), f.where("e_sites") + "must be an array of [cell_x, cell_y, slot]");
    for (const auto& e : es) {
      require(e.is_array() && e.size() == 3 && e[0].is_number_integer() && e[1].is_number_integer() &&
                  e[2].is_number_integer(),
              f.where("e_sites") + "entries must be [cell_x, cell_y, slot]");
      p.e_sites.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
    }
  }
  require(p.rule != SegmentRule::explicit_sites || !p.e_sites.empty(),
          f.where("e_sites") + "required when rule is \"explicit\"");
  f.get("edge_detuning_ratio", p.edge_detuning_ratio);
  f.positive("edge_detuning_ratio", p.edge_detuning_ratio);
  f.finish();
  return p;
}

inline ModelParams parse_model(const json& j, const std::string& path, ModelParams m) {
  Fields f(j, path);
  f.get("rabi", m.rabi);
  f.get("detuning", m.detuning);
  f.get("phase", m.phase);
  f.get("blockade_radius", m.blockade_radius);
  f.get("trunc_radius", m.trunc_radius);
  f.positive("rabi", m.rabi);
  f.positive("blockade_radius", m.blockade_radius);
  f.positive("trunc_radius", m.trunc_radius);
  f.finish();
  return m;
}

inline std::vector<std::pair<std::string, std::string>> parse_connectors(const json& v, const std::string& where) {
  require(v.is_array(), where + "must be an array of [from, to] anchor pairs");
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& c = v[i];
    const std::string w = where + "[" + std::to_string(i) + "] ";
    require(c.is_array() && c.size() == 2 && c[0].is_string() && c[1].is_string(), w + "must be [\"pN:x\", \"pM:x\"]");
    try {
      Anchor::parse(c[0].get<std::string>());
      Anchor::parse(c[1].get<std::string>());
    } catch (const ValidationError& e) {
      throw ValidationError(w + e.what());
    }
    out.emplace_back(c[0].get<std::string>(), c[1].get<std::string>());
  }
  return out;
}

inline std::vector<int> parse_index_list(const json& v, const std::string& where) {
  require(v.is_array(), where + "must be an array of 1-based indices");
  std::vector<int> out;
  for (const auto& x : v) {
    require(x.is_number_integer() && x.get<int>() >= 1, where + "entries must be integers >= 1");
    out.push_back(x.get<int>());
  }
  return out;
}

inline ProtocolStep parse_step(const json& j, const std::string& path) {
  ProtocolStep s;
  Fields f(j, path);
  require(f.has("op"), f.where("op") + "required");
  f.get("op", s.op);
  require(kProtocolOps.count(s.op), f.where("op") + "unknown operation '" + s.op + "'");
  f.get("target", s.target);
  if (f.has("ancilla")) {
    int a = 0;
    f.get("ancilla", a);
    require(a >= 1, f.where("ancilla") + "must be >= 1");
    s.ancillas = {a};
  }
  if (f.has("ancillas")) s.ancillas = parse_index_list(f.raw("ancillas"), f.where("ancillas"));
  if (f.has("punctures")) s.punctures = parse_index_list(f.raw("punctures"), f.where("punctures"));
  f.get("force", s.force);
  require(s.force == 0 || s.force == 1 || s.force == -1, f.where("force") + "must be -1, 0 or 1");
  f.finish();

  const bool needs_target = s.op == "prepare_reference" || s.op == "cx_string" || s.op == "cz_string" ||
                            s.op == "pauli" || s.op == "measure";
  require(!needs_target || !s.target.empty(), f.where("target") + "required for op '" + s.op + "'");
  if (s.op == "prepare_reference") {
    static const std::set<std::string> names = {"I", "e", "m", "epsilon", "plus", "minus"};
    require(names.count(s.target), f.where("target") + "must name a reference state (I, e, m, epsilon, plus, minus)");
  }
  if (s.op == "prep_plus" || s.op == "cx_string" || s.op == "cz_string")
    require(s.ancillas.size() == 1, f.where("ancilla") + "exactly one ancilla required");
  if (s.op == "bell") require(s.ancillas.size() == 2, f.where("ancillas") + "exactly two ancillas required");
  if (s.op == "signature")
    require(s.punctures.empty() || s.punctures.size() == 2, f.where("punctures") + "must list two punctures");
  return s;
}

inline CodesimSettings parse_codesim(const json& j, const std::string& path) {
  CodesimSettings c;
  Fields f(j, path);
  if (f.has("layout")) {
    const std::string lp = f.child("layout");
    Fields l(f.raw("layout"), lp);
    PatchLayout& L = c.layout;
    l.get("rows", L.rows);
    l.get("cols", L.cols);
    l.get("ancillas", L.ancillas);
    std::string outer = "rough";
    l.get("outer", outer);
    require(outer == "rough" || outer == "smooth", l.where("outer") + "must be \"rough\" or \"smooth\"");
    L.outer = outer == "rough" ? OuterBoundary::rough : OuterBoundary::smooth;
    if (l.has("punctures")) {
      const json& ps = l.raw("punctures");
      require(ps.is_array(), l.where("punctures") + "must be an array of [row, col]");
      L.punctures.clear();
      for (std::size_t i = 0; i < ps.size(); ++i)
        L.punctures.push_back(parse_cell(ps[i], l.where("punctures[" + std::to_string(i) + "]")));
    }
    l.finish();
    try {
      L.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(l.where("") + e.what());
    }
  }
  f.get("backend", c.backend);
  require(c.backend == "tableau" || c.backend == "dense", f.where("backend") + "must be \"tableau\" or \"dense\"");
  f.get("runs", c.runs);
  require(c.runs >= 1, f.where("runs") + "must be >= 1");
  if (f.has("script")) {
    const json& s = f.raw("script");
    require(s.is_array(), f.where("script") + "must be an array of steps");
    for (std::size_t i = 0; i < s.size(); ++i) c.script.push_back(parse_step(s[i], f.child("script[" + std::to_string(i) + "]")));
  }
  f.finish();
  for (std::size_t i = 0; i < c.script.size(); ++i) {
    const auto& st = c.script[i];
    const std::string w = f.child("script[" + std::to_string(i) + "]") + ": ";
    for (int a : st.ancillas)
      require(a <= c.layout.ancillas, w + "ancilla a" + std::to_string(a) + " does not exist in the layout");
    for (int p : st.punctures)
      require(p <= static_cast<int>(c.layout.punctures.size()),
              w + "puncture " + std::to_string(p) + " does not exist in the layout");
  }
  return c;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  detail::Fields f(j, "");
  f.get("name", c.name);
  f.get("output_dir", c.output_dir);
  if (f.has("lattice")) c.lattice = detail::parse_lattice(f.raw("lattice"), "lattice");
  f.get("edge_detuning_ratio", c.edge_detuning_ratio);
  f.positive("edge_detuning_ratio", c.edge_detuning_ratio);
  if (f.has("punctures")) {
    const json& ps = f.raw("punctures");
    require(ps.is_array(), f.where("punctures") + "must be an array");
    for (std::size_t i = 0; i < ps.size(); ++i)
      c.punctures.push_back(
          detail::parse_puncture(ps[i], "punctures[" + std::to_string(i) + "]", c.edge_detuning_ratio));
  }
  if (f.has("model")) c.model = detail::parse_model(f.raw("model"), "model", c.model);
  if (f.has("evolution")) c.evolution = detail::parse_model(f.raw("evolution"), "evolution", c.evolution);
  {
    std::string b = "triangle_restricted";
    f.get("basis", b);
    require(b == "full" || b == "triangle_restricted", f.where("basis") + "must be \"full\" or \"triangle_restricted\"");
    c.basis = b == "full" ? BasisMode::full : BasisMode::triangle_restricted;
  }
  if (f.has("solver")) {
    detail::Fields s(f.raw("solver"), "solver");
    s.get("k", c.solver.k);
    s.get("tol", c.solver.tol);
    s.get("max_krylov", c.solver.max_krylov);
    s.get("max_rounds", c.solver.max_rounds);
    s.get("degeneracy_tol", c.solver.degeneracy_tol);
    if (s.has("seeds")) {
      const json& v = s.raw("seeds");
      require(v.is_array() && !v.empty(), s.where("seeds") + "must be a non-empty array of integers");
      c.solver.seeds.clear();
      for (const auto& x : v) {
        require(x.is_number_unsigned(), s.where("seeds") + "entries must be non-negative integers");
        c.solver.seeds.push_back(x.get<std::uint64_t>());
      }
    }
    require(c.solver.k >= 1, s.where("k") + "must be >= 1");
    s.positive("tol", c.solver.tol);
    require(c.solver.max_krylov >= 2 * c.solver.k + 10, s.where("max_krylov") + "must be at least 2k + 10");
    require(c.solver.max_rounds >= 1, s.where("max_rounds") + "must be >= 1");
    s.positive("degeneracy_tol", c.solver.degeneracy_tol);
    s.finish();
  }
  if (f.has("sweep")) {
    detail::Fields s(f.raw("sweep"), "sweep");
    if (s.has("detunings")) {
      const json& v = s.raw("detunings");
      require(v.is_array() && !v.empty(), s.where("detunings") + "must be a non-empty array of numbers");
      c.sweep_detunings.clear();
      for (const auto& x : v) {
        require(x.is_number(), s.where("detunings") + "entries must be numbers");
        c.sweep_detunings.push_back(x.get<double>());
      }
    }
    s.finish();
  }
  if (f.has("measure")) {
    detail::Fields m(f.raw("measure"), "measure");
    m.get("closed_loops", c.measure.closed_loops);
    m.get("open_strings", c.measure.open_strings);
    if (m.has("z_connectors")) c.measure.z_connectors = detail::parse_connectors(m.raw("z_connectors"), m.where("z_connectors"));
    if (m.has("x_connectors")) c.measure.x_connectors = detail::parse_connectors(m.raw("x_connectors"), m.where("x_connectors"));
    m.get("vanishing", c.measure.thresholds.vanishing);
    m.get("finite", c.measure.thresholds.finite);
    m.positive("vanishing", c.measure.thresholds.vanishing);
    require(c.measure.thresholds.finite >= c.measure.thresholds.vanishing,
            m.where("finite") + "must not be below the vanishing threshold");
    m.finish();
    for (const auto& [a, b] : c.measure.z_connectors)
      require(Anchor::parse(a).segment == 'm' && Anchor::parse(b).segment == 'm',
              m.where("z_connectors") + "Z connectors join m-segments");
    for (const auto& [a, b] : c.measure.x_connectors)
      require(Anchor::parse(a).segment == 'e' && Anchor::parse(b).segment == 'e',
              m.where("x_connectors") + "X connectors join e-segments");
    const int np = static_cast<int>(c.punctures.size());
    auto in_range = [&](const std::string& s) { return Anchor::parse(s).puncture < np; };
    for (const auto* list : {&c.measure.z_connectors, &c.measure.x_connectors})
      for (const auto& [a, b] : *list)
        require(in_range(a) && in_range(b), m.where("") + "connector " + a + " -> " + b +
                                                 " references a puncture that is not configured");
  }
  if (f.has("braid")) {
    detail::Fields b(f.raw("braid"), "braid");
    b.get("N", c.braid.N);
    b.get("word", c.braid.word);
    b.get("controlled_z", c.braid.controlled_z);
    require(c.braid.N >= 1 && c.braid.N <= 6, b.where("N") + "must be between 1 and 6");
    b.finish();
  }
  if (f.has("codesim")) c.codesim = detail::parse_codesim(f.raw("codesim"), "codesim");
  f.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: '" + path + "' is not valid JSON (" + std::string(e.what()) + ")");
  }
  return config_from_json(j);
}

// Canonical JSON form.  Hashing this (rather than the file text) makes the
// config hash independent of whitespace and key order.
inline json config_to_json(const ExperimentConfig& c) {
  auto model = [](const ModelParams& m) {
    return json{{"rabi", m.rabi},
                {"detuning", m.detuning},
                {"phase", m.phase},
                {"blockade_radius", m.blockade_radius},
                {"trunc_radius", m.trunc_radius}};
  };
  json punct = json::array();
  for (const auto& p : c.punctures) {
    static const char* rules[] = {"all_m", "all_e", "half", "explicit"};
    json cells = json::array();
    for (auto [x, y] : p.removed_cells) cells.push_back({x, y});
    json e = json::array();
    for (const auto& s : p.e_sites) e.push_back({s[0], s[1], s[2]});
    punct.push_back({{"cells", cells},
                     {"rule", rules[static_cast<int>(p.rule)]},
                     {"e_sites", e},
                     {"edge_detuning_ratio", p.edge_detuning_ratio}});
  }
  json steps = json::array();
  for (const auto& s : c.codesim.script)
    steps.push_back({{"op", s.op}, {"target", s.target}, {"ancillas", s.ancillas},
                     {"punctures", s.punctures}, {"force", s.force}});
  json pcells = json::array();
  for (auto [r, col] : c.codesim.layout.punctures) pcells.push_back({r, col});
  return json{
      {"name", c.name},
      {"output_dir", c.output_dir},
      {"lattice",
       {{"cells_x", c.lattice.cells_x},
        {"cells_y", c.lattice.cells_y},
        {"boundary_y", c.lattice.boundary_y == BoundaryY::open ? "open" : "periodic"},
        {"spacing", c.lattice.spacing}}},
      {"edge_detuning_ratio", c.edge_detuning_ratio},
      {"punctures", punct},
      {"model", model(c.model)},
      {"evolution", model(c.evolution)},
      {"basis", c.basis == BasisMode::full ? "full" : "triangle_restricted"},
      {"solver",
       {{"k", c.solver.k},
        {"tol", c.solver.tol},
        {"seeds", c.solver.seeds},
        {"max_krylov", c.solver.max_krylov},
        {"max_rounds", c.solver.max_rounds},
        {"degeneracy_tol", c.solver.degeneracy_tol}}},
      {"sweep", {{"detunings", c.sweep_detunings}}},
      {"measure",
       {{"closed_loops", c.measure.closed_loops},
        {"open_strings", c.measure.open_strings},
        {"z_connectors", c.measure.z_connectors},
        {"x_connectors", c.measure.x_connectors},
        {"vanishing", c.measure.thresholds.vanishing},
        {"finite", c.measure.thresholds.finite}}},
      {"braid", {{"N", c.braid.N}, {"word", c.braid.word}, {"controlled_z", c.braid.controlled_z}}},
      {"codesim",
       {{"layout",
         {{"rows", c.codesim.layout.rows},
          {"cols", c.codesim.layout.cols},
          {"outer", c.codesim.layout.outer == OuterBoundary::rough ? "rough" : "smooth"},
          {"punctures", pcells},
          {"ancillas", c.codesim.layout.ancillas}}},
        {"backend", c.codesim.backend},
        {"runs", c.codesim.runs},
        {"script", steps}}},
  };
}

inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(config_to_json(c).dump())); }

}  // namespace ryd
