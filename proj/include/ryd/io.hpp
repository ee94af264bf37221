// Artifact writers: lattice JSON/SVG, CSV tables, eigenvector dumps, JSON-lines
// protocol logs, and the checksummed run manifest.
#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ryd/codesim.hpp"
#include "ryd/geometry.hpp"
#include "ryd/spectra.hpp"

namespace ryd {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// Fixed-format number so that reruns produce identical bytes.
inline std::string fmt(double v) {
  if (v == 0) v = 0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Geometry

inline const char* to_string(SiteTag t) {
  switch (t) {
    case SiteTag::e_boundary: return "e";
    case SiteTag::m_boundary: return "m";
    default: return "bulk";
  }
}

inline json path_to_json(const StringPath& s) {
  json j{{"id", s.id}, {"kind", to_string(s.kind)}, {"sites", s.sites}, {"topology", to_string(s.topology)},
         {"winding", s.winding}};
  if (s.anchors) j["anchors"] = {s.anchors->first, s.anchors->second};
  return j;
}

inline json lattice_to_json(const Lattice& lat, const std::vector<StringPath>& paths = {}) {
  json sites = json::array();
  for (int i = 0; i < lat.num_sites(); ++i) {
    const Site& s = lat.sites[i];
    sites.push_back({{"index", i},
                     {"x", s.x},
                     {"y", s.y},
                     {"triangle", s.triangle},
                     {"detuning_scale", s.detuning_scale},
                     {"cell", {s.cell_x, s.cell_y}},
                     {"slot", s.slot},
                     {"tag", to_string(s.tag)}});
  }
  json punct = json::array();
  for (const auto& p : lat.punctures)
    punct.push_back({{"removed_cells", p.removed_cells},
                     {"centre", {p.cx, p.cy}},
                     {"e_segment", p.e_segment},
                     {"m_segment", p.m_segment}});
  json jp = json::array();
  for (const auto& s : paths) jp.push_back(path_to_json(s));
  return json{{"spec",
               {{"cells_x", lat.spec.cells_x},
                {"cells_y", lat.spec.cells_y},
                {"boundary_y", lat.periodic() ? "periodic" : "open"},
                {"spacing", lat.spec.spacing}}},
              {"sites", sites},
              {"triangles", lat.triangles},
              {"punctures", punct},
              {"paths", jp}};
}

// Plain SVG sketch: triangles as grey outlines, sites coloured by tag, paths
// as polylines through their sites.
inline std::string lattice_svg(const Lattice& lat, const std::vector<StringPath>& paths = {}) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : lat.sites) {
    xmin = std::min(xmin, s.x), xmax = std::max(xmax, s.x);
    ymin = std::min(ymin, s.y), ymax = std::max(ymax, s.y);
  }
  if (lat.sites.empty()) xmin = xmax = ymin = ymax = 0;
  const double scale = 40, pad = 1.0;
  auto X = [&](double x) { return fmt((x - xmin + pad) * scale); };
  auto Y = [&](double y) { return fmt((ymax - y + pad) * scale); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt((xmax - xmin + 2 * pad) * scale)
     << "\" height=\"" << fmt((ymax - ymin + 2 * pad) * scale) << "\">\n";
  for (const auto& t : lat.triangles) {
    os << "  <polygon fill=\"none\" stroke=\"#bbbbbb\" points=\"";
    for (int k : t) os << X(lat.sites[k].x) << "," << Y(lat.sites[k].y) << " ";
    os << "\"/>\n";
  }
  static const char* colours[] = {"#ff7f0e", "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  for (std::size_t p = 0; p < paths.size(); ++p) {
    os << "  <polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << colours[p % 6] << "\" points=\"";
    for (int i : paths[p].sites) os << X(lat.sites[i].x) << "," << Y(lat.sites[i].y) << " ";
    os << "\"><title>" << paths[p].id << "</title></polyline>\n";
  }
  for (int i = 0; i < lat.num_sites(); ++i) {
    const Site& s = lat.sites[i];
    const char* fill = s.tag == SiteTag::e_boundary ? "#d62728" : s.tag == SiteTag::m_boundary ? "#1f77b4" : "#333333";
    os << "  <circle cx=\"" << X(s.x) << "\" cy=\"" << Y(s.y) << "\" r=\"4\" fill=\"" << fill << "\"><title>" << i
       << "</title></circle>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Tables

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row(std::vector<std::string> cells) {
    require(cells.size() == header_.size(), "csv: row width does not match header");
    rows_.push_back(std::move(cells));
    return *this;
  }

  std::string str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& v) {
      for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << quote(v[i]);
      os << "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
  }

  std::size_t size() const { return rows_.size(); }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string protocol_jsonl(const std::vector<ProtocolRecord>& log, int run = -1) {
  std::ostringstream os;
  for (const auto& r : log) {
    json j{{"step", r.step}, {"op", r.op}, {"operator", r.target}, {"outcome", r.outcome},
           {"deterministic", r.deterministic}};
    if (run >= 0) j["run"] = run;
    if (!r.note.empty()) j["note"] = r.note;
    os << j.dump() << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Eigenvector dumps: little-endian (re, im) doubles, one file per vector.

inline void write_amplitudes(const fs::path& file, const StateVector& v) {
  std::ofstream out(file, std::ios::binary);
  require(static_cast<bool>(out), "io: cannot write '" + file.string() + "'");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = v[i].real(), im = v[i].imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof re);
    out.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
}

inline StateVector read_amplitudes(const fs::path& file) {
  std::ifstream in(file, std::ios::binary | std::ios::ate);
  require(static_cast<bool>(in), "io: cannot read '" + file.string() + "'");
  const auto bytes = static_cast<std::size_t>(in.tellg());
  require(bytes % 16 == 0, "io: '" + file.string() + "' is not a complex amplitude dump");
  in.seekg(0);
  StateVector v(static_cast<Eigen::Index>(bytes / 16));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double re = 0, im = 0;
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    v[i] = {re, im};
  }
  return v;
}

// ---------------------------------------------------------------------------
// Manifest

inline std::string file_checksum(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(static_cast<bool>(in), "manifest: cannot read '" + file.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return hex64(h);
}

struct StageStatus {
  std::string stage;
  bool ok = true;
  std::string error;
  int exit_code = 0;
};

struct ProducedFile {
  std::string path;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string fnv1a;
};

struct RunManifest {
  std::string config_hash;
  std::string version = kVersion;
  std::string started;  // ISO-8601 UTC
  double wall_seconds = 0;
  std::uint64_t seed = 0;
  std::vector<ProducedFile> files;
  std::vector<StageStatus> stages;
  json summary = json::object();

  bool ok() const {
    for (const auto& s : stages)
      if (!s.ok) return false;
    return true;
  }

  json to_json() const {
    json f = json::array();
    for (const auto& p : files) f.push_back({{"path", p.path}, {"bytes", p.bytes}, {"fnv1a", p.fnv1a}});
    json st = json::array();
    for (const auto& s : stages) {
      json j{{"stage", s.stage}, {"ok", s.ok}};
      if (!s.ok) j["error"] = s.error;
      st.push_back(j);
    }
    return json{{"config_hash", config_hash},
                {"versions", {{"ryd", version}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                             std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                             std::to_string(EIGEN_MINOR_VERSION)},
                              {"compiler", __VERSION__}}},
                {"started", started},
                {"wall_seconds", wall_seconds},
                {"seed", seed},
                {"stages", st},
                {"files", f},
                {"summary", summary}};
  }
};

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes into one output directory and records every file it produces.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  const fs::path& dir() const { return dir_; }

  void text(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    require(static_cast<bool>(out), "io: cannot write '" + p.string() + "'");
    out << content;
    out.close();
    add(name);
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  void amplitudes(const std::string& name, const StateVector& v) {
    fs::create_directories((dir_ / name).parent_path());
    write_amplitudes(dir_ / name, v);
    add(name);
  }

  std::vector<ProducedFile> files() const { return files_; }

 private:
  void add(const std::string& name) {
    const fs::path p = dir_ / name;
    for (auto& f : files_)
      if (f.path == name) {
        f = {name, fs::file_size(p), file_checksum(p)};
        return;
      }
    files_.push_back({name, fs::file_size(p), file_checksum(p)});
  }

  fs::path dir_;
  std::vector<ProducedFile> files_;
};

inline void write_manifest(const fs::path& dir, const RunManifest& m) {
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  require(static_cast<bool>(out), "io: cannot write manifest in '" + dir.string() + "'");
  out << m.to_json().dump(2) << "\n";
}

// Recomputes every listed checksum.  Returns the paths that are missing or
// differ; empty means the manifest verifies.
inline std::vector<std::string> verify_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  require(static_cast<bool>(in), "manifest: '" + (dir / "manifest.json").string() + "' not found");
  const json m = json::parse(in);
  std::vector<std::string> bad;
  for (const auto& f : m.at("files")) {
    const fs::path p = dir / f.at("path").get<std::string>();
    if (!fs::exists(p) || fs::file_size(p) != f.at("bytes").get<std::uintmax_t>() ||
        file_checksum(p) != f.at("fnv1a").get<std::string>())
      bad.push_back(f.at("path").get<std::string>());
  }
  return bad;
}

}  // namespace ryd
