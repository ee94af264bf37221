#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "ryd/pipeline.hpp"

using namespace ryd;

namespace {

const fs::path kSource = RYD_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ryd_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string error_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

std::map<std::string, std::string> checksums(const RunManifest& m) {
  std::map<std::string, std::string> out;
  for (const auto& f : m.files) out[f.path] = f.fnv1a;
  return out;
}

}  // namespace

TEST(Io, Fnv1aReferenceVectors) {
  EXPECT_EQ(hex64(fnv1a64(std::string())), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a64(std::string("a"))), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(fnv1a64(std::string("foobar"))), "85944171f73967e8");
}

TEST(Io, DefaultConfiguration) {
  const auto c = default_config();
  EXPECT_EQ(c.lattice.cells_x, 2);
  EXPECT_EQ(c.lattice.cells_y, 2);
  EXPECT_EQ(c.lattice.boundary_y, BoundaryY::periodic);
  EXPECT_DOUBLE_EQ(c.model.rabi, 1.0);
  EXPECT_DOUBLE_EQ(c.model.blockade_radius, 2.4);
  EXPECT_NEAR(c.model.trunc_radius, std::sqrt(7.0), 1e-15);
  EXPECT_DOUBLE_EQ(c.evolution.blockade_radius, 1.53);
  EXPECT_DOUBLE_EQ(c.evolution.trunc_radius, 1.0);
  EXPECT_DOUBLE_EQ(c.edge_detuning_ratio, 0.48);
  EXPECT_EQ(c.basis, BasisMode::triangle_restricted);
  EXPECT_EQ(c.codesim.layout.punctures.size(), 2u);
}

TEST(Io, FieldErrorsNameThePath) {
  EXPECT_NE(error_of({{"lattice", {{"boundary_y", "twisted"}}}}).find("lattice.boundary_y"), std::string::npos);
  EXPECT_NE(error_of({{"model", {{"blockade_radius", -1.0}}}}).find("model.blockade_radius"), std::string::npos);
  EXPECT_NE(error_of({{"solver", {{"krylov", 10}}}}).find("solver.krylov: unknown field"), std::string::npos);
  EXPECT_NE(error_of({{"colour", 1}}).find("colour: unknown field"), std::string::npos);
  EXPECT_NE(error_of({{"solver", {{"k", 1.5}}}}).find("solver.k: must be an integer"), std::string::npos);
  EXPECT_NE(error_of({{"codesim", {{"script", {{{"op", "teleport"}}}}}}}).find("codesim.script[0]"),
            std::string::npos);
  EXPECT_FALSE(error_of({{"measure", {{"z_connectors", {{"p0:m", "p1:m"}}}}}}).empty());  // no punctures configured
}

TEST(Io, CanonicalFormRoundTripsAndHashesStably) {
  const auto c = load_config((kSource / "configs/default.json").string());
  const json canon = config_to_json(c);
  const auto back = config_from_json(canon);
  EXPECT_EQ(config_to_json(back), canon);
  EXPECT_EQ(config_hash(back), config_hash(c));
  // Key order and whitespace do not matter; values do.
  json shuffled = json::parse(canon.dump(4));
  EXPECT_EQ(config_hash(config_from_json(shuffled)), config_hash(c));
  shuffled["model"]["detuning"] = 3.6;
  EXPECT_NE(config_hash(config_from_json(shuffled)), config_hash(c));
}

TEST(Io, ShippedConfigsValidate) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kSource / "configs")) {
    if (e.path().extension() != ".json") continue;
    ++n;
    if (e.path().filename() == "invalid_example.json")
      EXPECT_THROW(load_config(e.path().string()), ValidationError);
    else
      EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
  }
  EXPECT_GE(n, 6);
}

TEST(Io, MalformedJsonIsAValidationError) {
  const fs::path dir = scratch("badjson");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "{\"name\": ";
  EXPECT_THROW(load_config((dir / "c.json").string()), ValidationError);
  EXPECT_THROW(load_config((dir / "missing.json").string()), ValidationError);
}

TEST(Io, CsvQuoting) {
  CsvTable t({"a", "b"});
  t.row({"plain", "has,comma"}).row({"say \"hi\"", "line\nbreak"});
  EXPECT_EQ(t.str(), "a,b\nplain,\"has,comma\"\n\"say \"\"hi\"\"\",\"line\nbreak\"\n");
  EXPECT_THROW(t.row({"one"}), ValidationError);
}

TEST(Io, AmplitudeFilesRoundTrip) {
  const fs::path dir = scratch("amp");
  fs::create_directories(dir);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  StateVector v(37);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = {g(rng), g(rng)};
  write_amplitudes(dir / "v.bin", v);
  EXPECT_EQ(fs::file_size(dir / "v.bin"), 37u * 16u);
  const auto w = read_amplitudes(dir / "v.bin");
  ASSERT_EQ(w.size(), v.size());
  EXPECT_EQ((w - v).norm(), 0.0);
}

TEST(Io, ManifestDetectsCorruption) {
  const fs::path dir = scratch("manifest");
  ArtifactWriter out(dir);
  out.text("a.txt", "alpha\n");
  out.json_file("sub/b.json", json{{"x", 1}});
  RunManifest m;
  m.files = out.files();
  write_manifest(dir, m);
  EXPECT_TRUE(verify_manifest(dir).empty());
  std::ofstream(dir / "a.txt", std::ios::app) << "tampered";
  EXPECT_EQ(verify_manifest(dir), std::vector<std::string>{"a.txt"});
  fs::remove(dir / "sub/b.json");
  EXPECT_EQ(verify_manifest(dir).size(), 2u);
}

TEST(Io, CodesimStageIsByteReproducible) {
  auto cfg = load_config((kSource / "configs/codesim_prep.json").string());
  cfg.codesim.runs = 5;
  const auto a = run(cfg, "codesim", 7, scratch("cs_a").string());
  const auto b = run(cfg, "codesim", 7, scratch("cs_b").string());
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(checksums(a), checksums(b));
  EXPECT_TRUE(verify_manifest(fs::temp_directory_path() / "ryd_test_cs_a").empty());
  const auto c = run(cfg, "codesim", 8, scratch("cs_c").string());
  EXPECT_NE(checksums(a).at("protocol.jsonl"), checksums(c).at("protocol.jsonl"));
}

TEST(Io, GroundStateStageIsByteReproducible) {
  auto cfg = default_config();
  cfg.lattice = {2, 1, BoundaryY::periodic, 1.0};
  cfg.solver.k = 2;
  const auto a = run(cfg, "gs", 0, scratch("gs_a").string());
  const auto b = run(cfg, "gs", 0, scratch("gs_b").string());
  ASSERT_TRUE(a.ok()) << a.to_json().dump();
  EXPECT_EQ(checksums(a), checksums(b));
  for (const auto* f : {"config.json", "energies.csv", "lattice.json", "lattice.svg", "eigen/manifest.json"})
    EXPECT_TRUE(checksums(a).count(f)) << f;
}

TEST(Io, StageFailuresAreRecordedWithExitCodes) {
  auto cfg = default_config();
  cfg.braid.word = "R9";
  const auto m = run(cfg, "braid", 0, scratch("fail").string());
  EXPECT_FALSE(m.ok());
  EXPECT_EQ(exit_code(m), 1);
  EXPECT_THROW(run(cfg, "bogus", 0, scratch("fail2").string()), ValidationError);
}
