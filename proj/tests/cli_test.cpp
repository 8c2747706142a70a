#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lsqswarm/errors.hpp"
#include "lsqswarm/experiment.hpp"

namespace fs = std::filesystem;
using namespace lsqswarm;

namespace {

fs::path fixture_root() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() /
                 ("lsqswarm_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path write_file(const std::string& name, const std::string& content) {
  fs::path p = fixture_root() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

void write_problem_files() {
  static bool done = [] {
    write_file("a43.txt", "4 3\n1 2 1\n2 -1 -1\n1 -2 4\n2 2 -2\n");
    write_file("b4.txt", "4 1\n3\n2\n1\n2\n");
    write_file("i2.txt", "2 2\n1 0\n0 1\n");
    write_file("b2.txt", "2 1\n1\n2\n");
    return true;
  }();
  (void)done;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ValidationError expect_validation(const fs::path& cfg_path) {
  try {
    parse_config(cfg_path);
  } catch (const ValidationError& e) {
    return e;
  }
  FAIL("expected a ValidationError");
  return ValidationError("", "");
}

ParseError expect_parse_error(const fs::path& cfg_path) {
  try {
    parse_config(cfg_path);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError(0, "");
}

const std::string kIdentityBase =
    "variant: hom\n"
    "matrix: i2.txt\n"
    "rhs: b2.txt\n"
    "t_end: 120\n"
    "record_every: 50\n";

}  // namespace

TEST_CASE("a fully specified scalar config parses into the right experiment") {
  write_problem_files();
  fs::path p = write_file("full_hom.cfg",
                          "# scalar variant on the 4x3 benchmark\n"
                          "variant: hom\n"
                          "matrix: a43.txt\n"
                          "rhs: b4.txt\n"
                          "b_rule: uniform\n"
                          "topology: standard_grid\n"
                          "h: 2e-3\n"
                          "t_end: 250\n"
                          "record_every: 25\n"
                          "tol_converge: 1e-7\n"
                          "tol_exact: 1e-9\n"
                          "seed: 42\n"
                          "x0: uniform\n"
                          "z0: zero\n"
                          "out: artifacts\n"
                          "verify_spectral: true\n");
  ExperimentConfig cfg = parse_config(p);
  CHECK(cfg.variant == Variant::Hom);
  CHECK(cfg.b_rule == "uniform");
  CHECK(cfg.topology == ExperimentConfig::Topology::StandardGrid);
  CHECK(cfg.a.rows() == 4);
  CHECK(cfg.a.cols() == 3);
  CHECK(cfg.a(2, 2) == 4.0);
  CHECK(cfg.b.dim() == 4);
  CHECK(cfg.sim.h == 2e-3);
  CHECK(cfg.sim.t_end == 250.0);
  CHECK(cfg.sim.record_every == 25);
  CHECK(cfg.sim.tol_converge == 1e-7);
  CHECK(cfg.sim.tol_exact == 1e-9);
  CHECK(cfg.sim.seed == 42);
  CHECK(cfg.sim.x0_rule == InitRule::SeededUniform);
  CHECK(cfg.sim.z0_rule == InitRule::Zero);
  REQUIRE(cfg.out_dir.has_value());
  CHECK(*cfg.out_dir == fs::path("artifacts"));
  CHECK(cfg.verify_spectral);
  CHECK(std::holds_alternative<HomogeneousPartition>(cfg.sim.partition));
  CHECK(std::holds_alternative<GridNetwork>(cfg.sim.network));
}

TEST_CASE("omitted knobs fall back to the documented defaults") {
  write_problem_files();
  fs::path p = write_file("minimal_hom.cfg",
                          "variant: hom\nmatrix: a43.txt\nrhs: b4.txt\n");
  ExperimentConfig cfg = parse_config(p);
  CHECK(cfg.sim.h == 1e-3);
  CHECK(cfg.sim.t_end == 50.0);
  CHECK(cfg.sim.record_every == 10);
  CHECK(cfg.sim.tol_converge == 1e-6);
  CHECK(cfg.sim.tol_exact == 1e-8);
  CHECK(cfg.sim.seed == 0);
  CHECK(cfg.sim.x0_rule == InitRule::Zero);
  CHECK(cfg.sim.z0_rule == InitRule::Zero);
  CHECK(cfg.b_rule == "diagonal");
  CHECK(cfg.topology == ExperimentConfig::Topology::StandardGrid);
  CHECK_FALSE(cfg.out_dir.has_value());
  CHECK_FALSE(cfg.verify_spectral);
}

TEST_CASE("clustered configs take flat and per-cluster block lists") {
  write_problem_files();
  fs::path p1 = write_file("c1.cfg",
                           "variant: case1\n"
                           "matrix: a43.txt\n"
                           "rhs: b4.txt\n"
                           "col_widths: 1 1 1\n"
                           "row_heights:\n"
                           "  1 2 1\n"
                           "  2 2\n"
                           "  2 1 1\n"
                           "b_rule: first_cluster_all\n");
  ExperimentConfig c1 = parse_config(p1);
  CHECK(c1.variant == Variant::Case1);
  CHECK(c1.flat_widths == std::vector<std::size_t>{1, 1, 1});
  REQUIRE(c1.nested_heights.size() == 3);
  CHECK(c1.nested_heights[0] == std::vector<std::size_t>{1, 2, 1});
  CHECK(c1.nested_heights[1] == std::vector<std::size_t>{2, 2});
  CHECK(c1.nested_heights[2] == std::vector<std::size_t>{2, 1, 1});
  CHECK(c1.topology == ExperimentConfig::Topology::Paths);  // cluster default
  CHECK(c1.b_rule == "first_cluster_all");
  CHECK(std::holds_alternative<Case1Partition>(c1.sim.partition));
  CHECK(std::holds_alternative<DoubleLayerNetwork>(c1.sim.network));

  fs::path p2 = write_file("c2.cfg",
                           "variant: case2\n"
                           "matrix: a43.txt\n"
                           "rhs: b4.txt\n"
                           "row_heights: 2 1 1\n"
                           "col_widths:\n"
                           "  1 1 1\n"
                           "  2 1\n"
                           "  1 1 1\n");
  ExperimentConfig c2 = parse_config(p2);
  CHECK(c2.variant == Variant::Case2);
  CHECK(c2.flat_heights == std::vector<std::size_t>{2, 1, 1});
  REQUIRE(c2.nested_widths.size() == 3);
  CHECK(c2.nested_widths[1] == std::vector<std::size_t>{2, 1});
  CHECK(c2.b_rule == "diagonal");  // case2 default
  CHECK(std::holds_alternative<Case2Partition>(c2.sim.partition));
}

TEST_CASE("malformed files are parse errors with line numbers") {
  write_problem_files();

  fs::path dup = write_file("dup.cfg",
                            "variant: hom\nmatrix: i2.txt\nrhs: b2.txt\n"
                            "h: 1e-3\nh: 2e-3\n");
  ParseError e1 = expect_parse_error(dup);
  CHECK(e1.line == 5);
  CHECK(std::string(e1.what()).find("duplicate") != std::string::npos);

  fs::path dangling = write_file("dangling.cfg", "  1 2 1\nvariant: hom\n");
  ParseError e2 = expect_parse_error(dangling);
  CHECK(e2.line == 1);

  fs::path novariant = write_file("badvariant.cfg",
                                  "variant: banana\nmatrix: i2.txt\nrhs: b2.txt\n");
  CHECK(std::string(expect_parse_error(novariant).what()).find("banana") !=
        std::string::npos);

  fs::path badh = write_file("badh.cfg",
                             kIdentityBase + "h: fast\n");
  CHECK_THROWS_AS(parse_config(badh), ParseError);

  fs::path badinit = write_file("badinit.cfg", kIdentityBase + "x0: random\n");
  CHECK_THROWS_AS(parse_config(badinit), ParseError);

  fs::path badbool = write_file("badbool.cfg",
                                kIdentityBase + "verify_spectral: yes\n");
  CHECK_THROWS_AS(parse_config(badbool), ParseError);

  fs::path badbrule = write_file("badbrule.cfg",
                                 kIdentityBase + "b_rule: nearest\n");
  CHECK_THROWS_AS(parse_config(badbrule), ParseError);

  write_file("junk_matrix.txt", "2 2\n1 two\n3 4\n");
  fs::path badmat = write_file("badmat.cfg",
                               "variant: hom\nmatrix: junk_matrix.txt\nrhs: b2.txt\n");
  CHECK_THROWS_AS(parse_config(badmat), ParseError);
}

TEST_CASE("semantic problems are validation errors naming the field") {
  write_problem_files();

  ValidationError missing = expect_validation(
      write_file("norhs.cfg", "variant: hom\nmatrix: i2.txt\n"));
  CHECK(missing.field == "rhs");
  CHECK(missing.reason == "required");

  ValidationError shape = expect_validation(write_file(
      "shortb.cfg", "variant: hom\nmatrix: a43.txt\nrhs: b2.txt\n"));
  CHECK(shape.field == "rhs");

  ValidationError nofile = expect_validation(write_file(
      "nofile.cfg", "variant: hom\nmatrix: nope.txt\nrhs: b2.txt\n"));
  CHECK(nofile.field == "matrix");

  ValidationError unknown = expect_validation(
      write_file("unknown.cfg", kIdentityBase + "banana: 7\n"));
  CHECK(unknown.field == "banana");
  CHECK(unknown.reason.find("unknown key") != std::string::npos);
  CHECK(unknown.reason.find("line 6") != std::string::npos);

  ValidationError homcuts = expect_validation(
      write_file("homcuts.cfg", kIdentityBase + "col_widths: 1 1\n"));
  CHECK(homcuts.field == "col_widths");

  ValidationError badsum = expect_validation(write_file(
      "badsum.cfg",
      "variant: case1\nmatrix: a43.txt\nrhs: b4.txt\n"
      "col_widths: 1 1\nrow_heights:\n  1 2 1\n  2 2\n"));
  CHECK(badsum.field == "col_widths");
  CHECK(badsum.reason.find("sum") != std::string::npos);

  ValidationError badcuts = expect_validation(write_file(
      "badcuts.cfg",
      "variant: case1\nmatrix: a43.txt\nrhs: b4.txt\n"
      "col_widths: 1 1 1\nrow_heights:\n  1 2 1\n  2 2\n"));
  CHECK(badcuts.field == "row_heights");

  ValidationError blocksum = expect_validation(write_file(
      "blocksum.cfg",
      "variant: case1\nmatrix: a43.txt\nrhs: b4.txt\n"
      "col_widths: 1 1 1\nrow_heights:\n  1 2 1\n  2 1\n  2 1 1\n"));
  CHECK(blocksum.field == "row_heights");

  ValidationError wrongtopo = expect_validation(write_file(
      "wrongtopo.cfg",
      "variant: case1\nmatrix: a43.txt\nrhs: b4.txt\n"
      "col_widths: 1 1 1\nrow_heights:\n  1 2 1\n  2 2\n  2 1 1\n"
      "topology: standard_grid\n"));
  CHECK(wrongtopo.field == "topology");

  ValidationError gridpaths = expect_validation(
      write_file("gridpaths.cfg", kIdentityBase + "topology: paths\n"));
  CHECK(gridpaths.field == "topology");

  ValidationError nonet = expect_validation(
      write_file("nonet.cfg", kIdentityBase + "topology: file\n"));
  CHECK(nonet.field == "topology_file");

  ValidationError zerostep = expect_validation(
      write_file("zerostep.cfg", kIdentityBase + "h: 0\n"));
  CHECK(zerostep.field == "h");

  ValidationError norec = expect_validation(write_file(
      "norec.cfg",
      "variant: hom\nmatrix: i2.txt\nrhs: b2.txt\nrecord_every: 0\n"));
  CHECK(norec.field == "record_every");
}

TEST_CASE("network files must match the variant family") {
  write_problem_files();
  {
    std::ofstream out(fixture_root() / "grid22.net");
    format_network(out, standard_grid(2, 2));
  }
  {
    std::ofstream out(fixture_root() / "dl.net");
    format_network(out, path_double_layer({3, 2, 3}));
  }

  // a matching explicit file parses and is used
  fs::path good = write_file("gridfile.cfg",
                             kIdentityBase +
                                 "topology: file\ntopology_file: grid22.net\n");
  ExperimentConfig cfg = parse_config(good);
  CHECK(cfg.topology == ExperimentConfig::Topology::File);
  CHECK(std::holds_alternative<GridNetwork>(cfg.sim.network));

  // a double-layered file under the scalar variant is rejected
  ValidationError wrong = expect_validation(write_file(
      "dlfile.cfg", kIdentityBase + "topology: file\ntopology_file: dl.net\n"));
  CHECK(wrong.field == "topology_file");

  // and the mirror image for a clustered variant
  ValidationError wrong2 = expect_validation(write_file(
      "c1grid.cfg",
      "variant: case1\nmatrix: a43.txt\nrhs: b4.txt\n"
      "col_widths: 1 1 1\nrow_heights:\n  1 2 1\n  2 2\n  2 1 1\n"
      "topology: file\ntopology_file: grid22.net\n"));
  CHECK(wrong2.field == "topology_file");
}

TEST_CASE("output directory precedence is flag, config, environment, default") {
  write_problem_files();
  fs::path with_out = write_file("wout.cfg", kIdentityBase + "out: artifacts\n");
  fs::path without = write_file("noout.cfg", kIdentityBase);
  ExperimentConfig cfg_out = parse_config(with_out);
  ExperimentConfig cfg_plain = parse_config(without);

  CliOverrides flag;
  flag.out = fixture_root() / "flagged";
  CHECK(resolve_out_dir(cfg_out, flag) == fixture_root() / "flagged");

  CliOverrides none;
  // config-relative: `out:` resolves next to the config file
  CHECK(resolve_out_dir(cfg_out, none) == fixture_root() / "artifacts");

  ::setenv("LSQ_SWARM_OUT", (fixture_root() / "envroot").c_str(), 1);
  CHECK(resolve_out_dir(cfg_plain, none) == fixture_root() / "envroot" / "noout");
  ::unsetenv("LSQ_SWARM_OUT");
  CHECK(resolve_out_dir(cfg_plain, none) == fs::path("out") / "noout");
}

TEST_CASE("running an experiment writes the artifact set") {
  write_problem_files();
  fs::path p = write_file("run_identity.cfg",
                          kIdentityBase + "verify_spectral: true\n");
  ExperimentConfig cfg = parse_config(p);
  CliOverrides ov;
  ov.out = fixture_root() / "run1";

  std::ostringstream log;
  CHECK(run_experiment(cfg, ov, log) == 0);
  CHECK(fs::exists(*ov.out / "timeseries.csv"));
  CHECK(fs::exists(*ov.out / "summary.txt"));
  CHECK(fs::exists(*ov.out / "spectral.txt"));

  const std::string line = log.str();
  CHECK(line.find("Exact") != std::string::npos);
  CHECK(line.find("artifacts in") != std::string::npos);

  const std::string csv = slurp(*ov.out / "timeseries.csv");
  CHECK(csv.rfind("t,E,Ye,grad_norm,disagreement,conservation_drift\n", 0) == 0);

  const std::string summary = slurp(*ov.out / "summary.txt");
  CHECK(summary.find("classification: Exact") != std::string::npos);
  CHECK(summary.find("variant: hom") != std::string::npos);
  CHECK(summary.find("E_reference: oracle") != std::string::npos);

  const std::string spectral = slurp(*ov.out / "spectral.txt");
  CHECK(spectral.find("hurwitz_nonzero: true") != std::string::npos);
  CHECK(spectral.find("zero_nondefective: true") != std::string::npos);

  // the same experiment again produces byte-identical timeseries
  CliOverrides ov2;
  ov2.out = fixture_root() / "run2";
  std::ostringstream log2;
  CHECK(run_experiment(cfg, ov2, log2) == 0);
  CHECK(slurp(*ov2.out / "timeseries.csv") == csv);

  // a seed override changes the run but is echoed in the summary
  CliOverrides ov3;
  ov3.out = fixture_root() / "run3";
  ov3.seed = 99;
  std::ostringstream log3;
  ExperimentConfig seeded = parse_config(
      write_file("run_seeded.cfg", kIdentityBase + "x0: uniform\n"));
  CHECK(run_experiment(seeded, ov3, log3) == 0);
  CHECK(slurp(*ov3.out / "summary.txt").find("seed: 99") != std::string::npos);

  CliOverrides bad;
  bad.out = fixture_root() / "never";
  bad.h = -1.0;
  std::ostringstream log4;
  CHECK_THROWS_AS(run_experiment(cfg, bad, log4), ValidationError);
}

TEST_CASE("a run that cannot converge in time exits with the partial code") {
  write_problem_files();
  fs::path p = write_file("short.cfg",
                          "variant: hom\nmatrix: a43.txt\nrhs: b4.txt\n"
                          "t_end: 0.5\nrecord_every: 10\n");
  ExperimentConfig cfg = parse_config(p);
  CliOverrides ov;
  ov.out = fixture_root() / "short_run";
  std::ostringstream log;
  CHECK(run_experiment(cfg, ov, log) == 2);
  CHECK(log.str().find("NotConverged") != std::string::npos);
  CHECK(slurp(*ov.out / "summary.txt").find("classification: NotConverged") !=
        std::string::npos);
}

TEST_CASE("verification passes on the benchmark variants") {
  write_problem_files();
  fs::path hom = write_file("v_hom.cfg",
                            "variant: hom\nmatrix: a43.txt\nrhs: b4.txt\n");
  fs::path c2 = write_file("v_c2.cfg",
                           "variant: case2\nmatrix: a43.txt\nrhs: b4.txt\n"
                           "row_heights: 2 1 1\n"
                           "col_widths:\n  1 1 1\n  2 1\n  1 1 1\n");
  for (const fs::path* p : {&hom, &c2}) {
    ExperimentConfig cfg = parse_config(*p);
    CliOverrides ov;
    ov.out = fixture_root() / ("verify_" + p->stem().string());
    std::ostringstream log;
    CHECK(verify_experiment(cfg, ov, log) == 0);
    const std::string text = log.str();
    CHECK(text.find("pass  hurwitz_nonzero") != std::string::npos);
    CHECK(text.find("pass  zero_nondefective") != std::string::npos);
    CHECK(text.find("pass  field_compact_equivalence") != std::string::npos);
    CHECK(text.find("FAIL") == std::string::npos);
    CHECK(fs::exists(*ov.out / "spectral.txt"));
  }

  // single-column case2 with uniform shares: every block is scalar and all
  // clusters have one agent, so the grid specialization check engages
  write_file("a21.txt", "2 1\n1\n1\n");
  write_file("b21.txt", "2 1\n1\n3\n");
  fs::path grid_like = write_file("v_c2_grid.cfg",
                                  "variant: case2\nmatrix: a21.txt\nrhs: b21.txt\n"
                                  "row_heights: 1 1\n"
                                  "col_widths:\n  1\n  1\n"
                                  "b_rule: uniform\n");
  ExperimentConfig cfg = parse_config(grid_like);
  CliOverrides ov;
  ov.out = fixture_root() / "verify_grid_like";
  std::ostringstream log;
  CHECK(verify_experiment(cfg, ov, log) == 0);
  CHECK(log.str().find("pass  grid_specialization") != std::string::npos);
}
