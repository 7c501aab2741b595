#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "toruslz/cli.hpp"
#include "toruslz/io.hpp"

using namespace toruslz;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path p = fs::temp_directory_path() /
                     ("toruslz_test_" + std::to_string(::getpid()) + "_" + tag + "_" +
                      std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("fixed float formatting") {
  CHECK(io::format_double(1.0) == "1.000000000000e+00");
  CHECK(io::format_double(-0.0) == "0.000000000000e+00");
  CHECK(io::format_double(1.0 / 3.0) == "3.333333333333e-01");
  CHECK(io::rounded(1.0 / 3.0) == 0.3333333333333);
  CHECK(io::rounded(2.5) == 2.5);
}

TEST_CASE("complex dumps round-trip") {
  const fs::path dir = fresh_dir("dump");
  const TruncatedOperator op = build_lz(2, PhysicalConstants(1.0));
  io::write_complex_dump(dir / "op.bin", io::kOperatorMagic, 2, op.matrix());
  CHECK(fs::file_size(dir / "op.bin") == 16 + 25 * 25 * 16);
  const io::ComplexDump d = io::read_complex_dump(dir / "op.bin");
  CHECK(d.magic == io::kOperatorMagic);
  CHECK(d.cutoff == 2);
  CHECK(d.rows == 25);
  CHECK(d.cols == 25);
  for (Index i = 0; i < 25; ++i)
    for (Index j = 0; j < 25; ++j) CHECK(d.data[static_cast<std::size_t>(i * 25 + j)] == op.matrix()(i, j));

  // Header bytes: magic then little-endian N.
  const std::string raw = slurp(dir / "op.bin");
  CHECK(raw.substr(0, 8) == "TLZOP001");
  CHECK(static_cast<unsigned char>(raw[8]) == 2);
  for (int k = 9; k < 16; ++k) CHECK(raw[static_cast<std::size_t>(k)] == '\0');

  std::ofstream(dir / "bad.bin", std::ios::binary) << "TLZOP001";
  CHECK_THROWS_AS(io::read_complex_dump(dir / "bad.bin"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("density export writes a sidecar") {
  const fs::path dir = fresh_dir("density");
  const ModeBasis b(1);
  std::vector<Complex> c(static_cast<std::size_t>(b.dim()), 0.0);
  c[static_cast<std::size_t>(b.flat(0, 0))] = 1.0;
  const PositionDensity d = to_position_density(c, 1, 8, TorusGeometry(2.0));
  io::write_density(dir / "d.bin", d);
  CHECK(fs::file_size(dir / "d.bin") == 64 * sizeof(double));
  const auto side = nlohmann::json::parse(slurp(dir / "d.bin.json"));
  CHECK(side["G"] == 8);
  CHECK(side["ell"] == 2.0);
  fs::remove_all(dir);
}

TEST_CASE("mu command") {
  const Run r = run({"mu", "--r", "0.5,1.0823922,1.4142"});
  REQUIRE(r.code == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "r,r_over_ell,mu,theta_r");
  CHECK(l[1] == "5.000000000000e-01,5.000000000000e-01,1.000000000000e+00,");
  CHECK(l[2].find(",5.000000008304e-01,") != std::string::npos);
  CHECK(l[3].find(",1.221060143408e-05,") != std::string::npos);

  const Run empty = run({"mu"});
  CHECK(empty.code == 0);
  CHECK(lines(empty.out).size() == 1);

  const Run far = run({"mu", "--r", "1.5"});
  CHECK(far.code == 2);
  CHECK(far.err.find("domain error") != std::string::npos);

  const Run scaled = run({"mu", "--r", "2.4", "--ell", "2", "--format", "json"});
  REQUIRE(scaled.code == 0);
  const auto doc = nlohmann::json::parse(scaled.out);
  CHECK(doc[0]["r_over_ell"] == 1.2);
}

TEST_CASE("parse and config errors exit with 2, help with 0") {
  CHECK(run({}).code == 2);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({"mu", "--bogus"}).code == 2);
  CHECK(run({"spectrum", "--N", "x"}).code == 2);
  CHECK(run({"mu", "--format", "xml"}).code == 2);
  CHECK(run({"mu", "--help"}).code == 0);
  CHECK(run({"spectrum", "--N", "2", "--hbar", "-1"}).code == 2);
  CHECK(run({"orbit", "--r", "1.5"}).code == 2);
  CHECK(run({"localize", "--N", "4", "--grid", "10"}).code == 2);
}

TEST_CASE("config file supplies defaults and flags override it") {
  const fs::path dir = fresh_dir("config");
  std::ofstream(dir / "cfg.json") << R"({"hbar": 2.0, "N": 1, "out": ")" << (dir / "a").string()
                                 << R"(", "r": [0.5], "grid": 64})";
  const Run a = run({"spectrum", "--config", (dir / "cfg.json").string()});
  REQUIRE(a.code == 0);
  const auto spectrum = nlohmann::json::parse(slurp(dir / "a" / "spectrum.json"));
  CHECK(spectrum["hbar"] == 2.0);
  CHECK(spectrum["N"] == 1);
  CHECK(spectrum["eigenvalues"].size() == 9);
  CHECK(spectrum["eigenvalues"][0] == -4.0);

  const Run b = run({"spectrum", "--config", (dir / "cfg.json").string(), "--hbar", "3", "--out",
                     (dir / "b").string()});
  REQUIRE(b.code == 0);
  const auto spec_b = nlohmann::json::parse(slurp(dir / "b" / "spectrum.json"));
  CHECK(spec_b["hbar"] == 3.0);
  CHECK(spec_b["eigenvalues"][0] == -6.0);

  std::ofstream(dir / "bad.json") << R"({"hbar": 1.0, "colour": "blue"})";
  CHECK(run({"mu", "--config", (dir / "bad.json").string()}).code == 2);
  std::ofstream(dir / "broken.json") << "{";
  CHECK(run({"mu", "--config", (dir / "broken.json").string()}).code == 2);
  std::ofstream(dir / "typed.json") << R"({"N": "many"})";
  CHECK(run({"spectrum", "--config", (dir / "typed.json").string()}).code == 2);
  CHECK(run({"mu", "--config", (dir / "missing.json").string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("output directory comes from the environment when --out is absent") {
  const fs::path dir = fresh_dir("env");
  ::setenv("TORUSLZ_OUT", dir.string().c_str(), 1);
  const Run r = run({"orbit", "--r", "0.5", "--samples", "4"});
  ::unsetenv("TORUSLZ_OUT");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "orbit.json"));
  fs::remove_all(dir);
}

TEST_CASE("spectrum command") {
  const fs::path dir = fresh_dir("spectrum");
  REQUIRE(run({"spectrum", "--N", "0", "--out", dir.string()}).code == 0);
  auto doc = nlohmann::json::parse(slurp(dir / "spectrum.json"));
  CHECK(doc["eigenvalues"].size() == 1);
  CHECK(doc["eigenvalues"][0] == 0.0);

  REQUIRE(run({"spectrum", "--N", "16", "--out", dir.string(), "--dump-operator", "--dump-vectors"})
              .code == 0);
  doc = nlohmann::json::parse(slurp(dir / "spectrum.json"));
  CHECK(doc["N"] == 16);
  CHECK(doc["eigenvalues"].size() == 33 * 33);
  CHECK(doc["residual_bound"].get<double>() < 1e-9);
  CHECK(doc["statistics"]["gap_occupancy"] == 0.0);
  const auto hist = lines(slurp(dir / "histogram.csv"));
  REQUIRE(hist.size() >= 2);
  CHECK(hist[0] == "bin_lo,bin_hi,count");
  // Symmetric histogram: counts read the same in both directions.
  std::vector<std::string> counts;
  for (std::size_t i = 1; i < hist.size(); ++i) counts.push_back(hist[i].substr(hist[i].rfind(',') + 1));
  CHECK(std::equal(counts.begin(), counts.end(), counts.rbegin()));
  CHECK(io::read_complex_dump(dir / "operator.bin").rows == 33 * 33);
  CHECK(io::read_complex_dump(dir / "eigenvectors.bin").cols == 33 * 33);

  CHECK(run({"spectrum", "--N", "3", "--tolerance", "1e-30", "--out", dir.string()}).code == 3);
  fs::remove_all(dir);
}

TEST_CASE("iterative spectrum for large N") {
  const fs::path dir = fresh_dir("lanczos");
  const Run r = run({"spectrum", "--N", "6", "--dense-limit", "50", "--num-eigenpairs", "5", "--out",
                     dir.string()});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "spectrum.json"));
  CHECK(doc["method"] == "lanczos");
  CHECK(doc["eigenvalues"].size() == 5);
  CHECK(doc["complete"] == false);
  fs::remove_all(dir);
}

TEST_CASE("localize command") {
  const fs::path dir = fresh_dir("localize");
  const Run r = run({"localize", "--N", "3", "--grid", "32", "--pp-min", "0.7", "--out", dir.string(),
                     "--density-index", "0"});
  REQUIRE(r.code == 0);
  const auto l = lines(slurp(dir / "localization.csv"));
  REQUIRE(l.size() == 3 + 49);
  CHECK(l[0].rfind("# N=3 G=32", 0) == 0);
  CHECK(l[1].find("pp_min_disk_mass=7.000000000000e-01") != std::string::npos);
  CHECK(l[1].find("ac_max_disk_mass=2.000000000000e-01") != std::string::npos);
  CHECK(l[2] == "lambda_over_hbar,disk_mass,corner_mass,label");
  CHECK(fs::file_size(dir / "density_0.bin") == 32 * 32 * 8);
  const auto summary = nlohmann::json::parse(slurp(dir / "localization_summary.json"));
  CHECK(summary["N"] == 3);
  fs::remove_all(dir);
}

TEST_CASE("orbit command") {
  const fs::path dir = fresh_dir("orbit");
  REQUIRE(run({"orbit", "--r", "1.2", "--samples", "32", "--out", dir.string()}).code == 0);
  auto doc = nlohmann::json::parse(slurp(dir / "orbit.json"));
  CHECK(doc["winding"] == -1);
  CHECK(doc["n_events"] == 4);
  const Run mu_run = run({"mu", "--r", "1.2", "--format", "json"});
  CHECK(doc["mu_measured"] == nlohmann::json::parse(mu_run.out)[0]["mu"]);
  const auto rows = lines(slurp(dir / "trajectory.csv"));
  CHECK(rows[0] == "t,x,y,phi,quadrant,event_flag");
  CHECK(rows.size() == 1 + 32 + 8);

  REQUIRE(run({"orbit", "--r", "0.5", "--out", dir.string()}).code == 0);
  doc = nlohmann::json::parse(slurp(dir / "orbit.json"));
  CHECK(doc["winding"] == 1);
  CHECK(doc["n_events"] == 0);

  const Run rect = run({"orbit", "--r", "1.3", "--unsafe-aspect", "1.5", "--duration", "20", "--out",
                        dir.string()});
  CHECK(rect.code == 0);
  CHECK(rect.err.find("warning") != std::string::npos);
  CHECK(run({"orbit", "--r", "1.3", "--unsafe-aspect", "-1", "--out", dir.string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("sweep command") {
  const fs::path dir = fresh_dir("sweep");
  REQUIRE(run({"sweep", "--N", "2,4,6", "--out", dir.string()}).code == 0);
  const auto rows = lines(slurp(dir / "sweep.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].rfind("N,dim,peak_fraction,gap_occupancy", 0) == 0);

  REQUIRE(run({"sweep", "--N", "6", "--format", "json", "--out", dir.string()}).code == 0);
  REQUIRE(run({"spectrum", "--N", "6", "--out", dir.string()}).code == 0);
  const auto sweep = nlohmann::json::parse(slurp(dir / "sweep.json"));
  const auto spectrum = nlohmann::json::parse(slurp(dir / "spectrum.json"));
  CHECK(sweep["rows"][0]["peak_fraction"] == spectrum["statistics"]["peak_fraction"]);
  CHECK(sweep["rows"][0]["gap_occupancy"] == spectrum["statistics"]["gap_occupancy"]);
  CHECK(run({"sweep", "--N", "6,4", "--out", dir.string()}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("branches command") {
  const fs::path dir = fresh_dir("branches");
  REQUIRE(run({"branches", "--m-max", "3", "--samples", "100", "--out", dir.string()}).code == 0);
  const auto rows = lines(slurp(dir / "branches.csv"));
  CHECK(rows.size() == 1 + 700);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].rfind("0,", 0) == 0) CHECK(rows[i].substr(rows[i].rfind(',') + 1) == "0.000000000000e+00");
  }
  const auto bands = nlohmann::json::parse(slurp(dir / "bands.json"));
  CHECK(bands["pp"] == "integer lattice");
  CHECK(bands["gap"][0] == -1.0);
  CHECK(run({"branches", "--m-max", "0", "--out", dir.string()}).code == 2);
  fs::remove_all(dir);
}
