#include "toruslz/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "toruslz/analytic_spectrum.hpp"
#include "toruslz/classical_dynamics.hpp"
#include "toruslz/eigensolver.hpp"
#include "toruslz/errors.hpp"
#include "toruslz/geometry.hpp"
#include "toruslz/io.hpp"
#include "toruslz/localization.hpp"
#include "toruslz/operator_builder.hpp"

namespace toruslz::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flag bound to a RunConfig field, with the setter used for --config values.
struct Binding {
  CLI::Option* option = nullptr;
  std::function<void(const Json&)> assign;
};

class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& help, RunConfig& cfg)
      : app_(parent.add_subcommand(name, help)) {
    app_->fallthrough(false);
    bind("hbar", cfg.hbar, "Reduced Planck constant (> 0)");
    bind("ell", cfg.ell, "Half side length of the torus (> 0)");
    bind("out", cfg.out_dir, "Output directory (default: $TORUSLZ_OUT or .)");
    bind("format", cfg.format, "Table encoding: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    bind("threads", cfg.threads, "Worker threads for numerical kernels")
        ->check(CLI::PositiveNumber);
    app_->add_option("--config", config_path_, "JSON file with default parameters");
  }

  template <class T>
  CLI::Option* bind(const std::string& key, T& field, const std::string& help) {
    std::string flag = "--" + key;
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    CLI::Option* opt = app_->add_option(flag, field, help);
    bindings_[key] = {opt, [&field](const Json& j) { field = j.get<T>(); }};
    return opt;
  }

  CLI::Option* flag(const std::string& key, bool& field, const std::string& help) {
    std::string name = "--" + key;
    for (char& c : name) {
      if (c == '_') c = '-';
    }
    CLI::Option* opt = app_->add_flag(name, field, help);
    bindings_[key] = {opt, [&field](const Json& j) { field = j.get<bool>(); }};
    return opt;
  }

  CLI::App* app() const { return app_; }

  // Applies --config values for every key whose flag was not given.
  void apply_config(const std::map<std::string, std::set<std::string>>& known_keys) const {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw ConfigError("cannot read config file " + config_path_);
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError("config file " + config_path_ + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
      const auto it = bindings_.find(key);
      if (it == bindings_.end()) {
        if (!known_keys.contains(key)) throw ConfigError("unknown config key '" + key + "'");
        continue;
      }
      if (it->second.option->count() > 0) continue;
      try {
        it->second.assign(value);
      } catch (const Json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
      }
    }
  }

  void collect_keys(std::map<std::string, std::set<std::string>>& keys) const {
    for (const auto& [key, b] : bindings_) keys[key].insert(app_->get_name());
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, Binding> bindings_;
};

void validate_common(const RunConfig& cfg) {
  if (!(cfg.hbar > 0.0) || !std::isfinite(cfg.hbar)) throw ConfigError("--hbar must be positive");
  if (!(cfg.ell > 0.0) || !std::isfinite(cfg.ell)) throw ConfigError("--ell must be positive");
  if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("--format must be csv or json");
  if (cfg.threads == 0) throw ConfigError("--threads must be positive");
}

fs::path output_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("TORUSLZ_OUT"); env != nullptr && *env != '\0') return env;
  return ".";
}

void emit(const fs::path& path, const std::string& contents, std::ostream& out) {
  io::write_text(path, contents);
  out << "wrote " << path.string() << '\n';
}

SolverOptions solver_options(const RunConfig& cfg, bool vectors) {
  if (!(cfg.tolerance > 0.0)) throw ConfigError("--tolerance must be positive");
  if (cfg.dense_limit < 1) throw ConfigError("--dense-limit must be positive");
  if (cfg.num_eigenpairs < 1) throw ConfigError("--num-eigenpairs must be positive");
  SolverOptions o;
  o.tolerance = cfg.tolerance;
  o.dense_limit = cfg.dense_limit;
  o.compute_vectors = vectors;
  o.iterative.num_eigenpairs = cfg.num_eigenpairs;
  return o;
}

void check_cutoff(int n) {
  if (n < 0) throw ConfigError("--N must be nonnegative");
}

// --- subcommands -------------------------------------------------------------

void cmd_mu(const RunConfig& cfg, std::ostream& out) {
  const TorusGeometry geom(cfg.ell);
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "r,r_over_ell,mu,theta_r\n";
  for (double r : cfg.radii) {
    const double m = mu(r, geom);
    const bool edge = r >= geom.ell();
    const double theta = edge ? theta_r(r, geom) : 0.0;
    csv << io::format_double(r) << ',' << io::format_double(r / geom.ell()) << ','
        << io::format_double(m) << ',' << (edge ? io::format_double(theta) : "") << '\n';
    Json row;
    row["r"] = io::rounded(r);
    row["r_over_ell"] = io::rounded(r / geom.ell());
    row["mu"] = io::rounded(m);
    row["theta_r"] = edge ? Json(io::rounded(theta)) : Json(nullptr);
    rows.push_back(std::move(row));
  }
  out << (cfg.format == "json" ? io::dump(rows) : csv.str());
}

void cmd_branches(const RunConfig& cfg, std::ostream& out) {
  if (cfg.m_max < 0) throw ConfigError("--m-max must be nonnegative");
  if (cfg.samples < 1) throw ConfigError("--samples must be positive");
  const TorusGeometry geom(cfg.ell);
  const PhysicalConstants consts(cfg.hbar);
  const auto table = branch_table(cfg.m_max, cfg.samples, geom, consts, cfg.threads);
  const double lambda_max =
      cfg.lambda_max > 0.0 ? cfg.lambda_max : static_cast<double>(cfg.m_max + 1) * cfg.hbar;
  const BandStructure bands = band_structure(lambda_max, consts);
  const fs::path dir = output_dir(cfg);
  std::ostringstream csv;
  io::write_branch_csv(csv, table, cfg.hbar);
  emit(dir / "branches.csv", csv.str(), out);
  emit(dir / "bands.json", io::dump(io::bands_json(bands)), out);
}

void cmd_spectrum(const RunConfig& cfg, std::ostream& out) {
  check_cutoff(cfg.cutoff);
  const PhysicalConstants consts(cfg.hbar);
  const bool vectors = cfg.dump_vectors;
  const SolverOptions opts = solver_options(cfg, vectors);
  const auto dim = static_cast<Index>(2 * cfg.cutoff + 1) * (2 * cfg.cutoff + 1);
  BuildOptions build;
  build.threads = cfg.threads;
  build.materialize = dim <= opts.dense_limit || cfg.dump_operator;
  const TruncatedOperator op = build_lz(cfg.cutoff, consts, build);
  const EigenDecomposition decomp = eigendecompose(op, opts);
  const SpectralStatistics stats = spectral_statistics(decomp, cfg.epsilon, cfg.bin_width);

  Json doc = io::spectrum_json(decomp, cfg.cutoff, cfg.hbar);
  Json s;
  s["epsilon"] = io::rounded(stats.epsilon);
  s["peak_fraction"] = io::rounded(stats.peak_fraction);
  s["gap_occupancy"] = io::rounded(stats.gap_occupancy);
  s["band_occupancy"] = Json::array({io::rounded(stats.band_occupancy[0]),
                                     io::rounded(stats.band_occupancy[1]),
                                     io::rounded(stats.band_occupancy[2])});
  s["band_interior_above"] = stats.band_interior_above;
  s["band_interior_below"] = stats.band_interior_below;
  doc["statistics"] = std::move(s);

  const fs::path dir = output_dir(cfg);
  emit(dir / "spectrum.json", io::dump(doc), out);
  std::ostringstream hist;
  io::write_histogram_csv(hist, stats.histogram);
  emit(dir / "histogram.csv", hist.str(), out);
  if (cfg.dump_operator) {
    io::write_complex_dump(dir / "operator.bin", io::kOperatorMagic, cfg.cutoff, op.matrix());
    out << "wrote " << (dir / "operator.bin").string() << '\n';
  }
  if (vectors) {
    io::write_complex_dump(dir / "eigenvectors.bin", io::kVectorsMagic, cfg.cutoff,
                           decomp.eigenvectors);
    out << "wrote " << (dir / "eigenvectors.bin").string() << '\n';
  }
}

std::int64_t default_grid(int cutoff) {
  std::int64_t g = 1;
  while (g < 2 * (2 * static_cast<std::int64_t>(cutoff) + 1)) g *= 2;
  return g;
}

double distance_to_lattice(double x) { return std::abs(x - std::round(x)); }

void cmd_localize(const RunConfig& cfg, std::ostream& out) {
  check_cutoff(cfg.cutoff);
  const TorusGeometry geom(cfg.ell);
  const PhysicalConstants consts(cfg.hbar);
  const std::int64_t grid = cfg.grid > 0 ? cfg.grid : default_grid(cfg.cutoff);
  if (grid < 2 * (2 * static_cast<std::int64_t>(cfg.cutoff) + 1)) {
    throw ConfigError("--grid must be at least 2(2N+1) = " +
                      std::to_string(2 * (2 * cfg.cutoff + 1)));
  }
  LocalizationThresholds thresholds;
  thresholds.pp_min_disk_mass = cfg.pp_min;
  thresholds.ac_max_disk_mass = cfg.ac_max;
  if (!(cfg.ac_max >= 0.0 && cfg.ac_max < cfg.pp_min && cfg.pp_min <= 1.0)) {
    throw ConfigError("thresholds must satisfy 0 <= ac-max < pp-min <= 1");
  }
  SolverOptions opts = solver_options(cfg, true);
  BuildOptions build;
  build.threads = cfg.threads;
  const TruncatedOperator op = build_lz(cfg.cutoff, consts, build);
  if (op.dim() > opts.dense_limit) {
    throw ConfigError("localize needs the full spectrum; N is above the dense limit");
  }
  const EigenDecomposition decomp = eigendecompose(op, opts);
  const LocalizationReport report =
      classify_spectrum(decomp, cfg.cutoff, grid, thresholds, geom, consts, cfg.threads);

  const fs::path dir = output_dir(cfg);
  std::ostringstream csv;
  io::write_localization_csv(csv, report);
  emit(dir / "localization.csv", csv.str(), out);

  double band_sum = 0.0;
  double peak_sum = 0.0;
  std::int64_t band_count = 0;
  std::int64_t peak_count = 0;
  std::int64_t labels[3] = {0, 0, 0};
  for (const LocalizationRecord& r : report.records) {
    const double d = distance_to_lattice(r.lambda / cfg.hbar);
    if (d > 0.2) {
      band_sum += r.corner_mass;
      ++band_count;
    } else if (d < 0.05) {
      peak_sum += r.corner_mass;
      ++peak_count;
    }
    ++labels[static_cast<int>(r.label)];
  }
  Json summary;
  summary["N"] = cfg.cutoff;
  summary["G"] = grid;
  summary["band_interior_count"] = band_count;
  summary["band_interior_mean_corner_mass"] =
      band_count > 0 ? Json(io::rounded(band_sum / static_cast<double>(band_count))) : Json(nullptr);
  summary["near_integer_count"] = peak_count;
  summary["near_integer_mean_corner_mass"] =
      peak_count > 0 ? Json(io::rounded(peak_sum / static_cast<double>(peak_count))) : Json(nullptr);
  summary["labels"] = {{"PP_LIKE", labels[0]}, {"AC_LIKE", labels[1]}, {"MIXED", labels[2]}};
  emit(dir / "localization_summary.json", io::dump(summary), out);

  if (cfg.density_index >= 0) {
    if (cfg.density_index >= decomp.eigenvectors.cols()) {
      throw ConfigError("--density-index is out of range");
    }
    const Eigen::VectorXcd v = decomp.eigenvectors.col(static_cast<Index>(cfg.density_index));
    const PositionDensity density = to_position_density(
        std::span<const Complex>(v.data(), static_cast<std::size_t>(v.size())), cfg.cutoff, grid,
        geom);
    const fs::path path = dir / ("density_" + std::to_string(cfg.density_index) + ".bin");
    io::write_density(path, density);
    out << "wrote " << path.string() << '\n';
  }
  if (cfg.dump_vectors) {
    io::write_complex_dump(dir / "eigenvectors.bin", io::kVectorsMagic, cfg.cutoff,
                           decomp.eigenvectors);
    out << "wrote " << (dir / "eigenvectors.bin").string() << '\n';
  }
}

void cmd_orbit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.samples < 1) throw ConfigError("--samples must be positive");
  const auto samples = static_cast<std::size_t>(cfg.samples);
  OrbitTrace trace;
  if (cfg.unsafe_aspect > 0.0) {
    err << "warning: rectangular torus (aspect " << io::format_double(cfg.unsafe_aspect)
        << "); period, winding and event-count guarantees do not apply\n";
    const RectangularTorus box{cfg.ell, cfg.ell * cfg.unsafe_aspect};
    const double duration = cfg.duration > 0.0 ? cfg.duration : 2.0 * kPi;
    const double phi0 =
        std::isnan(cfg.phi0) ? rectangular_start_angle(cfg.radius, box) : cfg.phi0;
    trace = trace_rectangular(cfg.radius, phi0, duration, samples, box);
  } else if (cfg.unsafe_aspect < 0.0) {
    throw ConfigError("--unsafe-aspect must be positive");
  } else {
    trace = trace_orbit(cfg.radius, TorusGeometry(cfg.ell), samples);
  }
  const fs::path dir = output_dir(cfg);
  std::ostringstream csv;
  io::write_trajectory_csv(csv, trace);
  emit(dir / "trajectory.csv", csv.str(), out);
  emit(dir / "orbit.json", io::dump(io::orbit_json(trace.orbit)), out);
}

void cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  if (cfg.cutoffs.empty()) throw ConfigError("--N needs at least one cutoff");
  for (int n : cfg.cutoffs) check_cutoff(n);
  const PhysicalConstants consts(cfg.hbar);
  const auto rows =
      convergence_sweep(cfg.cutoffs, cfg.epsilon, consts, solver_options(cfg, false), cfg.threads);
  const fs::path dir = output_dir(cfg);
  if (cfg.format == "json") {
    emit(dir / "sweep.json", io::dump(io::sweep_json(rows, cfg.epsilon, cfg.hbar)), out);
  } else {
    std::ostringstream csv;
    io::write_sweep_csv(csv, rows);
    emit(dir / "sweep.csv", csv.str(), out);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Spectral and classical computations for L_z on the flat square torus",
               "toruslz"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "toruslz 0.1.0");

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help) -> Command& {
    commands.push_back(std::make_unique<Command>(app, name, help, cfg));
    return *commands.back();
  };

  Command& mu_cmd = add("mu", "Effective circumference ratio mu(r) and boundary angle theta_r");
  mu_cmd.bind("r", cfg.radii, "Comma-separated radii (absolute units)")->delimiter(',');

  Command& br = add("branches", "Fiber eigenvalue branches lambda_m(r) and the band structure");
  br.bind("m_max", cfg.m_max, "Largest |m|");
  br.bind("samples", cfg.samples, "Radial samples per branch on [0, sqrt(2) ell)");
  br.bind("lambda_max", cfg.lambda_max, "Upper end of the band listing (default (m_max+1) hbar)");

  Command& sp = add("spectrum", "Eigenvalues of the truncated operator and their histogram");
  sp.bind("N", cfg.cutoff, "Fourier cutoff |n1|, |n2| <= N");
  sp.bind("epsilon", cfg.epsilon, "Peak half-width in units of hbar");
  sp.bind("bin_width", cfg.bin_width, "Histogram bin width in units of hbar");
  sp.bind("tolerance", cfg.tolerance, "Relative residual bound");
  sp.bind("dense_limit", cfg.dense_limit, "Largest dimension solved densely");
  sp.bind("num_eigenpairs", cfg.num_eigenpairs, "Eigenpairs on the iterative path");
  sp.flag("dump_operator", cfg.dump_operator, "Write operator.bin");
  sp.flag("dump_vectors", cfg.dump_vectors, "Write eigenvectors.bin");

  Command& lo = add("localize", "Disk/corner split of every eigenvector");
  lo.bind("N", cfg.cutoff, "Fourier cutoff");
  lo.bind("grid", cfg.grid, "Position grid size G (>= 2(2N+1))");
  lo.bind("pp_min", cfg.pp_min, "Disk mass at or above which a state is PP_LIKE");
  lo.bind("ac_max", cfg.ac_max, "Disk mass at or below which a state is AC_LIKE");
  lo.bind("tolerance", cfg.tolerance, "Relative residual bound");
  lo.bind("dense_limit", cfg.dense_limit, "Largest dimension solved densely");
  lo.bind("density_index", cfg.density_index, "Also write the density of eigenpair k");
  lo.flag("dump_vectors", cfg.dump_vectors, "Write eigenvectors.bin");

  Command& orb = add("orbit", "Classical rotation orbit: trajectory and summary");
  orb.bind("r", cfg.radius, "Orbit radius (absolute units)")->required();
  orb.bind("samples", cfg.samples, "Uniform time samples per period");
  orb.bind("unsafe_aspect", cfg.unsafe_aspect,
           "Rectangular torus with ell_y / ell_x = ratio (no invariants)");
  orb.bind("duration", cfg.duration, "Trace length for --unsafe-aspect (default 2 pi)");
  orb.bind("phi0", cfg.phi0, "Start angle for --unsafe-aspect (default: first arc inside the box)");

  Command& sw = add("sweep", "Spectral statistics over a list of cutoffs");
  sw.bind("N", cfg.cutoffs, "Comma-separated ascending cutoffs")->delimiter(',');
  sw.bind("epsilon", cfg.epsilon, "Peak half-width in units of hbar");
  sw.bind("tolerance", cfg.tolerance, "Relative residual bound");
  sw.bind("dense_limit", cfg.dense_limit, "Largest dimension solved densely");

  std::map<std::string, std::set<std::string>> known_keys;
  for (const auto& c : commands) c->collect_keys(known_keys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    for (const auto& c : commands) {
      if (!c->app()->parsed()) continue;
      c->apply_config(known_keys);
      validate_common(cfg);
      const std::string name = c->app()->get_name();
      if (name == "mu") cmd_mu(cfg, out);
      else if (name == "branches") cmd_branches(cfg, out);
      else if (name == "spectrum") cmd_spectrum(cfg, out);
      else if (name == "localize") cmd_localize(cfg, out);
      else if (name == "orbit") cmd_orbit(cfg, out, err);
      else if (name == "sweep") cmd_sweep(cfg, out);
    }
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << " (achieved residual "
        << io::format_double(e.achieved_residual()) << ")\n";
    return kNonConvergence;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::domain_error& e) {
    err << "domain error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kConfigError;
  } catch (const ResourceError& e) {
    err << "resource error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
  return kSuccess;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("toruslz");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace toruslz::cli
