#include "toruslz/io.hpp"

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace toruslz::io {

static_assert(std::endian::native == std::endian::little,
              "binary dumps assume a little-endian host");

std::string format_double(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", value);
  return buf;
}

double rounded(double value) { return std::strtod(format_double(value).c_str(), nullptr); }

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

namespace {

Json rounded_array(const Eigen::VectorXd& values, double scale) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < values.size(); ++i) arr.push_back(rounded(values(i) * scale));
  return arr;
}

void write_binary(std::ofstream& out, const void* data, std::size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

std::ofstream open_binary(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_branch_csv(std::ostream& out, std::span<const FiberSpectrum> table, double hbar) {
  out << "m,r_over_ell,lambda_over_hbar\n";
  for (const FiberSpectrum& branch : table) {
    for (const BranchSample& s : branch.samples) {
      out << branch.m << ',' << format_double(s.r_over_ell) << ','
          << format_double(s.lambda / hbar) << '\n';
    }
  }
}

Json bands_json(const BandStructure& bands) {
  Json doc;
  doc["hbar"] = rounded(bands.hbar);
  doc["gap"] = Json::array({rounded(bands.gap_lo / bands.hbar), rounded(bands.gap_hi / bands.hbar)});
  doc["pp"] = "integer lattice";
  doc["pp_multiples"] = bands.pp_multiples;
  Json arr = Json::array();
  for (const Band& b : bands.bands) {
    Json j;
    j["lo"] = rounded(b.lo / bands.hbar);
    j["hi"] = rounded(b.hi / bands.hbar);
    j["degeneracy"] = b.degeneracy;
    j["closed_end"] = b.closed_end == ClosedEnd::kLow ? "lo" : "hi";
    j["truncated"] = b.truncated;
    arr.push_back(std::move(j));
  }
  doc["bands"] = std::move(arr);
  return doc;
}

Json spectrum_json(const EigenDecomposition& decomp, int cutoff, double hbar) {
  Json doc;
  doc["N"] = cutoff;
  doc["hbar"] = rounded(hbar);
  doc["dim"] = decomp.size();
  doc["method"] = to_string(decomp.method);
  doc["complete"] = decomp.complete;
  doc["residual_bound"] = rounded(decomp.residual_bound);
  doc["eigenvalues"] = rounded_array(decomp.eigenvalues, 1.0);
  doc["eigenvalues_over_hbar"] = rounded_array(decomp.eigenvalues, 1.0 / hbar);
  return doc;
}

void write_histogram_csv(std::ostream& out, const Histogram& histogram) {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
    out << format_double(histogram.edges[k]) << ',' << format_double(histogram.edges[k + 1])
        << ',' << histogram.counts[k] << '\n';
  }
}

void write_localization_csv(std::ostream& out, const LocalizationReport& report) {
  out << "# N=" << report.cutoff << " G=" << report.grid
      << " hbar=" << format_double(report.hbar) << '\n';
  out << "# pp_min_disk_mass=" << format_double(report.thresholds.pp_min_disk_mass)
      << " ac_max_disk_mass=" << format_double(report.thresholds.ac_max_disk_mass) << '\n';
  out << "lambda_over_hbar,disk_mass,corner_mass,label\n";
  for (const LocalizationRecord& r : report.records) {
    out << format_double(r.lambda / report.hbar) << ',' << format_double(r.disk_mass) << ','
        << format_double(r.corner_mass) << ',' << to_string(r.label) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const OrbitTrace& trace) {
  out << "t,x,y,phi,quadrant,event_flag\n";
  for (const TrajectorySample& s : trace.trajectory) {
    out << format_double(s.t) << ',' << format_double(s.position.x) << ','
        << format_double(s.position.y) << ',' << format_double(s.phi) << ',' << s.quadrant
        << ',' << static_cast<int>(s.kind) << '\n';
  }
}

Json orbit_json(const Orbit& orbit) {
  Json doc;
  doc["r"] = rounded(orbit.r);
  doc["r_over_ell"] = rounded(orbit.r_over_ell);
  doc["period"] = rounded(orbit.period);
  doc["mu_measured"] = rounded(orbit.mu_measured);
  doc["winding"] = orbit.winding;
  doc["n_events"] = orbit.wrap_count;
  return doc;
}

Json sweep_json(std::span<const SweepRow> rows, double epsilon, double hbar) {
  Json doc;
  doc["epsilon"] = rounded(epsilon);
  doc["hbar"] = rounded(hbar);
  Json arr = Json::array();
  for (const SweepRow& r : rows) {
    Json j;
    j["N"] = r.cutoff;
    j["dim"] = r.dim;
    j["peak_fraction"] = rounded(r.peak_fraction);
    j["gap_occupancy"] = rounded(r.gap_occupancy);
    j["band_occupancy"] = Json::array({rounded(r.band_occupancy[0]), rounded(r.band_occupancy[1]),
                                       rounded(r.band_occupancy[2])});
    j["residual_bound"] = rounded(r.residual_bound);
    arr.push_back(std::move(j));
  }
  doc["rows"] = std::move(arr);
  return doc;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "N,dim,peak_fraction,gap_occupancy,band1_occupancy,band2_occupancy,band3_occupancy,"
         "residual_bound\n";
  for (const SweepRow& r : rows) {
    out << r.cutoff << ',' << r.dim << ',' << format_double(r.peak_fraction) << ','
        << format_double(r.gap_occupancy) << ',' << format_double(r.band_occupancy[0]) << ','
        << format_double(r.band_occupancy[1]) << ',' << format_double(r.band_occupancy[2])
        << ',' << format_double(r.residual_bound) << '\n';
  }
}

void write_complex_dump(const std::filesystem::path& path, const std::array<char, 8>& magic,
                        std::int64_t cutoff, const Eigen::MatrixXcd& matrix) {
  std::ofstream out = open_binary(path);
  write_binary(out, magic.data(), magic.size());
  write_binary(out, &cutoff, sizeof cutoff);
  const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = matrix;
  write_binary(out, row_major.data(), sizeof(Complex) * static_cast<std::size_t>(row_major.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ComplexDump read_complex_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  ComplexDump d;
  in.read(d.magic.data(), d.magic.size());
  in.read(reinterpret_cast<char*>(&d.cutoff), sizeof d.cutoff);
  if (!in || d.cutoff < 0) throw std::runtime_error("malformed dump header: " + path.string());
  const auto payload = std::filesystem::file_size(path) - 16;
  const Eigen::Index side = 2 * d.cutoff + 1;
  d.rows = side * side;
  const auto row_bytes = sizeof(Complex) * static_cast<std::uintmax_t>(d.rows);
  if (payload % row_bytes != 0) throw std::runtime_error("truncated dump: " + path.string());
  d.cols = static_cast<Eigen::Index>(payload / row_bytes);
  d.data.resize(static_cast<std::size_t>(d.rows * d.cols));
  in.read(reinterpret_cast<char*>(d.data.data()), static_cast<std::streamsize>(payload));
  if (!in) throw std::runtime_error("short read: " + path.string());
  return d;
}

void write_density(const std::filesystem::path& path, const PositionDensity& density) {
  std::ofstream out = open_binary(path);
  write_binary(out, density.values.data(), sizeof(double) * density.values.size());
  if (!out) throw std::runtime_error("write failed: " + path.string());
  Json side;
  side["G"] = density.grid;
  side["ell"] = rounded(density.ell);
  write_text(path.string() + ".json", dump(side));
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out = open_binary(path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace toruslz::io
