#include "toruslz/localization.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "toruslz/errors.hpp"
#include "toruslz/parallel.hpp"

namespace toruslz {

namespace {

// The FFTW planner is not thread-safe; execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer allocate(Index count) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(count)));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

class Fft2d {
 public:
  Fft2d(Index n, int sign) : n_(n) {
    FftwBuffer in = allocate(n * n);
    FftwBuffer out = allocate(n * n);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), in.get(), out.get(), sign,
                             FFTW_ESTIMATE);
    if (plan_ == nullptr) throw std::runtime_error("fftw plan creation failed");
  }
  ~Fft2d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  Index size() const noexcept { return n_; }
  void execute(fftw_complex* in, fftw_complex* out) const { fftw_execute_dft(plan_, in, out); }

 private:
  Index n_;
  fftw_plan plan_ = nullptr;
};

Index wrap_index(int n, Index g) {
  const Index r = static_cast<Index>(n) % g;
  return r < 0 ? r + g : r;
}

// Phase of u_n at cell-centre samples relative to the plain DFT kernel:
// exp(i pi n x_j / ell) = (-1)^n exp(i pi n / G) exp(2 pi i n j / G).
Complex centre_shift(int n, Index g) {
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return std::polar(sign, kPi * static_cast<double>(n) / static_cast<double>(g));
}

PositionDensity synthesize(std::span<const Complex> coefficients, int cutoff, Index grid,
                           const TorusGeometry& geom, const Fft2d& fft) {
  const int side = 2 * cutoff + 1;
  FftwBuffer in = allocate(grid * grid);
  FftwBuffer out = allocate(grid * grid);
  for (Index i = 0; i < grid * grid; ++i) in[i][0] = in[i][1] = 0.0;

  for (int n1 = -cutoff; n1 <= cutoff; ++n1) {
    const Complex s1 = centre_shift(n1, grid);
    for (int n2 = -cutoff; n2 <= cutoff; ++n2) {
      const Complex c =
          coefficients[static_cast<std::size_t>((n1 + cutoff) * side + (n2 + cutoff))] * s1 *
          centre_shift(n2, grid);
      const Index idx = wrap_index(n1, grid) * grid + wrap_index(n2, grid);
      in[idx][0] = c.real();
      in[idx][1] = c.imag();
    }
  }
  fft.execute(in.get(), out.get());

  PositionDensity density;
  density.grid = grid;
  density.ell = geom.ell();
  const double h = geom.side() / static_cast<double>(grid);
  density.cell_area = h * h;
  density.values.resize(static_cast<std::size_t>(grid * grid));
  const double scale = 1.0 / (geom.side() * geom.side());
  double total = 0.0;
  for (Index i = 0; i < grid * grid; ++i) {
    const double v = (out[i][0] * out[i][0] + out[i][1] * out[i][1]) * scale;
    density.values[static_cast<std::size_t>(i)] = v;
    total += v;
  }
  density.normalization = total * density.cell_area;
  return density;
}

void check_grid(int cutoff, Index grid) {
  if (grid < 2 * (2 * static_cast<Index>(cutoff) + 1)) {
    throw UndersampledGrid("grid size " + std::to_string(grid) +
                           " is below 2(2N+1) = " + std::to_string(2 * (2 * cutoff + 1)));
  }
}

}  // namespace

PositionDensity to_position_density(std::span<const Complex> coefficients, int cutoff,
                                    Index grid, const TorusGeometry& geom) {
  const ModeBasis basis(cutoff);
  if (static_cast<Index>(coefficients.size()) != basis.dim()) {
    throw DimensionMismatch("to_position_density: expected (2N+1)^2 coefficients");
  }
  check_grid(cutoff, grid);
  const Fft2d fft(grid, FFTW_BACKWARD);
  return synthesize(coefficients, cutoff, grid, geom, fft);
}

double disk_mass(const PositionDensity& density, const TorusGeometry& geom) {
  const double r2 = geom.ell() * geom.ell();
  double inside = 0.0;
  double total = 0.0;
  for (Index ix = 0; ix < density.grid; ++ix) {
    const double x = density.coordinate(ix);
    for (Index iy = 0; iy < density.grid; ++iy) {
      const double y = density.coordinate(iy);
      const double v = density.values[static_cast<std::size_t>(ix * density.grid + iy)];
      total += v;
      if (x * x + y * y < r2) inside += v;
    }
  }
  return total > 0.0 ? inside / total : 0.0;
}

std::string to_string(LocalizationLabel label) {
  switch (label) {
    case LocalizationLabel::kPpLike: return "PP_LIKE";
    case LocalizationLabel::kAcLike: return "AC_LIKE";
    case LocalizationLabel::kMixed: return "MIXED";
  }
  return "MIXED";
}

LocalizationLabel classify(double mass, const LocalizationThresholds& thresholds) {
  if (mass >= thresholds.pp_min_disk_mass) return LocalizationLabel::kPpLike;
  if (mass <= thresholds.ac_max_disk_mass) return LocalizationLabel::kAcLike;
  return LocalizationLabel::kMixed;
}

LocalizationReport classify_spectrum(const EigenDecomposition& decomp, int cutoff, Index grid,
                                     const LocalizationThresholds& thresholds,
                                     const TorusGeometry& geom,
                                     const PhysicalConstants& consts, unsigned threads) {
  if (!decomp.has_vectors()) {
    throw std::invalid_argument("classify_spectrum: decomposition has no eigenvectors");
  }
  const ModeBasis basis(cutoff);
  if (decomp.eigenvectors.rows() != basis.dim()) {
    throw DimensionMismatch("classify_spectrum: eigenvectors do not match cutoff N");
  }
  check_grid(cutoff, grid);

  LocalizationReport report;
  report.cutoff = cutoff;
  report.grid = grid;
  report.hbar = consts.hbar;
  report.thresholds = thresholds;
  report.records.resize(static_cast<std::size_t>(decomp.eigenvectors.cols()));

  const Fft2d fft(grid, FFTW_BACKWARD);
  parallel_for(report.records.size(), threads, [&](std::size_t j) {
    const auto col = static_cast<Index>(j);
    const Eigen::VectorXcd v = decomp.eigenvectors.col(col);
    const PositionDensity density = synthesize(
        std::span<const Complex>(v.data(), static_cast<std::size_t>(v.size())), cutoff, grid,
        geom, fft);
    LocalizationRecord& rec = report.records[j];
    rec.lambda = decomp.eigenvalues(col);
    rec.disk_mass = disk_mass(density, geom);
    rec.corner_mass = 1.0 - rec.disk_mass;
    rec.label = classify(rec.disk_mass, thresholds);
  });
  return report;
}

std::vector<Complex> project_to_basis(const std::function<Complex(double, double)>& f,
                                      int cutoff, Index quadrature_points,
                                      const TorusGeometry& geom) {
  const ModeBasis basis(cutoff);
  const Index q = quadrature_points;
  if (q < basis.side()) {
    throw UndersampledGrid("project_to_basis: need at least 2N+1 quadrature points");
  }
  const Fft2d fft(q, FFTW_FORWARD);
  FftwBuffer in = allocate(q * q);
  FftwBuffer out = allocate(q * q);
  const double h = geom.side() / static_cast<double>(q);
  for (Index ix = 0; ix < q; ++ix) {
    const double x = -geom.ell() + (static_cast<double>(ix) + 0.5) * h;
    for (Index iy = 0; iy < q; ++iy) {
      const double y = -geom.ell() + (static_cast<double>(iy) + 0.5) * h;
      const Complex v = f(x, y);
      in[ix * q + iy][0] = v.real();
      in[ix * q + iy][1] = v.imag();
    }
  }
  fft.execute(in.get(), out.get());

  std::vector<Complex> coeff(static_cast<std::size_t>(basis.dim()));
  const double weight = h * h / geom.side();
  for (int n1 = -cutoff; n1 <= cutoff; ++n1) {
    for (int n2 = -cutoff; n2 <= cutoff; ++n2) {
      const Index idx = wrap_index(n1, q) * q + wrap_index(n2, q);
      const Complex raw(out[idx][0], out[idx][1]);
      coeff[static_cast<std::size_t>(basis.flat(n1, n2))] =
          raw * std::conj(centre_shift(n1, q) * centre_shift(n2, q)) * weight;
    }
  }
  return coeff;
}

}  // namespace toruslz
