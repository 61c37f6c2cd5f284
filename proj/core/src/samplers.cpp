#include "detfield/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <variant>

#include "detfield/errors.hpp"
#include "detfield/operator_core.hpp"
#include "detfield/special_functions.hpp"
#include "internal/gauss_legendre.hpp"

namespace detfield {

namespace {

constexpr double kPi = 3.14159265358979323846;

// A conditional whose total mass falls below this signals a broken frame.
constexpr double kMassFloor = 1e-12;

// Dyadic inverse-CDF controls: 2^10 top-level cells, refine while a cell
// holds more than 2^-20 of the conditional mass.
constexpr int kTopCells = 1024;
constexpr double kRefineFraction = 0x1p-20;

std::string fmt(const char* pattern, double a) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a);
  return buf;
}

// ---------------------------------------------------------------------------
// Small radix-2 FFT, enough for autocorrelation of frame coefficients.

void fft_inplace(std::vector<Complex>& a, bool inverse) {
  size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    Complex step(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        Complex u = a[i + j];
        Complex v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    double scale = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= scale;
  }
}

// r_d = sum_m c_{m+d} conj(c_m) for d = 0..D-1 (zero-padded, so linear).
std::vector<Complex> autocorrelation(const Eigen::VectorXcd& c) {
  size_t d = static_cast<size_t>(c.size());
  size_t len = 1;
  while (len < 2 * d) len <<= 1;
  std::vector<Complex> buf(len, Complex(0.0, 0.0));
  for (size_t i = 0; i < d; ++i) buf[i] = c(static_cast<Eigen::Index>(i));
  fft_inplace(buf, false);
  for (auto& z : buf) z = Complex(std::norm(z), 0.0);
  fft_inplace(buf, true);
  buf.resize(d);
  return buf;
}

// ---------------------------------------------------------------------------
// Frame deflation. w is the unit coordinate vector (in the active column
// basis) of the direction fixed by the accepted point. A single reflector
// rotates that direction into the leading active column, which the caller
// then retires by advancing its column offset.

template <typename Mat, typename Vec>
void deflate_frame(Mat& m, int col0, Vec w) {
  using Scalar = typename Mat::Scalar;
  int k = static_cast<int>(w.size());
  double lead = std::abs(w(0));
  Scalar sigma = lead > 0.0 ? Scalar(w(0) / lead) : Scalar(1.0);
  w(0) += sigma;  // u = w + sigma e1; |u_1| >= 1, never degenerate
  double inv = 2.0 / w.squaredNorm();
  auto block = m.middleCols(col0, k);
  Vec mu = block * w;
  block.noalias() -= mu * (inv * w.adjoint());
}

// ---------------------------------------------------------------------------
// Circle engine: CUE / SO(2n) / SO(2n+1) / Sp(n). The frame lives in a
// finite Fourier band, so the running diagonal kernel is a trigonometric
// polynomial whose cumulative mass is available in closed form; each
// conditional is drawn by bisection on that cumulative.

struct CircleEngine {
  int rank = 0;
  int modes = 0;  // Fourier band size D
  double lo = 0.0;
  double hi = 0.0;
  Eigen::MatrixXcd coef;       // D x rank, orthonormal frame coordinates
  std::vector<Complex> lags0;  // lag sums of coef coef^H, d = 0..D-1

  explicit CircleEngine(const TrigFrame& frame) {
    rank = static_cast<int>(frame.coef.cols());
    modes = static_cast<int>(frame.coef.rows());
    lo = frame.lo;
    hi = frame.hi;
    coef = frame.coef;
    lags0.assign(static_cast<size_t>(modes), Complex(0.0, 0.0));
    for (int j = 0; j < rank; ++j) {
      auto ac = autocorrelation(coef.col(j));
      for (int d = 0; d < modes; ++d) lags0[d] += ac[d];
    }
  }

  // integral over [lo, t] of sum_d lags[d] e^{i d s}
  double cumulative(const std::vector<Complex>& lags, double t) const {
    double acc = lags[0].real() * (t - lo);
    Complex et = std::polar(1.0, t);
    Complex el = std::polar(1.0, lo);
    Complex pt = et;
    Complex pl = el;
    for (size_t d = 1; d < lags.size(); ++d) {
      Complex diff = (pt - pl) / Complex(0.0, static_cast<double>(d));
      acc += 2.0 * (lags[d] * diff).real();
      pt *= et;
      pl *= el;
    }
    return acc;
  }

  std::vector<double> sample(RngStream& rng) const {
    Eigen::MatrixXcd frame = coef;
    std::vector<Complex> lags = lags0;
    std::vector<double> angles;
    angles.reserve(static_cast<size_t>(rank));
    for (int step = 0; step < rank; ++step) {
      int active = rank - step;
      double total = cumulative(lags, hi);
      if (!(total > kMassFloor)) {
        throw convergence_error(
            "conditional density mass vanished; the projection frame is "
            "inconsistent");
      }
      double target = rng.uniform() * total;
      double a = lo;
      double b = hi;
      for (int it = 0; it < 48; ++it) {
        double mid = 0.5 * (a + b);
        if (cumulative(lags, mid) < target) {
          a = mid;
        } else {
          b = mid;
        }
      }
      double t = 0.5 * (a + b);

      Eigen::VectorXcd eps(modes);
      Complex et = std::polar(1.0, t);
      Complex cur(1.0, 0.0);
      for (int m = 0; m < modes; ++m) {
        eps(m) = cur;
        cur *= et;
      }
      Eigen::VectorXcd r = frame.middleCols(step, active).transpose() * eps;
      double nr = r.norm();
      if (!(nr > 1e-12)) {
        throw convergence_error(
            "sampled angle has vanishing frame norm; the projection frame "
            "is inconsistent");
      }
      Eigen::VectorXcd w = r.conjugate() / nr;
      Eigen::VectorXcd removed = frame.middleCols(step, active) * w;
      auto ac = autocorrelation(removed);
      for (int d = 0; d < modes; ++d) lags[d] -= ac[d];
      deflate_frame(frame, step, std::move(w));
      angles.push_back(t);
    }
    return angles;
  }
};

// ---------------------------------------------------------------------------
// Line engine: Hermite / Laguerre projections. Top-level cell masses come
// from precomputed per-cell moment matrices contracted with the running
// coefficient Gram matrix; the accepted cell is then refined dyadically.

struct LineEngine {
  KernelSpec spec;
  int rank = 0;
  double lo = 0.0;
  double hi = 0.0;
  double cell_width = 0.0;
  Eigen::MatrixXd moments;  // kTopCells x rank^2, row c = vec(M_c)

  explicit LineEngine(const KernelSpec& s, int n) : spec(s), rank(n) {
    auto window = sampling_window(spec);
    lo = window.first;
    hi = window.second;
    cell_width = (hi - lo) / kTopCells;
    const auto& rule = internal::gauss_rule(4);
    moments.setZero(kTopCells, rank * rank);
    std::vector<double> phi(static_cast<size_t>(rank));
    Eigen::MatrixXd cell(rank, rank);
    for (int c = 0; c < kTopCells; ++c) {
      double mid = lo + (c + 0.5) * cell_width;
      double half = 0.5 * cell_width;
      cell.setZero();
      for (int g = 0; g < 4; ++g) {
        double x = mid + half * rule.nodes[g];
        double w = half * rule.weights[g];
        projection_frame_eval(spec, x, phi);
        for (int i = 0; i < rank; ++i) {
          for (int j = 0; j <= i; ++j) {
            double v = w * phi[i] * phi[j];
            cell(i, j) += v;
            if (j != i) cell(j, i) += v;
          }
        }
      }
      moments.row(c) =
          Eigen::Map<const Eigen::VectorXd>(cell.data(), rank * rank);
    }
  }

  double panel_mass(const Eigen::MatrixXd& frame, int col0, double a,
                    double b) const {
    const auto& rule = internal::gauss_rule(4);
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    int active = rank - col0;
    std::vector<double> phi(static_cast<size_t>(rank));
    double mass = 0.0;
    for (int g = 0; g < 4; ++g) {
      double x = mid + half * rule.nodes[g];
      projection_frame_eval(spec, x, phi);
      Eigen::Map<const Eigen::VectorXd> pv(phi.data(), rank);
      mass += half * rule.weights[g] *
              (frame.middleCols(col0, active).transpose() * pv).squaredNorm();
    }
    return mass;
  }

  std::vector<double> sample(RngStream& rng) const {
    Eigen::MatrixXd frame = Eigen::MatrixXd::Identity(rank, rank);
    std::vector<double> phi(static_cast<size_t>(rank));
    std::vector<double> points;
    points.reserve(static_cast<size_t>(rank));
    Eigen::VectorXd masses(kTopCells);
    for (int step = 0; step < rank; ++step) {
      int active = rank - step;
      Eigen::MatrixXd gram = frame.middleCols(step, active) *
                             frame.middleCols(step, active).transpose();
      masses.noalias() =
          moments * Eigen::Map<const Eigen::VectorXd>(gram.data(),
                                                      rank * rank);
      double total = masses.sum();
      if (!(total > kMassFloor)) {
        throw convergence_error(
            "conditional density mass vanished; the projection frame is "
            "inconsistent");
      }
      double target = rng.uniform() * total;
      int c = 0;
      double cum = 0.0;
      while (c + 1 < kTopCells && cum + masses(c) < target) {
        cum += masses(c);
        ++c;
      }
      double a = lo + c * cell_width;
      double b = a + cell_width;
      double mass = masses(c);
      double residual = target - cum;
      for (int depth = 0; depth < 60 && mass > total * kRefineFraction;
           ++depth) {
        double mid = 0.5 * (a + b);
        double m1 = panel_mass(frame, step, a, mid);
        double m2 = panel_mass(frame, step, mid, b);
        if (!(m1 + m2 > 0.0)) break;
        double scale = mass / (m1 + m2);
        m1 *= scale;
        m2 *= scale;
        if (residual <= m1) {
          b = mid;
          mass = m1;
        } else {
          residual -= m1;
          a = mid;
          mass = m2;
        }
      }
      double frac = mass > 0.0 ? std::clamp(residual / mass, 0.0, 1.0) : 0.5;
      double x = a + (b - a) * frac;

      projection_frame_eval(spec, x, phi);
      Eigen::Map<const Eigen::VectorXd> pv(phi.data(), rank);
      Eigen::VectorXd r = frame.middleCols(step, active).transpose() * pv;
      double nr = r.norm();
      if (!(nr > 1e-12)) {
        throw convergence_error(
            "sampled point has vanishing frame norm; the projection frame "
            "is inconsistent");
      }
      Eigen::VectorXd w = r / nr;
      deflate_frame(frame, step, std::move(w));
      points.push_back(x);
    }
    return points;
  }
};

// ---------------------------------------------------------------------------
// Lattice engine: Meixner projections on {0, 1, ...}, truncated where the
// diagonal has absorbed all but a negligible sliver of the total rank.

struct LatticeEngine {
  int rank = 0;
  Eigen::MatrixXd frame0;  // sites x rank

  LatticeEngine(double q, int bigk, int n) : rank(n) {
    const auto& sys = meixner_system(q, bigk, n - 1);
    std::vector<double> phi(static_cast<size_t>(n));
    std::vector<std::vector<double>> rows;
    double cum = 0.0;
    int x = 0;
    for (; x < 100000; ++x) {
      sys.function_all(n - 1, x, phi);
      double diag = 0.0;
      for (double v : phi) diag += v * v;
      cum += diag;
      rows.push_back(phi);
      if (static_cast<double>(n) - cum < kMassFloor && x >= n) break;
    }
    if (static_cast<double>(n) - cum >= kMassFloor) {
      throw convergence_error("lattice frame mass did not saturate");
    }
    for (int pad = 0; pad < 8; ++pad) {
      ++x;
      sys.function_all(n - 1, x, phi);
      rows.push_back(phi);
    }
    frame0.resize(static_cast<int>(rows.size()), n);
    for (size_t r = 0; r < rows.size(); ++r) {
      for (int j = 0; j < n; ++j) {
        frame0(static_cast<int>(r), j) = rows[r][j];
      }
    }
  }

  std::vector<double> sample(RngStream& rng) const {
    Eigen::MatrixXd frame = frame0;
    int sites = static_cast<int>(frame.rows());
    std::vector<double> points;
    points.reserve(static_cast<size_t>(rank));
    for (int step = 0; step < rank; ++step) {
      int active = rank - step;
      Eigen::VectorXd mass =
          frame.middleCols(step, active).rowwise().squaredNorm();
      double total = mass.sum();
      if (!(total > kMassFloor)) {
        throw convergence_error(
            "conditional density mass vanished; the projection frame is "
            "inconsistent");
      }
      double target = rng.uniform() * total;
      int site = 0;
      double cum = 0.0;
      while (site + 1 < sites && cum + mass(site) < target) {
        cum += mass(site);
        ++site;
      }
      while (site > 0 && !(mass(site) > 0.0)) --site;
      Eigen::VectorXd r =
          frame.middleCols(step, active).row(site).transpose();
      double nr = r.norm();
      if (!(nr > 1e-12)) {
        throw convergence_error(
            "sampled site has vanishing frame norm; the projection frame "
            "is inconsistent");
      }
      Eigen::VectorXd w = r / nr;
      deflate_frame(frame, step, std::move(w));
      points.push_back(static_cast<double>(site));
    }
    return points;
  }
};

}  // namespace

// ---------------------------------------------------------------------------

DiscreteDppSampler::DiscreteDppSampler(const DiscreteKernel& kernel) {
  if (!kernel.hermitian) {
    throw constraint_error("sampling requires a Hermitian kernel");
  }
  ValidityReport report = validity_check(kernel.matrix);
  if (!report.is_valid) {
    throw constraint_error(
        fmt("kernel spectrum leaves [0,1]: eigenvalue range extends to "
            "%.6g",
            report.min_eig < 0.0 ? report.min_eig : report.max_eig));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(kernel.matrix);
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

std::vector<int> DiscreteDppSampler::sample(RngStream& rng) const {
  int n = size();
  std::vector<int> chosen_modes;
  for (int i = 0; i < n; ++i) {
    double lam = std::clamp(eigenvalues_(i), 0.0, 1.0);
    bool take;
    if (lam >= 1.0 - 1e-9) {
      take = true;
    } else if (lam <= 1e-9) {
      take = false;
    } else {
      take = rng.uniform() < lam;
    }
    if (take) chosen_modes.push_back(i);
  }
  int k = static_cast<int>(chosen_modes.size());
  std::vector<int> sites;
  if (k == 0) return sites;
  Eigen::MatrixXcd frame(n, k);
  for (int j = 0; j < k; ++j) frame.col(j) = eigenvectors_.col(chosen_modes[j]);
  sites.reserve(static_cast<size_t>(k));
  for (int step = 0; step < k; ++step) {
    int active = k - step;
    Eigen::VectorXd mass =
        frame.middleCols(step, active).rowwise().squaredNorm();
    double total = mass.sum();
    if (!(total > kMassFloor)) {
      throw convergence_error("conditional mass vanished in site selection");
    }
    double target = rng.uniform() * total;
    int site = 0;
    double cum = 0.0;
    while (site + 1 < n && cum + mass(site) < target) {
      cum += mass(site);
      ++site;
    }
    while (site > 0 && !(mass(site) > 0.0)) --site;
    Eigen::VectorXcd r =
        frame.middleCols(step, active).row(site).conjugate().transpose();
    double nr = r.norm();
    if (!(nr > 1e-12)) {
      throw convergence_error("selected site has vanishing conditional mass");
    }
    Eigen::VectorXcd w = r / nr;
    deflate_frame(frame, step, std::move(w));
    sites.push_back(site);
  }
  std::sort(sites.begin(), sites.end());
  return sites;
}

std::vector<int> sample_discrete_dpp(const DiscreteKernel& kernel,
                                     RngStream& rng) {
  return DiscreteDppSampler(kernel).sample(rng);
}

// ---------------------------------------------------------------------------

struct ProjectionSampler::Impl {
  KernelSpec spec;
  int rank = 0;
  DomainKind domain = DomainKind::Real1D;
  std::variant<CircleEngine, LineEngine, LatticeEngine> engine;

  Impl(KernelSpec s, int n, DomainKind d,
       std::variant<CircleEngine, LineEngine, LatticeEngine> e)
      : spec(std::move(s)), rank(n), domain(d), engine(std::move(e)) {}
};

ProjectionSampler::ProjectionSampler(const KernelSpec& spec) {
  validate(spec);
  int n = projection_rank(spec);
  if (n <= 0) {
    throw config_error("kernel '" + kernel_name(spec) +
                       "' is not a finite-rank projection family");
  }
  if (spec.is<CueKernel>() || spec.is<SOEvenKernel>() ||
      spec.is<SOOddKernel>() || spec.is<SpKernel>()) {
    impl_ = std::make_unique<Impl>(spec, n, DomainKind::Circle,
                                   CircleEngine(trig_frame(spec)));
  } else if (spec.is<HermiteKernel>() || spec.is<LaguerreKernel>()) {
    impl_ = std::make_unique<Impl>(spec, n, DomainKind::Real1D,
                                   LineEngine(spec, n));
  } else if (spec.is<MeixnerKernel>()) {
    const auto& mk = spec.as<MeixnerKernel>();
    impl_ = std::make_unique<Impl>(
        spec, n, DomainKind::NonNegativeIntegers,
        LatticeEngine(mk.q, mk.M - mk.N + 1, mk.N));
  } else {
    throw config_error("kernel '" + kernel_name(spec) +
                       "' has no projection sampler");
  }
}

ProjectionSampler::~ProjectionSampler() = default;
ProjectionSampler::ProjectionSampler(ProjectionSampler&&) noexcept = default;
ProjectionSampler& ProjectionSampler::operator=(ProjectionSampler&&) noexcept =
    default;

int ProjectionSampler::rank() const { return impl_->rank; }
const KernelSpec& ProjectionSampler::spec() const { return impl_->spec; }

PointConfiguration ProjectionSampler::sample(RngStream& rng) const {
  std::vector<double> raw = std::visit(
      [&rng](const auto& engine) { return engine.sample(rng); },
      impl_->engine);
  std::sort(raw.begin(), raw.end());
  PointConfiguration config;
  config.domain = impl_->domain;
  config.points.reserve(raw.size());
  for (double x : raw) config.points.emplace_back(x, 0.0);
  return config;
}

PointConfiguration sample_projection_dpp(const KernelSpec& spec,
                                         RngStream& rng) {
  return ProjectionSampler(spec).sample(rng);
}

// ---------------------------------------------------------------------------

namespace {

// Inverse CDF through the trapezoid cumulative of a tabulated density; the
// density is treated as piecewise linear, so each cell inverts a quadratic.
struct TabulatedInverse {
  double step = 0.0;
  std::vector<double> density;
  std::vector<double> cumulative;

  TabulatedInverse(std::vector<double> f, double h)
      : step(h), density(std::move(f)) {
    cumulative.resize(density.size());
    cumulative[0] = 0.0;
    for (size_t i = 1; i < density.size(); ++i) {
      cumulative[i] =
          cumulative[i - 1] + 0.5 * step * (density[i - 1] + density[i]);
    }
  }

  double total() const { return cumulative.back(); }

  double draw(RngStream& rng) const {
    double target = rng.uniform() * total();
    size_t j =
        static_cast<size_t>(std::upper_bound(cumulative.begin(),
                                             cumulative.end(), target) -
                            cumulative.begin());
    if (j == 0) j = 1;
    if (j >= cumulative.size()) j = cumulative.size() - 1;
    --j;  // cell [j, j+1)
    double r = target - cumulative[j];
    double f0 = density[j];
    double slope = density[j + 1] - density[j];
    // solve (slope/2) s^2 + f0 s = r / step for s in [0, 1]
    double rr = r / step;
    double s;
    if (std::abs(slope) < 1e-14 * std::max(1.0, f0)) {
      s = f0 > 0.0 ? rr / f0 : 0.5;
    } else {
      double disc = f0 * f0 + 2.0 * slope * rr;
      s = disc > 0.0 ? (std::sqrt(disc) - f0) / slope : 0.0;
    }
    return (static_cast<double>(j) + std::clamp(s, 0.0, 1.0)) * step;
  }
};

}  // namespace

PointConfiguration sample_renewal(const RenewalSpec& spec, double horizon,
                                  RngStream& rng) {
  validate(spec);
  if (spec.mode != RenewalMode::kContinuous) {
    throw config_error("renewal sampling supports continuous mode only");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw config_error("horizon must be positive and finite");
  }
  TabulatedInverse interval(spec.density, spec.step);
  if (!(interval.total() > 0.0)) {
    throw constraint_error("interval density has no mass");
  }

  double x;
  if (spec.delay == DelayMode::kStationary) {
    // delay density is proportional to the interval tail 1 - F(x)
    std::vector<double> tail(spec.density.size());
    double total = interval.total();
    for (size_t i = 0; i < tail.size(); ++i) {
      tail[i] = std::max(0.0, 1.0 - interval.cumulative[i] / total);
    }
    TabulatedInverse delay(std::move(tail), spec.step);
    if (!(delay.total() > 0.0)) {
      throw constraint_error("stationary delay density has no mass");
    }
    x = delay.draw(rng);
  } else {
    x = interval.draw(rng);
  }

  PointConfiguration config;
  config.domain = DomainKind::Real1D;
  while (x <= horizon) {
    config.points.emplace_back(x, 0.0);
    x += interval.draw(rng);
  }
  return config;
}

// ---------------------------------------------------------------------------

namespace {

PlancherelSample rsk_shape(const std::vector<int>& perm) {
  std::vector<std::vector<int>> rows;
  for (int value : perm) {
    int carry = value;
    bool placed = false;
    for (auto& row : rows) {
      auto it = std::lower_bound(row.begin(), row.end(), carry);
      if (it == row.end()) {
        row.push_back(carry);
        placed = true;
        break;
      }
      std::swap(*it, carry);
    }
    if (!placed) rows.push_back({carry});
  }
  PlancherelSample out;
  out.shape.reserve(rows.size());
  for (const auto& row : rows) out.shape.push_back(static_cast<int>(row.size()));
  int d = 0;
  while (d < static_cast<int>(out.shape.size()) && out.shape[d] >= d + 1) ++d;
  for (int i = 0; i < d; ++i) {
    out.frobenius.push_back(out.shape[i] - i - 0.5);
    int col = 0;  // column height lambda'_i
    while (col < static_cast<int>(out.shape.size()) && out.shape[col] > i) {
      ++col;
    }
    out.frobenius.push_back(-(col - i - 0.5));
  }
  std::sort(out.frobenius.begin(), out.frobenius.end());
  return out;
}

}  // namespace

PlancherelSample sample_plancherel_fixed(int n, RngStream& rng) {
  if (n < 0) throw config_error("permutation size must be non-negative");
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.next_u64() %
                             static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  return rsk_shape(perm);
}

PlancherelSample sample_plancherel_poissonized(double theta, RngStream& rng) {
  if (!(theta > 0.0) || theta > 100.0) {
    throw config_error("theta must lie in (0, 100]");
  }
  long n = rng.poisson(theta);
  return sample_plancherel_fixed(static_cast<int>(n), rng);
}

// ---------------------------------------------------------------------------

int sample_last_passage(int m, int n, double q, RngStream& rng) {
  if (n < 1 || m < n) throw config_error("need M >= N >= 1");
  if (!(q > 0.0) || !(q < 1.0)) throw config_error("q must lie in (0,1)");
  std::vector<long> row(static_cast<size_t>(n) + 1, 0);
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= n; ++j) {
      long a = rng.geometric(q);
      row[static_cast<size_t>(j)] =
          std::max(row[static_cast<size_t>(j)], row[static_cast<size_t>(j - 1)]) + a;
    }
  }
  return static_cast<int>(row[static_cast<size_t>(n)]);
}

// ---------------------------------------------------------------------------

void write_points_csv(std::ostream& os, const PointConfiguration& config) {
  char buf[80];
  if (config.domain == DomainKind::Real2D) {
    os << "re,im\n";
    for (const Point& p : config.points) {
      std::snprintf(buf, sizeof(buf), "%.15g,%.15g\n", p.real(), p.imag());
      os << buf;
    }
    return;
  }
  os << "x\n";
  for (const Point& p : config.points) {
    std::snprintf(buf, sizeof(buf), "%.15g\n", p.real());
    os << buf;
  }
}

}  // namespace detfield
