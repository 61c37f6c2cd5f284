#include "detfield/renewal_theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "detfield/errors.hpp"

namespace detfield {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

constexpr size_t kMaxGrid = 200001;
constexpr double kSeriesTol = 1e-10;

// Composite Simpson on a uniform grid; an odd interval count gets a 3/8
// closing panel. Falls back to trapezoid below four points.
double simpson(const std::vector<double>& v, double h) {
  size_t n = v.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (v[0] + v[1]);
  if (n == 3) return h / 3.0 * (v[0] + 4.0 * v[1] + v[2]);
  size_t intervals = n - 1;
  double total = 0.0;
  size_t stop = intervals;  // exclusive end of the plain Simpson region
  if (intervals % 2 != 0) stop = intervals - 3;
  for (size_t i = 0; i + 2 <= stop; i += 2) {
    total += h / 3.0 * (v[i] + 4.0 * v[i + 1] + v[i + 2]);
  }
  if (intervals % 2 != 0) {
    size_t i = stop;
    total += 3.0 * h / 8.0 * (v[i] + 3.0 * v[i + 1] + 3.0 * v[i + 2] +
                              v[i + 3]);
  }
  return total;
}

// Trapezoid convolution (g*f)(n h) restricted to the grid prefix.
void convolve_trapezoid(const std::vector<double>& g,
                        const std::vector<double>& f, double h,
                        std::vector<double>* out) {
  size_t n = g.size();
  out->assign(n, 0.0);
  for (size_t i = 1; i < n; ++i) {
    double acc = 0.5 * (g[0] * f[i] + g[i] * f[0]);
    const double* gp = g.data();
    const double* fp = f.data() + i;
    for (size_t j = 1; j < i; ++j) {
      acc += gp[j] * fp[-static_cast<ptrdiff_t>(j)];
    }
    (*out)[i] = h * acc;
  }
}

void convolve_discrete(const std::vector<double>& g,
                       const std::vector<double>& f,
                       std::vector<double>* out) {
  size_t n = g.size();
  out->assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (size_t j = 0; j <= i; ++j) acc += g[j] * f[i - j];
    (*out)[i] = acc;
  }
}

double kernel_diag(const KernelSpec& spec, double x) {
  return eval_kernel(spec, Point(x, 0.0), Point(x, 0.0)).real();
}

double renewal_u_pointwise(const KernelSpec& spec, double x1, double x2) {
  double kxx = kernel_diag(spec, x1);
  if (kxx <= 0.0) {
    throw constraint_error(
        fmt("kernel diagonal vanishes at x = %.6g (particle-free region)",
            x1));
  }
  Complex kxy = eval_kernel(spec, Point(x1, 0.0), Point(x2, 0.0));
  Complex kyx = eval_kernel(spec, Point(x2, 0.0), Point(x1, 0.0));
  return kernel_diag(spec, x2) - (kxy * kyx).real() / kxx;
}

std::vector<double> series_on_grid(const std::vector<double>& density,
                                   double step, bool discrete) {
  std::vector<double> u = density;  // first term f^{*1}
  std::vector<double> term = density;
  std::vector<double> next;
  for (int k = 2; k <= 4096; ++k) {
    if (discrete) {
      convolve_discrete(term, density, &next);
    } else {
      convolve_trapezoid(term, density, step, &next);
    }
    term.swap(next);
    double sup = 0.0;
    for (size_t i = 0; i < term.size(); ++i) {
      u[i] += term[i];
      sup = std::max(sup, std::abs(term[i]));
    }
    if (sup < kSeriesTol) return u;
  }
  throw convergence_error("renewal series did not converge on the grid");
}

}  // namespace

double RenewalSpec::total() const {
  if (mode == RenewalMode::kDiscrete) {
    double sum = 0.0;
    for (double p : density) sum += p;
    return sum;
  }
  return simpson(density, step);
}

double RenewalSpec::mean() const {
  if (mode == RenewalMode::kDiscrete) {
    double sum = 0.0;
    for (size_t n = 0; n < density.size(); ++n) sum += n * density[n];
    return sum;
  }
  std::vector<double> xf(density.size());
  for (size_t i = 0; i < density.size(); ++i) xf[i] = i * step * density[i];
  return simpson(xf, step);
}

void validate(const RenewalSpec& spec) {
  if (spec.density.size() < 2) {
    throw config_error("interval density table needs at least two entries");
  }
  if (spec.mode == RenewalMode::kContinuous &&
      (!std::isfinite(spec.step) || spec.step <= 0.0)) {
    throw config_error("interval density grid step must be positive");
  }
  double low = 0.0;
  for (double p : spec.density) {
    if (!std::isfinite(p)) {
      throw config_error("interval density contains a non-finite entry");
    }
    low = std::min(low, p);
  }
  if (low < -1e-9) {
    throw constraint_error(
        fmt("interval density is negative (min %.3e)", low));
  }
  double total = spec.total();
  if (std::abs(total - 1.0) > 1e-8) {
    throw constraint_error(
        fmt("interval density mass is %.12g, not 1", total));
  }
  double mean = spec.mean();
  if (!std::isfinite(mean) || mean <= 0.0) {
    throw constraint_error("interval density has no positive finite mean");
  }
}

double TabulatedFunction::at(double x) const {
  if (values.empty() || x < 0.0) return 0.0;
  double pos = x / step;
  size_t i = static_cast<size_t>(pos);
  if (i + 1 >= values.size()) return values.back();
  if (values.size() < 4) {
    double t = pos - i;
    return (1.0 - t) * values[i] + t * values[i + 1];
  }
  size_t j = i == 0 ? 0 : std::min(i - 1, values.size() - 4);
  double s = pos - j;
  const double* v = values.data() + j;
  double l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
  double l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
  double l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
  double l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
  return l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3];
}

RenewalSpec macchi_interval_density(double rho, double alpha) {
  if (!(rho > 0.0) || !(alpha > 0.0)) {
    throw constraint_error("rho and alpha must be positive");
  }
  double product = 2.0 * rho * alpha;
  if (product > 1.0 + 1e-12) {
    throw constraint_error(
        fmt("2*rho*alpha = %.12g exceeds 1; no such field exists", product));
  }
  double beta = std::sqrt(std::max(0.0, 1.0 - product));
  RenewalSpec spec;
  spec.mode = RenewalMode::kContinuous;
  spec.delay = DelayMode::kStationary;
  spec.step = std::min(alpha, 1.0 / rho) / 200.0;
  double x_max = 30.0 / rho;
  size_t count = static_cast<size_t>(std::ceil(x_max / spec.step)) + 1;
  if (count > kMaxGrid) {
    throw config_error("interval density grid exceeds the size cap");
  }
  spec.density.resize(count);
  for (size_t i = 0; i < count; ++i) {
    double x = i * spec.step;
    if (beta < 1e-7) {
      spec.density[i] = 2.0 * rho * (x / alpha) * std::exp(-x / alpha);
    } else {
      double a = (1.0 - beta) / alpha;
      double b = (1.0 + beta) / alpha;
      spec.density[i] =
          rho / beta * (std::exp(-a * x) - std::exp(-b * x));
    }
  }
  return spec;
}

double macchi_interval_cdf(double rho, double alpha, double x) {
  if (x <= 0.0) return 0.0;
  double product = 2.0 * rho * alpha;
  if (product > 1.0 + 1e-12) {
    throw constraint_error(
        fmt("2*rho*alpha = %.12g exceeds 1; no such field exists", product));
  }
  double beta = std::sqrt(std::max(0.0, 1.0 - product));
  if (beta < 1e-7) {
    // f = 2 rho (x/alpha) e^{-x/alpha} with 2 rho alpha = 1
    double t = x / alpha;
    return 1.0 - (1.0 + t) * std::exp(-t);
  }
  double a = (1.0 - beta) / alpha;
  double b = (1.0 + beta) / alpha;
  return rho / beta *
         ((1.0 - std::exp(-a * x)) / a - (1.0 - std::exp(-b * x)) / b);
}

double renewal_density_from_kernel(const KernelSpec& spec, double x1,
                                   double x2) {
  if (x2 < x1) throw config_error("second point must not precede the first");
  return renewal_u_pointwise(spec, x1, x2);
}

SpacingConditionReport check_iid_spacing_conditions(
    const KernelSpec& spec,
    const std::vector<std::array<double, 3>>& test_triples) {
  if (!is_hermitian(spec)) {
    throw constraint_error("spacing conditions require a Hermitian kernel");
  }
  SpacingConditionReport report;
  for (const auto& triple : test_triples) {
    double x1 = triple[0], x2 = triple[1], x3 = triple[2];
    if (!(x1 <= x2 && x2 <= x3)) {
      throw config_error("test triples must be ascending");
    }
    Complex k12 = eval_kernel(spec, Point(x1, 0), Point(x2, 0));
    Complex k23 = eval_kernel(spec, Point(x2, 0), Point(x3, 0));
    Complex k13 = eval_kernel(spec, Point(x1, 0), Point(x3, 0));
    double k22 = kernel_diag(spec, x2);
    report.cond_a_max_violation = std::max(
        report.cond_a_max_violation, std::abs(k12 * k23 - k13 * k22));
    double gap = x3 - x2;
    double shift = std::abs(renewal_u_pointwise(spec, x1, x1 + gap) -
                            renewal_u_pointwise(spec, x2, x2 + gap));
    report.cond_b_max_violation =
        std::max(report.cond_b_max_violation, shift);
  }
  report.passes = report.cond_a_max_violation < 1e-9 &&
                  report.cond_b_max_violation < 1e-9;
  return report;
}

TabulatedFunction renewal_u_series(const RenewalSpec& spec) {
  validate(spec);
  TabulatedFunction u;
  if (spec.mode == RenewalMode::kDiscrete) {
    u.step = 1.0;
    u.values = series_on_grid(spec.density, 1.0, true);
    return u;
  }
  u.step = spec.step;
  u.values = series_on_grid(spec.density, spec.step, false);
  if (spec.density.size() < 5) return u;
  // The trapezoid convolutions err like C(t) h^2 with smooth C, so a second
  // pass on the half-resolution subsample extrapolates that term away.
  std::vector<double> half;
  half.reserve((spec.density.size() + 1) / 2);
  for (size_t i = 0; i < spec.density.size(); i += 2) {
    half.push_back(spec.density[i]);
  }
  std::vector<double> coarse =
      series_on_grid(half, 2.0 * spec.step, false);
  std::vector<double> corr(u.values.size(), 0.0);
  for (size_t i = 0; i < coarse.size(); ++i) {
    corr[2 * i] = (u.values[2 * i] - coarse[i]) / 3.0;
  }
  size_t last_even = 2 * (coarse.size() - 1);
  for (size_t i = 1; i < u.values.size(); i += 2) {
    corr[i] = i < last_even ? 0.5 * (corr[i - 1] + corr[i + 1])
                            : corr[last_even];
  }
  for (size_t i = 0; i < u.values.size(); ++i) u.values[i] += corr[i];
  return u;
}

RenewalSpec solve_convolution(const std::vector<double>& u, double step,
                              RenewalMode mode) {
  if (u.size() < 2) {
    throw config_error("renewal density table needs at least two entries");
  }
  double u_max = 0.0;
  for (double v : u) {
    if (!std::isfinite(v) || v < -1e-9) {
      throw config_error("renewal density must be finite and nonnegative");
    }
    u_max = std::max(u_max, std::abs(v));
  }
  size_t n = u.size();
  std::vector<double> f(n, 0.0);
  double blow_up = 1e6 * std::max(1.0, u_max);
  if (mode == RenewalMode::kDiscrete) {
    f[0] = u[0] / (1.0 + u[0]);
    for (size_t i = 1; i < n; ++i) {
      double acc = 0.0;
      for (size_t k = 1; k <= i; ++k) acc += u[k] * f[i - k];
      f[i] = (u[i] - acc) / (1.0 + u[0]);
      if (!std::isfinite(f[i]) || std::abs(f[i]) > blow_up) {
        throw convergence_error("renewal inversion diverged");
      }
    }
  } else {
    if (!(step > 0.0)) throw config_error("grid step must be positive");
    f[0] = u[0];
    double denom = 1.0 + 0.5 * step * u[0];
    for (size_t i = 1; i < n; ++i) {
      double acc = 0.5 * u[i] * f[0];
      for (size_t j = 1; j < i; ++j) acc += u[j] * f[i - j];
      f[i] = (u[i] - step * acc) / denom;
      if (!std::isfinite(f[i]) || std::abs(f[i]) > blow_up) {
        throw convergence_error("renewal inversion diverged");
      }
    }
  }
  RenewalSpec spec;
  spec.mode = mode;
  spec.delay = DelayMode::kStationary;
  spec.step = mode == RenewalMode::kDiscrete ? 1.0 : step;
  spec.density = std::move(f);
  return spec;
}

double renewal_correlations(const TabulatedFunction& u, double rho1,
                            const std::vector<double>& points) {
  if (points.empty()) throw config_error("correlation needs at least one point");
  double value = rho1;
  for (size_t i = 1; i < points.size(); ++i) {
    double gap = points[i] - points[i - 1];
    if (gap < 0.0) throw config_error("correlation points must be ascending");
    value *= u.at(gap);
  }
  return value;
}

double renewal_correlations(const RenewalSpec& spec, double rho1,
                            const std::vector<double>& points) {
  return renewal_correlations(renewal_u_series(spec), rho1, points);
}

void write_renewal_csv(std::ostream& os, const RenewalSpec& spec) {
  os << "x,f\n";
  char buf[80];
  for (size_t i = 0; i < spec.density.size(); ++i) {
    double x = spec.mode == RenewalMode::kDiscrete
                   ? static_cast<double>(i)
                   : i * spec.step;
    std::snprintf(buf, sizeof(buf), "%.15g,%.15g\n", x, spec.density[i]);
    os << buf;
  }
}

RenewalSpec read_renewal_csv(std::istream& is, RenewalMode mode,
                             DelayMode delay) {
  RenewalSpec spec;
  spec.mode = mode;
  spec.delay = delay;
  std::string line;
  if (!std::getline(is, line)) {
    throw config_error("empty interval density file");
  }
  std::vector<double> xs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double x = 0.0, fx = 0.0;
    char comma = 0;
    if (!(row >> x >> comma >> fx) || comma != ',') {
      throw config_error("malformed density row: " + line);
    }
    xs.push_back(x);
    spec.density.push_back(fx);
  }
  if (xs.size() < 2) {
    throw config_error("interval density table needs at least two entries");
  }
  double step = xs[1] - xs[0];
  for (size_t i = 1; i < xs.size(); ++i) {
    if (std::abs(xs[i] - xs[i - 1] - step) > 1e-9 * std::max(1.0, step)) {
      throw config_error("interval density grid must be uniform");
    }
  }
  spec.step = mode == RenewalMode::kDiscrete ? 1.0 : step;
  return spec;
}

}  // namespace detfield
