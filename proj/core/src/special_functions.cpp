#include "detfield/special_functions.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "detfield/errors.hpp"
#include "internal/gauss_legendre.hpp"

namespace detfield {

namespace {

constexpr double kLog1e100 = 230.25850929940457;  // log(1e100)

// Emits p * exp(logscale - half_weight_log) without intermediate under/overflow.
double attach_weight(double p, double logscale, double log_weight_half) {
  if (p == 0.0) return 0.0;
  if (logscale == 0.0 && log_weight_half > -700.0) {
    return p * std::exp(log_weight_half);
  }
  double e = logscale + log_weight_half + std::log(std::fabs(p));
  if (e < -745.0) return 0.0;
  return std::copysign(std::exp(e), p);
}

}  // namespace

// ---------------------------------------------------------------------------
// Hermite / Laguerre: recurrence on the orthonormal polynomials with dynamic
// rescaling; the square-root weight is attached in log space at emission, so
// the polynomial blow-up and the weight decay never meet in double range.
// ---------------------------------------------------------------------------

void eval_orthonormal_all(const OrthonormalFamily& fam, int ell_max, double x,
                          std::span<double> out) {
  if (ell_max < 0 || out.size() < static_cast<std::size_t>(ell_max) + 1) {
    throw config_error("eval_orthonormal_all: bad degree range or output span");
  }
  if (const auto* h = std::get_if<HermiteFamily>(&fam)) {
    (void)h;
    if (ell_max > kHermiteMaxDegree) throw constraint_error("hermite degree above cap 512");
    const double lw = -0.5 * x * x;
    double pm = 0.0, p = std::pow(M_PI, -0.25), logscale = 0.0;
    out[0] = attach_weight(p, logscale, lw);
    for (int l = 0; l < ell_max; ++l) {
      double pn = x * std::sqrt(2.0 / (l + 1)) * p -
                  std::sqrt(static_cast<double>(l) / (l + 1)) * pm;
      pm = p;
      p = pn;
      if (std::fabs(p) > 1e100) {
        p *= 1e-100;
        pm *= 1e-100;
        logscale += kLog1e100;
      }
      out[l + 1] = attach_weight(p, logscale, lw);
    }
    return;
  }
  if (const auto* lag = std::get_if<LaguerreFamily>(&fam)) {
    const double alpha = lag->alpha;
    if (alpha <= -1.0) throw constraint_error("laguerre alpha must exceed -1");
    if (ell_max > kLaguerreMaxDegree) throw constraint_error("laguerre degree above cap 512");
    if (x < 0.0) throw constraint_error("laguerre functions live on [0, inf)");
    if (x == 0.0) {
      // x^{alpha/2} limit: zero for positive alpha, one for alpha = 0,
      // divergent otherwise.
      if (alpha > 0.0) {
        std::fill(out.begin(), out.begin() + ell_max + 1, 0.0);
        return;
      }
      if (alpha < 0.0) throw constraint_error("laguerre function diverges at x=0 for alpha<0");
    }
    const double lw = 0.5 * (alpha * (x > 0 ? std::log(x) : 0.0) - x);
    double pm = 0.0, p = std::exp(-0.5 * std::lgamma(alpha + 1.0)), logscale = 0.0;
    out[0] = attach_weight(p, logscale, lw);
    for (int l = 0; l < ell_max; ++l) {
      double pn = ((2 * l + alpha + 1 - x) * p - std::sqrt(l * (l + alpha)) * pm) /
                  std::sqrt((l + 1) * (l + 1 + alpha));
      pm = p;
      p = pn;
      if (std::fabs(p) > 1e100) {
        p *= 1e-100;
        pm *= 1e-100;
        logscale += kLog1e100;
      }
      out[l + 1] = attach_weight(p, logscale, lw);
    }
    return;
  }
  const auto& mx = std::get<MeixnerFamily>(fam);
  meixner_system(mx.q, mx.K, ell_max).function_all(ell_max, x, out);
}

double eval_orthonormal(const OrthonormalFamily& fam, int ell, double x) {
  std::vector<double> buf(ell + 1);
  eval_orthonormal_all(fam, ell, x, buf);
  return buf[ell];
}

double hermite_function(int ell, double x) {
  return eval_orthonormal(HermiteFamily{}, ell, x);
}

double laguerre_function(int ell, double alpha, double x) {
  return eval_orthonormal(LaguerreFamily{alpha}, ell, x);
}

// ---------------------------------------------------------------------------
// Meixner system via the Stieltjes procedure on the truncated lattice.
// ---------------------------------------------------------------------------

namespace {

// Truncation point: beyond X the mass of x^{2d+K+1} w(x) is below e^{-100}
// of the total, which is far under every tolerance used downstream.
int meixner_truncation(double q, int K, int degree) {
  const double decay = -std::log(q);
  const double power = 2.0 * degree + K + 1.0;
  int x = 32;
  while (x < 200000 && x * decay - power * std::log(static_cast<double>(x)) < 105.0) {
    x += std::max(8, x / 8);
  }
  return x;
}

using Rat = boost::multiprecision::cpp_rational;

struct StieltjesResult {
  std::vector<double> a, sqrt_b;
  double inv_sqrt_m0;
};

StieltjesResult stieltjes_exact(double q, int K, int degree, int X) {
  Rat qr(q);  // exact: q was checked to be a small dyadic rational
  std::vector<Rat> w(X), pm(X, 0), p(X, 1);
  w[0] = 1;
  for (int x = 1; x < X; ++x) w[x] = w[x - 1] * qr * (x - 1 + K) / x;

  StieltjesResult r;
  Rat norm_prev = 0;
  for (int d = 0; d <= degree; ++d) {
    Rat s0 = 0, s1 = 0;
    for (int x = 0; x < X; ++x) {
      Rat t = p[x] * p[x] * w[x];
      s0 += t;
      s1 += t * x;
    }
    if (d == 0) r.inv_sqrt_m0 = 1.0 / std::sqrt(static_cast<double>(s0));
    if (d > 0) r.sqrt_b.push_back(std::sqrt(static_cast<double>(Rat(s0 / norm_prev))));
    if (d == degree) break;
    Rat a = s1 / s0;
    r.a.push_back(static_cast<double>(a));
    Rat b = (d == 0) ? Rat(0) : Rat(s0 / norm_prev);
    for (int x = 0; x < X; ++x) {
      Rat next = (x - a) * p[x] - (d == 0 ? Rat(0) : b * pm[x]);
      pm[x] = p[x];
      p[x] = next;
    }
    norm_prev = s0;
  }
  return r;
}

StieltjesResult stieltjes_extended(double q, int K, int degree, int X) {
  std::vector<long double> w(X), pm(X, 0.0L), p(X, 1.0L);
  w[0] = 1.0L;
  for (int x = 1; x < X; ++x) w[x] = w[x - 1] * (long double)q * (x - 1 + K) / x;

  StieltjesResult r;
  long double norm_prev = 0.0L;
  for (int d = 0; d <= degree; ++d) {
    long double s0 = 0.0L, s1 = 0.0L;
    for (int x = 0; x < X; ++x) {
      long double t = p[x] * p[x] * w[x];
      s0 += t;
      s1 += t * x;
    }
    if (d == 0) r.inv_sqrt_m0 = static_cast<double>(1.0L / std::sqrt(s0));
    if (d > 0) r.sqrt_b.push_back(static_cast<double>(std::sqrt(s0 / norm_prev)));
    if (d == degree) break;
    long double a = s1 / s0;
    r.a.push_back(static_cast<double>(a));
    long double b = (d == 0) ? 0.0L : s0 / norm_prev;
    for (int x = 0; x < X; ++x) {
      long double next = (x - a) * p[x] - b * pm[x];
      pm[x] = p[x];
      p[x] = next;
    }
    norm_prev = s0;
  }
  return r;
}

bool small_dyadic(double q) {
  double scaled = q * 256.0;
  return scaled == std::floor(scaled);
}

}  // namespace

MeixnerSystem::MeixnerSystem(double q, int K, int max_degree) : q_(q), K_(K) {
  if (!(q > 0.0 && q < 1.0)) throw constraint_error("meixner q must be in (0,1)");
  if (K < 1) throw constraint_error("meixner K must be a positive integer");
  if (max_degree < 0 || max_degree > kMeixnerMaxDegree) {
    throw constraint_error("meixner degree above cap 48");
  }
  const int X = meixner_truncation(q, K, max_degree);
  exact_ = small_dyadic(q) && max_degree <= 12 && X <= 1024;
  StieltjesResult r = exact_ ? stieltjes_exact(q, K, max_degree, X)
                             : stieltjes_extended(q, K, max_degree, X);
  a_ = std::move(r.a);
  sqrt_b_ = std::move(r.sqrt_b);
  inv_sqrt_m0_ = r.inv_sqrt_m0;
}

double MeixnerSystem::log_weight(double x) const {
  double xr = std::round(x);
  if (x < -0.1 || std::fabs(x - xr) > 1e-9) {
    throw constraint_error("meixner weight needs a non-negative integer site");
  }
  return xr * std::log(q_) + std::lgamma(xr + K_) - std::lgamma(static_cast<double>(K_)) -
         std::lgamma(xr + 1.0);
}

double MeixnerSystem::weight(double x) const { return std::exp(log_weight(x)); }

void MeixnerSystem::function_all(int ell_max, double x, std::span<double> out) const {
  if (ell_max > static_cast<int>(sqrt_b_.size())) {
    throw constraint_error("meixner degree above constructed range");
  }
  const double hw = 0.5 * log_weight(x);
  double pm = 0.0, p = inv_sqrt_m0_, logscale = 0.0;
  out[0] = attach_weight(p, logscale, hw);
  for (int l = 0; l < ell_max; ++l) {
    double pn = ((x - a_[l]) * p - (l > 0 ? sqrt_b_[l - 1] * pm : 0.0)) / sqrt_b_[l];
    pm = p;
    p = pn;
    if (std::fabs(p) > 1e100) {
      p *= 1e-100;
      pm *= 1e-100;
      logscale += kLog1e100;
    }
    out[l + 1] = attach_weight(p, logscale, hw);
  }
}

double MeixnerSystem::function(int ell, double x) const {
  std::vector<double> buf(ell + 1);
  function_all(ell, x, buf);
  return buf[ell];
}

const MeixnerSystem& meixner_system(double q, int K, int min_degree) {
  static std::mutex mu;
  static std::map<std::pair<double, int>, std::unique_ptr<MeixnerSystem>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(q, K);
  auto it = cache.find(key);
  if (it == cache.end() || it->second->max_degree() < min_degree) {
    // Grow in chunks so repeated callers with increasing degrees don't
    // rebuild every time.
    int deg = std::min(kMeixnerMaxDegree, std::max(min_degree, 12));
    cache[key] = std::make_unique<MeixnerSystem>(q, K, deg);
    it = cache.find(key);
  }
  return *it->second;
}

// ---------------------------------------------------------------------------
// Integer and half-integer Bessel J by Miller's downward recurrence.
// ---------------------------------------------------------------------------

void bessel_j_all(int max_order, double x, std::span<double> out) {
  if (max_order < 0 || out.size() < static_cast<std::size_t>(max_order) + 1) {
    throw config_error("bessel_j_all: bad order range or output span");
  }
  if (x < 0.0) throw constraint_error("bessel_j defined here for x >= 0");
  if (x == 0.0) {
    std::fill(out.begin(), out.begin() + max_order + 1, 0.0);
    out[0] = 1.0;
    return;
  }
  const int top = std::max(max_order, static_cast<int>(std::ceil(x)));
  int M = top + 24 + static_cast<int>(2.0 * std::sqrt(static_cast<double>(top)));
  if (M % 2 == 1) ++M;

  double fp1 = 0.0, f = 1e-280, sum = 0.0;
  for (int k = M; k >= 0; --k) {
    if (k <= max_order) out[k] = f;
    sum += (k == 0) ? f : (k % 2 == 0 ? 2.0 * f : 0.0);
    double fm1 = (2.0 * k / x) * f - fp1;
    fp1 = f;
    f = fm1;
    if (std::fabs(f) > 1e250) {
      f *= 1e-250;
      fp1 *= 1e-250;
      sum *= 1e-250;
      for (int j = k; j <= max_order; ++j) out[j] *= 1e-250;
    }
  }
  for (int k = 0; k <= max_order; ++k) out[k] /= sum;
}

double bessel_j(int order, double x) {
  std::vector<double> buf(order + 1);
  bessel_j_all(order, x, buf);
  return buf[order];
}

double bessel_j_half(int m, double x) {
  if (m < -1) throw constraint_error("bessel_j_half supports orders >= -1/2");
  if (x <= 0.0) throw constraint_error("bessel_j_half needs x > 0");
  const double pref = std::sqrt(2.0 / (M_PI * x));
  const double j_half = pref * std::sin(x);
  const double j_mhalf = pref * std::cos(x);
  if (m == -1) return j_mhalf;
  if (m == 0) return j_half;

  const int top = std::max(m, static_cast<int>(std::ceil(x)));
  const int M = top + 24 + static_cast<int>(2.0 * std::sqrt(static_cast<double>(top)));
  double fp1 = 0.0, f = 1e-280, fm = 0.0;
  std::vector<double> trial(m + 1, 0.0);
  for (int k = M; k >= 0; --k) {
    if (k <= m) trial[k] = f;
    double fm1 = ((2.0 * k + 1.0) / x) * f - fp1;
    fp1 = f;
    f = fm1;
    if (std::fabs(f) > 1e250) {
      f *= 1e-250;
      fp1 *= 1e-250;
      for (int j = k; j <= m; ++j) trial[j] *= 1e-250;
    }
  }
  fm = f;  // trial value for order -1/2
  // Anchor on whichever closed form is away from its zero.
  const double c = (std::fabs(std::sin(x)) >= std::fabs(std::cos(x)))
                       ? j_half / trial[0]
                       : j_mhalf / fm;
  return c * trial[m];
}

// ---------------------------------------------------------------------------
// Airy Ai on [-8, 50].
// ---------------------------------------------------------------------------

namespace {

// Maclaurin pair f, g and their derivatives, accumulated in extended
// precision; cancellation at x = -8 costs ~7 digits, which the 64-bit
// mantissa absorbs.
void airy_series(double x, double* ai, double* aip) {
  const long double x3 = static_cast<long double>(x) * x * x;
  long double f = 1.0L, fp = 0.0L, g = x, gp = 1.0L;
  long double tf = 1.0L, tg = x;
  for (int k = 0; k < 400; ++k) {
    tf *= x3 / ((3 * k + 2) * (3 * k + 3));
    tg *= x3 / ((3 * k + 3) * (3 * k + 4));
    f += tf;
    g += tg;
    fp += tf * (3 * k + 3) / x;  // d/dx of the x^{3k+3} term
    gp += tg * (3 * k + 4) / x;
    if (std::fabs((double)tf) + std::fabs((double)tg) < 1e-24 * (std::fabs((double)f) + 1.0)) {
      break;
    }
  }
  const double c1 = std::pow(3.0, -2.0 / 3.0) / std::tgamma(2.0 / 3.0);  // Ai(0)
  const double c2 = std::pow(3.0, -1.0 / 3.0) / std::tgamma(1.0 / 3.0);  // -Ai'(0)
  if (x == 0.0) {
    *ai = c1;
    *aip = -c2;
    return;
  }
  *ai = static_cast<double>(c1 * f - c2 * g);
  *aip = static_cast<double>(c1 * fp - c2 * gp);
}

// Decaying-contour representation for x > 0:
//   Ai(x)  = e^{-z} / pi * I0,   z = (2/3) x^{3/2}
//   Ai'(x) = -e^{-z} / pi * (sqrt(x) I0 + I2 / (2 sqrt(x)))
// with I_m = int_0^inf t^m exp(-sqrt(x) t^2) cos(t^3/3) dt.
void airy_contour(double x, double* ai, double* aip) {
  const double s = std::sqrt(x);
  const double zeta = 2.0 / 3.0 * x * s;
  const double tmax = std::sqrt(52.0 / s);
  const auto& rule = internal::gauss_rule(96);
  double i0 = 0.0, i2 = 0.0;
  for (int i = 0; i < 96; ++i) {
    const double t = 0.5 * tmax * (rule.nodes[i] + 1.0);
    const double w = 0.5 * tmax * rule.weights[i];
    const double e = std::exp(-s * t * t) * std::cos(t * t * t / 3.0);
    i0 += w * e;
    i2 += w * t * t * e;
  }
  const double pref = std::exp(-zeta) / M_PI;
  *ai = pref * i0;
  *aip = -pref * (s * i0 + i2 / (2.0 * s));
}

void airy_eval(double x, double* ai, double* aip) {
  if (x < kAiryWindowLo || x > kAiryWindowHi) {
    throw constraint_error("airy_ai supported on [-8, 50]");
  }
  if (x <= 8.0) {
    airy_series(x, ai, aip);
  } else {
    airy_contour(x, ai, aip);
  }
}

}  // namespace

double airy_ai(double x) {
  double ai, aip;
  airy_eval(x, &ai, &aip);
  return ai;
}

double airy_ai_prime(double x) {
  double ai, aip;
  airy_eval(x, &ai, &aip);
  return aip;
}

}  // namespace detfield
