#include "detfield/kernel_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "detfield/errors.hpp"
#include "detfield/special_functions.hpp"
#include "internal/gauss_legendre.hpp"

namespace detfield {
namespace {

constexpr double kPi = 3.14159265358979323846;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

bool near_integer(double x) { return std::abs(x - std::lround(x)) <= 1e-9; }

bool half_integer_site(double x) {
  double two = 2.0 * x;
  return std::abs(two - std::lround(two)) <= 1e-9 && std::lround(two) % 2 != 0;
}

// ---- sine ------------------------------------------------------------

double sine_eval(double a, double b) {
  double t = kPi * (a - b);
  if (std::abs(t) < 1e-4) {
    double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

// ---- Airy ------------------------------------------------------------

// Quotient form with a second-order midpoint expansion near the diagonal,
// derivatives reduced through Ai'' = x Ai.
double airy_eval_pair(double a, double b) {
  if (std::abs(a - b) < 1e-4) {
    double m = 0.5 * (a + b), h = 0.5 * (a - b);
    double f = airy_ai(m), fp = airy_ai_prime(m);
    double w = fp * fp - m * f * f;
    double r2 = f * fp / 3.0 + (2.0 / 3.0) * m * fp * fp -
                (2.0 / 3.0) * m * m * f * f;
    return w + h * h * r2;
  }
  return (airy_ai(a) * airy_ai_prime(b) - airy_ai(b) * airy_ai_prime(a)) /
         (a - b);
}

// ---- Bessel (hard edge) ------------------------------------------------

bool integer_order(double alpha) { return near_integer(alpha); }

// J_alpha and J_{alpha+1} at z in one shot.
void bessel_pair(double alpha, double z, double* ja, double* jb) {
  if (integer_order(alpha)) {
    int a = static_cast<int>(std::lround(alpha));
    thread_local std::vector<double> buf;
    buf.resize(a + 2);
    bessel_j_all(a + 1, z, buf);
    *ja = buf[a];
    *jb = buf[a + 1];
  } else {
    int m = static_cast<int>(std::floor(alpha));
    *ja = bessel_j_half(m, z);
    *jb = bessel_j_half(m + 1, z);
  }
}

double bessel_diag(double alpha, double x) {
  if (x == 0.0) {
    if (alpha == 0.0) return 0.25;
    return 0.0;  // alpha > 0; alpha < 0 is excluded from the domain at 0
  }
  double z = std::sqrt(x), ja, jb;
  bessel_pair(alpha, z, &ja, &jb);
  return 0.25 * (ja * ja + jb * jb) - (alpha / (2.0 * z)) * ja * jb;
}

// Midpoint expansion of the quotient form through the Tracy-Widom system
// phi' = psi/x, psi' = -c phi with c = (x - alpha^2)/(4x).
double bessel_near(double alpha, double m, double h) {
  double z = std::sqrt(m), ja, jb;
  bessel_pair(alpha, z, &ja, &jb);
  double phi0 = ja;
  double psi0 = 0.5 * (alpha * ja - z * jb);
  double c = 0.25 - alpha * alpha / (4.0 * m);
  double cp = alpha * alpha / (4.0 * m * m);
  double cpp = -alpha * alpha / (2.0 * m * m * m);
  double phi1 = psi0 / m;
  double psi1 = -c * phi0;
  double phi2 = -c * phi0 / m - psi0 / (m * m);
  double psi2 = -cp * phi0 - c * psi0 / m;
  double phi3 = -cp * phi0 / m + 2.0 * c * phi0 / (m * m) -
                c * psi0 / (m * m) + 2.0 * psi0 / (m * m * m);
  double psi3 = -cpp * phi0 - 2.0 * cp * psi0 / m + c * c * phi0 / m +
                c * psi0 / (m * m);
  double w = phi1 * psi0 - phi0 * psi1;
  double r2 = (phi3 * psi0 - phi0 * psi3) / 6.0 +
              (phi1 * psi2 - phi2 * psi1) / 2.0;
  return w + h * h * r2;
}

double bessel_eval_pair(double alpha, double a, double b) {
  if (a == b) return bessel_diag(alpha, a);
  double scale = std::max({1.0, a, b});
  if (std::abs(a - b) < 1e-4 * scale && a > 0.0 && b > 0.0) {
    return bessel_near(alpha, 0.5 * (a + b), 0.5 * (a - b));
  }
  double za = std::sqrt(a), zb = std::sqrt(b);
  double ja, jap1, jb, jbp1;
  bessel_pair(alpha, za, &ja, &jap1);
  bessel_pair(alpha, zb, &jb, &jbp1);
  return (za * jap1 * jb - ja * zb * jbp1) / (2.0 * (a - b));
}

// ---- finite-rank projections on the line -------------------------------

double projection_sum(const OrthonormalFamily& fam, int n, double a, double b) {
  thread_local std::vector<double> fa, fb;
  fa.resize(n);
  eval_orthonormal_all(fam, n - 1, a, fa);
  double acc = 0.0;
  if (a == b) {
    for (int i = 0; i < n; ++i) acc += fa[i] * fa[i];
    return acc;
  }
  fb.resize(n);
  eval_orthonormal_all(fam, n - 1, b, fb);
  for (int i = 0; i < n; ++i) acc += fa[i] * fb[i];
  return acc;
}

// ---- circle families ----------------------------------------------------

// sin((n - 1/2) u) / sin(u/2) = 1 + 2 sum_{k=1}^{n-1} cos(k u)
double ratio_half(int n, double u) {
  double s = std::sin(0.5 * u);
  if (std::abs(s) > 1e-6) return std::sin((n - 0.5) * u) / s;
  double acc = 1.0;
  for (int k = 1; k < n; ++k) acc += 2.0 * std::cos(k * u);
  return acc;
}

// sin(n u) / sin(u/2) = 2 sum_{j=1}^{n} cos((j - 1/2) u)
double ratio_int(int n, double u) {
  double s = std::sin(0.5 * u);
  if (std::abs(s) > 1e-6) return std::sin(n * u) / s;
  double acc = 0.0;
  for (int j = 1; j <= n; ++j) acc += 2.0 * std::cos((j - 0.5) * u);
  return acc;
}

double cue_eval(int n, double a, double b) {
  double u = a - b;
  double s = std::sin(0.5 * u);
  if (std::abs(s) > 1e-6) return std::sin(0.5 * n * u) / s / (2.0 * kPi);
  double acc = 0.0, base = -0.5 * (n - 1);
  for (int j = 0; j < n; ++j) acc += std::cos((base + j) * u);
  return acc / (2.0 * kPi);
}

double so_even_eval(int n, double a, double b) {
  return (ratio_half(n, a - b) + ratio_half(n, a + b)) / (2.0 * kPi);
}

double so_odd_eval(int n, double a, double b) {
  return (ratio_int(n, a - b) - ratio_int(n, a + b)) / (2.0 * kPi);
}

double sp_eval(int n, double a, double b) {
  return (ratio_half(n + 1, a - b) - ratio_half(n + 1, a + b)) / (2.0 * kPi);
}

// ---- planar families -----------------------------------------------------

Complex ginibre_eval(Complex z1, Complex z2) {
  Complex ex = z1 * std::conj(z2);
  ex -= 0.5 * (std::norm(z1) + std::norm(z2));
  return std::exp(ex) / kPi;
}

Complex ginibre_tau_eval(double tau, Complex z1, Complex z2) {
  double om = 1.0 - tau * tau;
  Complex ex = z1 * std::conj(z2);
  ex -= 0.5 * (std::norm(z1) + std::norm(z2));
  return std::exp(ex / om) / (kPi * om);
}

Complex g_alpha_integral(double alpha, double half_width, Complex y) {
  const internal::GaussRule& rule = internal::gauss_rule(64);
  Complex acc = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    double u = half_width * rule.nodes[i];
    Complex ex = -2.0 * u * y;
    ex += -0.5 * alpha * alpha * u * u;
    acc += (half_width * rule.weights[i]) * std::exp(ex);
  }
  return acc / std::sqrt(2.0 * kPi);
}

Complex weak_nh_eval(double alpha, double xc, Complex p1, Complex p2) {
  if (std::abs(xc) >= 2.0) return 0.0;
  double x1 = p1.real(), y1 = p1.imag();
  double x2 = p2.real(), y2 = p2.imag();
  double half_width = std::sqrt(1.0 - 0.25 * xc * xc);
  Complex arg(0.5 * (y1 + y2), -0.5 * (x1 - x2));
  Complex g = g_alpha_integral(alpha, half_width, arg);
  Complex ex(-(y1 * y1 + y2 * y2) / (alpha * alpha), 0.5 * xc * (y1 - y2));
  return std::exp(ex) * g / (kPi * alpha);
}

// ---- Macchi ---------------------------------------------------------------

Complex macchi_eval(const MacchiKernel& k, double a, double b) {
  double d = a - b;
  double mag = k.rho * std::exp(-std::abs(d) / k.alpha);
  if (k.beta == 0.0) return mag;
  return std::polar(mag, k.beta * d);
}

// ---- half-integer lattice -------------------------------------------------

int site_order(double x) {
  // |x| - 1/2 as an exact non-negative integer
  return static_cast<int>(std::lround(std::abs(x) - 0.5));
}

double discrete_bessel_eval(const DiscreteBesselKernel& k, double x, double y) {
  double arg = 2.0 * std::sqrt(k.theta);
  int p = site_order(x), r = site_order(y);
  bool same_sign = x * y > 0.0;
  if (!same_sign && !k.allow_mixed_sign) {
    throw constraint_error(
        "discrete-bessel is not Hermitian across the sign boundary; "
        "mixed-sign evaluation requires the opt-in flag");
  }
  if (same_sign && p == r) return discrete_bessel_series(k.theta, x, y);
  int top = std::max(p, r) + 1;
  std::vector<double> j(top + 1);
  bessel_j_all(top, arg, j);
  double st = std::sqrt(k.theta);
  if (same_sign) {
    return st * (j[p] * j[r + 1] - j[p + 1] * j[r]) / static_cast<double>(p - r);
  }
  return st * (j[p] * j[r] - j[p + 1] * j[r + 1]) / (x - y);
}

// ---- Meixner ----------------------------------------------------------------

double meixner_eval(const MeixnerKernel& k, double x, double y) {
  const MeixnerSystem& sys = meixner_system(k.q, k.M - k.N + 1, k.N);
  thread_local std::vector<double> fx, fy;
  fx.resize(k.N);
  sys.function_all(k.N - 1, x, fx);
  double acc = 0.0;
  if (x == y) {
    for (int i = 0; i < k.N; ++i) acc += fx[i] * fx[i];
    return acc;
  }
  fy.resize(k.N);
  sys.function_all(k.N - 1, y, fy);
  for (int i = 0; i < k.N; ++i) acc += fx[i] * fy[i];
  return acc;
}

// ---- bumps -------------------------------------------------------------------

double bump_occupation(double k) { return 1.0 - 1.0 / (k * k + 1.0); }

double bump_eval(double a, double b) {
  double ka = std::floor(a), kb = std::floor(b);
  if (ka != kb) return 0.0;
  return bump_occupation(ka);
}

// ---- explicit matrices ---------------------------------------------------------

int explicit_index(const DiscreteKernel& k, double x) {
  auto it = std::lower_bound(k.labels.begin(), k.labels.end(), x - 1e-9);
  if (it == k.labels.end() || std::abs(*it - x) > 1e-9) {
    throw constraint_error(fmt("point %.17g is not a site of the explicit kernel", x));
  }
  return static_cast<int>(it - k.labels.begin());
}

double real_coordinate(const KernelSpec& spec, Point p) {
  if (p.imag() != 0.0) {
    throw constraint_error("kernel '" + kernel_name(spec) +
                           "' lives on a one-dimensional domain; point has a "
                           "nonzero second coordinate");
  }
  return p.real();
}

Complex eval_raw(const KernelSpec& spec, Point x, Point y) {
  return std::visit(
      overloaded{
          [&](const SineKernel&) -> Complex {
            return sine_eval(real_coordinate(spec, x), real_coordinate(spec, y));
          },
          [&](const AiryKernel&) -> Complex {
            return airy_eval_pair(real_coordinate(spec, x),
                                  real_coordinate(spec, y));
          },
          [&](const BesselKernel& k) -> Complex {
            return bessel_eval_pair(k.alpha, real_coordinate(spec, x),
                                    real_coordinate(spec, y));
          },
          [&](const HermiteKernel& k) -> Complex {
            return projection_sum(HermiteFamily{}, k.n,
                                  real_coordinate(spec, x),
                                  real_coordinate(spec, y));
          },
          [&](const CueKernel& k) -> Complex {
            return cue_eval(k.n, real_coordinate(spec, x),
                            real_coordinate(spec, y));
          },
          [&](const SOEvenKernel& k) -> Complex {
            return so_even_eval(k.n, real_coordinate(spec, x),
                                real_coordinate(spec, y));
          },
          [&](const SOOddKernel& k) -> Complex {
            return so_odd_eval(k.n, real_coordinate(spec, x),
                               real_coordinate(spec, y));
          },
          [&](const SpKernel& k) -> Complex {
            return sp_eval(k.n, real_coordinate(spec, x),
                           real_coordinate(spec, y));
          },
          [&](const GinibreKernel&) -> Complex { return ginibre_eval(x, y); },
          [&](const GinibreTauKernel& k) -> Complex {
            return ginibre_tau_eval(k.tau, x, y);
          },
          [&](const WeakNonHermitianKernel& k) -> Complex {
            return weak_nh_eval(k.alpha, k.x_center, x, y);
          },
          [&](const LaguerreKernel& k) -> Complex {
            return projection_sum(LaguerreFamily{k.alpha}, k.n,
                                  real_coordinate(spec, x),
                                  real_coordinate(spec, y));
          },
          [&](const MacchiKernel& k) -> Complex {
            return macchi_eval(k, real_coordinate(spec, x),
                               real_coordinate(spec, y));
          },
          [&](const DiscreteBesselKernel& k) -> Complex {
            return discrete_bessel_eval(k, real_coordinate(spec, x),
                                        real_coordinate(spec, y));
          },
          [&](const MeixnerKernel& k) -> Complex {
            return meixner_eval(k, real_coordinate(spec, x),
                                real_coordinate(spec, y));
          },
          [&](const BumpKernel&) -> Complex {
            return bump_eval(real_coordinate(spec, x),
                             real_coordinate(spec, y));
          },
          [&](const ExplicitDiscreteKernel& k) -> Complex {
            int i = explicit_index(k.kernel, real_coordinate(spec, x));
            int j = explicit_index(k.kernel, real_coordinate(spec, y));
            return k.kernel.matrix(i, j);
          },
      },
      spec.family);
}

bool canonical_before(Point a, Point b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() <= b.imag();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw constraint_error(message);
}

void check_rank_bound(int n, int cap, const char* family) {
  if (n < 1 || n > cap) {
    throw constraint_error(fmt((std::string(family) +
                                " rank must be an integer in [1, %.0f] (got %.0f)")
                                   .c_str(),
                               static_cast<double>(cap),
                               static_cast<double>(n)));
  }
}

}  // namespace

DomainKind domain_kind(const KernelSpec& spec) {
  return std::visit(
      overloaded{
          [](const SineKernel&) { return DomainKind::Real1D; },
          [](const AiryKernel&) { return DomainKind::Real1D; },
          [](const BesselKernel&) { return DomainKind::Real1D; },
          [](const HermiteKernel&) { return DomainKind::Real1D; },
          [](const CueKernel&) { return DomainKind::Circle; },
          [](const SOEvenKernel&) { return DomainKind::Circle; },
          [](const SOOddKernel&) { return DomainKind::Circle; },
          [](const SpKernel&) { return DomainKind::Circle; },
          [](const GinibreKernel&) { return DomainKind::Real2D; },
          [](const GinibreTauKernel&) { return DomainKind::Real2D; },
          [](const WeakNonHermitianKernel&) { return DomainKind::Real2D; },
          [](const LaguerreKernel&) { return DomainKind::Real1D; },
          [](const MacchiKernel&) { return DomainKind::Real1D; },
          [](const DiscreteBesselKernel&) {
            return DomainKind::HalfIntegerLattice;
          },
          [](const MeixnerKernel&) { return DomainKind::NonNegativeIntegers; },
          [](const BumpKernel&) { return DomainKind::Real1D; },
          [](const ExplicitDiscreteKernel&) {
            return DomainKind::HalfIntegerLattice;
          },
      },
      spec.family);
}

std::string kernel_name(const KernelSpec& spec) {
  return std::visit(
      overloaded{
          [](const SineKernel&) { return std::string("sine"); },
          [](const AiryKernel&) { return std::string("airy"); },
          [](const BesselKernel&) { return std::string("bessel"); },
          [](const HermiteKernel&) { return std::string("hermite"); },
          [](const CueKernel&) { return std::string("cue"); },
          [](const SOEvenKernel&) { return std::string("so-even"); },
          [](const SOOddKernel&) { return std::string("so-odd"); },
          [](const SpKernel&) { return std::string("sp"); },
          [](const GinibreKernel&) { return std::string("ginibre"); },
          [](const GinibreTauKernel&) { return std::string("ginibre-tau"); },
          [](const WeakNonHermitianKernel&) { return std::string("weak-nh"); },
          [](const LaguerreKernel&) { return std::string("laguerre"); },
          [](const MacchiKernel&) { return std::string("macchi"); },
          [](const DiscreteBesselKernel&) {
            return std::string("discrete-bessel");
          },
          [](const MeixnerKernel&) { return std::string("meixner"); },
          [](const BumpKernel&) { return std::string("bumps"); },
          [](const ExplicitDiscreteKernel&) { return std::string("explicit"); },
      },
      spec.family);
}

std::vector<std::string> kernel_names() {
  return {"sine",    "airy",        "bessel",  "hermite", "cue",
          "so-even", "so-odd",      "sp",      "ginibre", "ginibre-tau",
          "weak-nh", "laguerre",    "macchi",  "discrete-bessel",
          "meixner", "bumps",       "explicit"};
}

bool is_hermitian(const KernelSpec& spec) {
  if (spec.is<DiscreteBesselKernel>()) {
    return !spec.as<DiscreteBesselKernel>().allow_mixed_sign;
  }
  if (spec.is<ExplicitDiscreteKernel>()) {
    return spec.as<ExplicitDiscreteKernel>().kernel.hermitian;
  }
  return true;
}

int projection_rank(const KernelSpec& spec) {
  return std::visit(
      overloaded{
          [](const HermiteKernel& k) { return k.n; },
          [](const CueKernel& k) { return k.n; },
          [](const SOEvenKernel& k) { return k.n; },
          [](const SOOddKernel& k) { return k.n; },
          [](const SpKernel& k) { return k.n; },
          [](const LaguerreKernel& k) { return k.n; },
          [](const MeixnerKernel& k) { return k.N; },
          [](const auto&) { return 0; },
      },
      spec.family);
}

void validate(const KernelSpec& spec) {
  std::visit(
      overloaded{
          [](const SineKernel&) {},
          [](const AiryKernel&) {},
          [](const BesselKernel& k) {
            require(k.alpha > -1.0,
                    fmt("bessel requires alpha > -1 (got %g)", k.alpha));
            require(near_integer(2.0 * k.alpha),
                    fmt("bessel order restricted to integers and "
                        "half-integers (got alpha = %g)",
                        k.alpha));
            require(k.alpha <= 60.0,
                    fmt("bessel order capped at 60 (got %g)", k.alpha));
          },
          [](const HermiteKernel& k) {
            check_rank_bound(k.n, kHermiteMaxDegree, "hermite");
          },
          [](const CueKernel& k) { check_rank_bound(k.n, 1024, "cue"); },
          [](const SOEvenKernel& k) { check_rank_bound(k.n, 1024, "so-even"); },
          [](const SOOddKernel& k) { check_rank_bound(k.n, 1024, "so-odd"); },
          [](const SpKernel& k) { check_rank_bound(k.n, 1024, "sp"); },
          [](const GinibreKernel&) {},
          [](const GinibreTauKernel& k) {
            require(k.tau >= 0.0 && k.tau < 1.0,
                    fmt("ginibre-tau requires tau in [0, 1) (got %g)", k.tau));
          },
          [](const WeakNonHermitianKernel& k) {
            require(k.alpha > 0.0,
                    fmt("weak-nh requires alpha > 0 (got %g)", k.alpha));
          },
          [](const LaguerreKernel& k) {
            check_rank_bound(k.n, kLaguerreMaxDegree, "laguerre");
            require(k.alpha > -1.0,
                    fmt("laguerre requires alpha > -1 (got %g)", k.alpha));
          },
          [](const MacchiKernel& k) {
            require(k.rho > 0.0, fmt("macchi requires rho > 0 (got %g)", k.rho));
            require(k.alpha > 0.0,
                    fmt("macchi requires alpha > 0 (got %g)", k.alpha));
            require(2.0 * k.rho * k.alpha <= 1.0 + 1e-12,
                    fmt("macchi requires 2*rho*alpha <= 1 (got %g)",
                        2.0 * k.rho * k.alpha));
          },
          [](const DiscreteBesselKernel& k) {
            require(k.theta > 0.0,
                    fmt("discrete-bessel requires theta > 0 (got %g)", k.theta));
            require(k.theta <= 2500.0,
                    fmt("discrete-bessel theta capped at 2500 (got %g)",
                        k.theta));
          },
          [](const MeixnerKernel& k) {
            require(k.M >= k.N && k.N >= 1,
                    fmt("meixner requires M >= N >= 1 (got M = %g, N = %g)",
                        static_cast<double>(k.M), static_cast<double>(k.N)));
            require(k.N <= kMeixnerMaxDegree,
                    fmt("meixner rank capped at %g (got N = %g)",
                        static_cast<double>(kMeixnerMaxDegree),
                        static_cast<double>(k.N)));
            require(k.M <= 4096,
                    fmt("meixner M capped at 4096 (got %g)",
                        static_cast<double>(k.M)));
            require(k.q > 0.0 && k.q < 1.0,
                    fmt("meixner requires q in (0, 1) (got %g)", k.q));
          },
          [](const BumpKernel&) {},
          [](const ExplicitDiscreteKernel& k) {
            const DiscreteKernel& d = k.kernel;
            require(!d.labels.empty(), "explicit kernel needs at least one site");
            require(d.matrix.rows() == d.size() && d.matrix.cols() == d.size(),
                    "explicit kernel matrix shape must match its label count");
            for (size_t i = 1; i < d.labels.size(); ++i) {
              require(d.labels[i] > d.labels[i - 1],
                      "explicit kernel labels must be strictly increasing");
            }
            if (d.hermitian) {
              Eigen::MatrixXcd adj = d.matrix.adjoint();
              require((adj.array() == d.matrix.array()).all(),
                      "explicit kernel flagged Hermitian but the matrix does "
                      "not equal its conjugate transpose");
            }
          },
      },
      spec.family);
}

bool in_domain(const KernelSpec& spec, Point p) {
  switch (domain_kind(spec)) {
    case DomainKind::Real2D:
      return true;
    case DomainKind::Real1D: {
      if (p.imag() != 0.0) return false;
      double x = p.real();
      if (spec.is<AiryKernel>()) {
        return x >= kAiryWindowLo && x <= kAiryWindowHi;
      }
      if (spec.is<BesselKernel>()) {
        return spec.as<BesselKernel>().alpha < 0.0 ? x > 0.0 : x >= 0.0;
      }
      if (spec.is<LaguerreKernel>()) {
        return spec.as<LaguerreKernel>().alpha < 0.0 ? x > 0.0 : x >= 0.0;
      }
      return true;
    }
    case DomainKind::Circle: {
      if (p.imag() != 0.0) return false;
      double hi = spec.is<CueKernel>() ? 2.0 * kPi : kPi;
      return p.real() >= 0.0 && p.real() <= hi;
    }
    case DomainKind::HalfIntegerLattice:
      if (spec.is<ExplicitDiscreteKernel>()) {
        if (p.imag() != 0.0) return false;
        const auto& labels = spec.as<ExplicitDiscreteKernel>().kernel.labels;
        auto it = std::lower_bound(labels.begin(), labels.end(),
                                   p.real() - 1e-9);
        return it != labels.end() && std::abs(*it - p.real()) <= 1e-9;
      }
      return p.imag() == 0.0 && half_integer_site(p.real());
    case DomainKind::NonNegativeIntegers:
      return p.imag() == 0.0 && p.real() > -1e-9 && near_integer(p.real());
  }
  return false;
}

Complex eval_kernel(const KernelSpec& spec, Point x, Point y) {
  validate(spec);
  if (!in_domain(spec, x) || !in_domain(spec, y)) {
    throw constraint_error("point outside the domain of kernel '" +
                           kernel_name(spec) + "'");
  }
  if (is_hermitian(spec) && !canonical_before(x, y)) {
    return std::conj(eval_raw(spec, y, x));
  }
  return eval_raw(spec, x, y);
}

double correlation_det(const KernelSpec& spec,
                       const std::vector<Point>& points) {
  if (points.empty()) {
    throw config_error("correlation determinant needs at least one point");
  }
  const int k = static_cast<int>(points.size());
  Eigen::MatrixXcd a(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      a(i, j) = eval_kernel(spec, points[i], points[j]);
    }
  }
  return a.determinant().real();
}

DiscreteKernel build_discrete_kernel(const KernelSpec& spec,
                                     const std::vector<double>& ground_set) {
  validate(spec);
  if (ground_set.empty()) {
    throw config_error("ground set must not be empty");
  }
  for (size_t i = 1; i < ground_set.size(); ++i) {
    if (ground_set[i] <= ground_set[i - 1]) {
      throw config_error("ground set labels must be strictly increasing");
    }
  }

  DiscreteKernel out;
  out.labels = ground_set;
  const int n = out.size();
  out.matrix.resize(n, n);

  if (spec.is<BumpKernel>()) {
    // labels are bump indices; each bump is a rank-one block of its own
    out.matrix.setZero();
    for (int i = 0; i < n; ++i) {
      double k = ground_set[i];
      if (!near_integer(k)) {
        throw constraint_error(fmt("bump indices must be integers (got %g)", k));
      }
      out.matrix(i, i) = bump_occupation(std::round(k));
    }
    return out;
  }

  if (!(spec.is<DiscreteBesselKernel>() || spec.is<MeixnerKernel>() ||
        spec.is<ExplicitDiscreteKernel>())) {
    throw config_error("kernel '" + kernel_name(spec) +
                       "' is not a lattice family");
  }

  for (double s : ground_set) {
    if (!in_domain(spec, s)) {
      throw constraint_error(fmt("site %g outside the lattice domain of ", s) +
                             kernel_name(spec));
    }
  }

  bool hermitian = true;
  if (spec.is<DiscreteBesselKernel>()) {
    bool mixed = ground_set.front() < 0.0 && ground_set.back() > 0.0;
    if (mixed) {
      if (!spec.as<DiscreteBesselKernel>().allow_mixed_sign) {
        throw constraint_error(
            "discrete-bessel ground set crosses the sign boundary; the full "
            "kernel is not Hermitian there and requires the opt-in flag");
      }
      hermitian = false;
    }
  }
  if (spec.is<ExplicitDiscreteKernel>()) {
    hermitian = spec.as<ExplicitDiscreteKernel>().kernel.hermitian;
  }

  out.hermitian = hermitian;
  if (hermitian) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Complex v = eval_raw(spec, ground_set[i], ground_set[j]);
        out.matrix(i, j) = v;
        out.matrix(j, i) = std::conj(v);
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.matrix(i, j) = eval_raw(spec, ground_set[i], ground_set[j]);
      }
    }
  }
  return out;
}

Complex ginibre_tau_finite(int n, double tau, Complex z1, Complex z2) {
  if (n < 1) throw constraint_error("finite-n elliptic kernel needs n >= 1");
  if (tau < 0.0 || tau >= 1.0) {
    throw constraint_error(fmt("tau must lie in [0, 1) (got %g)", tau));
  }
  if (std::norm(z1) > 600.0 || std::norm(z2) > 600.0) {
    throw constraint_error(
        "finite-n elliptic kernel evaluation limited to |z|^2 <= 600");
  }
  double om = 1.0 - tau * tau;
  auto weight = [&](Complex z) {
    double ex = std::norm(z) - tau * (z.real() * z.real() - z.imag() * z.imag());
    return std::exp(-ex / (2.0 * om));
  };
  // psi_0 = pi^{-1/2} om^{-1/4}; psi_{l+1} = z/sqrt(l+1) psi_l - tau sqrt(l/(l+1)) psi_{l-1}
  Complex acc = 0.0;
  Complex p1 = 1.0, q1 = 1.0;  // psi_l(z1), psi_l(z2) up to the common constant
  Complex p0 = 0.0, q0 = 0.0;
  for (int l = 0; l < n; ++l) {
    acc += p1 * std::conj(q1);
    double rl = std::sqrt(static_cast<double>(l) / (l + 1.0));
    double sl = 1.0 / std::sqrt(l + 1.0);
    Complex p2 = z1 * sl * p1 - tau * rl * p0;
    Complex q2 = z2 * sl * q1 - tau * rl * q0;
    p0 = p1;
    p1 = p2;
    q0 = q1;
    q1 = q2;
  }
  double c2 = 1.0 / (kPi * std::sqrt(om));  // square of the common constant
  return weight(z1) * weight(z2) * c2 * acc;
}

double discrete_bessel_series(double theta, double x, double y) {
  if (!(theta > 0.0)) throw constraint_error("theta must be positive");
  if (!half_integer_site(x) || !half_integer_site(y)) {
    throw constraint_error("series form needs half-integer sites");
  }
  if (x * y < 0.0) {
    throw constraint_error("series form is defined for same-sign sites");
  }
  double arg = 2.0 * std::sqrt(theta);
  int p = site_order(x), r = site_order(y);
  int elbow = static_cast<int>(std::ceil(arg + 16.0 * std::cbrt(arg))) + 64;
  int top = std::max(std::max(p, r) + 1 + 64, elbow);
  std::vector<double> j(top + 1);
  bessel_j_all(top, arg, j);
  double acc = 0.0;
  for (int s = top - 1 - std::max(p, r); s >= 0; --s) {
    acc += j[p + 1 + s] * j[r + 1 + s];
  }
  return acc;
}

TrigFrame trig_frame(const KernelSpec& spec) {
  validate(spec);
  TrigFrame f;
  const Complex half(0.5, 0.0);
  const Complex ihalf(0.0, 0.5);
  if (spec.is<CueKernel>()) {
    int n = spec.as<CueKernel>().n;
    f.f0 = -0.5 * (n - 1);
    f.lo = 0.0;
    f.hi = 2.0 * kPi;
    f.coef = Eigen::MatrixXcd::Zero(n, n);
    double amp = 1.0 / std::sqrt(2.0 * kPi);
    for (int j = 0; j < n; ++j) f.coef(j, j) = amp;
    return f;
  }
  if (spec.is<SOEvenKernel>()) {
    int n = spec.as<SOEvenKernel>().n;
    f.f0 = -static_cast<double>(n - 1);
    f.lo = 0.0;
    f.hi = kPi;
    f.coef = Eigen::MatrixXcd::Zero(2 * n - 1, n);
    f.coef(n - 1, 0) = 1.0 / std::sqrt(kPi);
    double amp = std::sqrt(2.0 / kPi);
    for (int k = 1; k < n; ++k) {
      f.coef(n - 1 + k, k) = amp * half;
      f.coef(n - 1 - k, k) = amp * half;
    }
    return f;
  }
  if (spec.is<SOOddKernel>()) {
    int n = spec.as<SOOddKernel>().n;
    f.f0 = -(n - 0.5);
    f.lo = 0.0;
    f.hi = kPi;
    f.coef = Eigen::MatrixXcd::Zero(2 * n, n);
    double amp = std::sqrt(2.0 / kPi);
    for (int j = 1; j <= n; ++j) {
      f.coef(n + j - 1, j - 1) = -amp * ihalf;  // +(j - 1/2) frequency
      f.coef(n - j, j - 1) = amp * ihalf;       // -(j - 1/2) frequency
    }
    return f;
  }
  if (spec.is<SpKernel>()) {
    int n = spec.as<SpKernel>().n;
    f.f0 = -static_cast<double>(n);
    f.lo = 0.0;
    f.hi = kPi;
    f.coef = Eigen::MatrixXcd::Zero(2 * n + 1, n);
    double amp = std::sqrt(2.0 / kPi);
    for (int k = 1; k <= n; ++k) {
      f.coef(n + k, k - 1) = -amp * ihalf;
      f.coef(n - k, k - 1) = amp * ihalf;
    }
    return f;
  }
  throw config_error("kernel '" + kernel_name(spec) +
                     "' has no trigonometric frame");
}

void projection_frame_eval(const KernelSpec& spec, double x,
                           std::span<double> out) {
  if (spec.is<HermiteKernel>()) {
    int n = spec.as<HermiteKernel>().n;
    eval_orthonormal_all(HermiteFamily{}, n - 1, x, out.subspan(0, n));
    return;
  }
  if (spec.is<LaguerreKernel>()) {
    const auto& k = spec.as<LaguerreKernel>();
    eval_orthonormal_all(LaguerreFamily{k.alpha}, k.n - 1, x,
                         out.subspan(0, k.n));
    return;
  }
  throw config_error("kernel '" + kernel_name(spec) +
                     "' has no real line frame");
}

std::pair<double, double> sampling_window(const KernelSpec& spec) {
  validate(spec);
  if (spec.is<HermiteKernel>()) {
    double s = std::sqrt(2.0 * spec.as<HermiteKernel>().n);
    return {-s - 6.0, s + 6.0};
  }
  if (spec.is<LaguerreKernel>()) {
    const auto& k = spec.as<LaguerreKernel>();
    double edge = 4.0 * k.n + 2.0 * std::abs(k.alpha) + 2.0;
    return {0.0, edge + 12.0 * std::cbrt(edge) + 8.0};
  }
  if (spec.is<CueKernel>()) return {0.0, 2.0 * kPi};
  if (spec.is<SOEvenKernel>() || spec.is<SOOddKernel>() || spec.is<SpKernel>()) {
    return {0.0, kPi};
  }
  throw config_error("kernel '" + kernel_name(spec) +
                     "' has no finite sampling window");
}

KernelSpec kernel_from_params(const std::string& family,
                              const std::map<std::string, double>& params) {
  std::vector<std::string> seen;
  auto get = [&](const std::string& key, bool required,
                 double fallback) -> double {
    seen.push_back(key);
    auto it = params.find(key);
    if (it == params.end()) {
      if (required) {
        throw config_error("kernel '" + family + "' needs parameter '" + key +
                           "'");
      }
      return fallback;
    }
    return it->second;
  };
  auto get_int = [&](const std::string& key, bool required,
                     double fallback) -> int {
    double v = get(key, required, fallback);
    if (!near_integer(v)) {
      throw config_error("parameter '" + key + "' must be an integer");
    }
    return static_cast<int>(std::lround(v));
  };

  KernelSpec spec;
  if (family == "sine") {
    spec = SineKernel{};
  } else if (family == "airy") {
    spec = AiryKernel{};
  } else if (family == "bessel") {
    spec = BesselKernel{get("alpha", true, 0.0)};
  } else if (family == "hermite") {
    spec = HermiteKernel{get_int("n", true, 0)};
  } else if (family == "cue") {
    spec = CueKernel{get_int("n", true, 0)};
  } else if (family == "so-even") {
    spec = SOEvenKernel{get_int("n", true, 0)};
  } else if (family == "so-odd") {
    spec = SOOddKernel{get_int("n", true, 0)};
  } else if (family == "sp") {
    spec = SpKernel{get_int("n", true, 0)};
  } else if (family == "ginibre") {
    spec = GinibreKernel{};
  } else if (family == "ginibre-tau") {
    spec = GinibreTauKernel{get("tau", true, 0.0)};
  } else if (family == "weak-nh") {
    spec = WeakNonHermitianKernel{get("alpha", true, 0.0),
                                  get("x_center", false, 0.0)};
  } else if (family == "laguerre") {
    spec = LaguerreKernel{get_int("n", true, 0), get("alpha", false, 0.0)};
  } else if (family == "macchi") {
    spec = MacchiKernel{get("rho", true, 0.0), get("alpha", true, 0.0),
                        get("beta", false, 0.0)};
  } else if (family == "discrete-bessel") {
    spec = DiscreteBesselKernel{get("theta", true, 0.0),
                                get("mixed", false, 0.0) != 0.0};
  } else if (family == "meixner") {
    spec = MeixnerKernel{get_int("m", true, 0), get_int("n", true, 0),
                         get("q", true, 0.0)};
  } else if (family == "bumps") {
    spec = BumpKernel{};
  } else {
    throw config_error("unknown kernel family '" + family +
                       "' (explicit matrices are loaded from file)");
  }

  for (const auto& [key, value] : params) {
    (void)value;
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      throw config_error("kernel '" + family + "' does not take parameter '" +
                         key + "'");
    }
  }
  validate(spec);
  return spec;
}

}  // namespace detfield
