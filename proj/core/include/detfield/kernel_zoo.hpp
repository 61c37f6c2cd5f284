#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace detfield {

using Complex = std::complex<double>;

// One-particle coordinate. Planar families use both components; every other
// family lives on the real axis and requires a zero imaginary part.
using Point = std::complex<double>;

enum class DomainKind {
  Real1D,
  Real2D,
  Circle,
  HalfIntegerLattice,
  NonNegativeIntegers,
};

struct SineKernel {};
struct AiryKernel {};

// Hard-edge kernel; 2*alpha must be an integer (half-integer and integer
// orders only), alpha > -1. For alpha < 0 the diagonal diverges at 0, so the
// domain is then the open half-line.
struct BesselKernel {
  double alpha = 0.0;
};

// Rank-n projection onto the first n oscillator functions (GUE bulk at
// finite n, with respect to Lebesgue measure on R).
struct HermiteKernel {
  int n = 1;
};

// Eigenvalue angles of Haar-random matrices from the classical compact
// groups. CueKernel is U(n) on [0, 2pi]; the other three live on [0, pi]
// and each has rank n.
struct CueKernel {
  int n = 1;
};
struct SOEvenKernel {
  int n = 1;  // SO(2n)
};
struct SOOddKernel {
  int n = 1;  // SO(2n+1)
};
struct SpKernel {
  int n = 1;  // Sp(n)
};

// Bulk limit of complex non-Hermitian Gaussian matrices, on the plane.
struct GinibreKernel {};

// Elliptic deformation of the Ginibre limit, 0 <= tau < 1; tau = 0 recovers
// GinibreKernel exactly.
struct GinibreTauKernel {
  double tau = 0.0;
};

// Weakly non-Hermitian scaling limit around a bulk point x_center. The
// limiting kernel vanishes identically when |x_center| >= 2, mirroring the
// spectral edge of the semicircle.
struct WeakNonHermitianKernel {
  double alpha = 1.0;
  double x_center = 0.0;
};

// Rank-n projection onto the first n Laguerre functions on [0, inf),
// alpha > -1 (Wishart/chiral bulk at finite n).
struct LaguerreKernel {
  int n = 1;
  double alpha = 0.0;
};

// Exponentially decorrelating kernel rho * exp(-|x-y|/alpha) * e^{i beta (x-y)},
// the unique translation-invariant kernel with i.i.d. spacings. Requires
// 2 * rho * alpha <= 1.
struct MacchiKernel {
  double rho = 0.5;
  double alpha = 1.0;
  double beta = 0.0;
};

// Kernel on the half-integer lattice Z + 1/2 governing poissonized Plancherel
// partitions in modified Frobenius coordinates. The same-sign restrictions
// are symmetric; across the sign boundary the kernel is antisymmetric, so
// mixed-sign evaluation must be opted into explicitly.
struct DiscreteBesselKernel {
  double theta = 1.0;
  bool allow_mixed_sign = false;
};

// Rank-N projection onto Meixner functions with weight C(x+K-1, x) q^x,
// K = M - N + 1, on the non-negative integers. The right-most particle of
// this field has the law of the last-passage time G(M, N).
struct MeixnerKernel {
  int M = 1;
  int N = 1;
  double q = 0.5;
};

// Direct sum of rank-one indicator bumps on the unit intervals (k, k+1),
// k ranging over Z, with occupation probabilities 1 - 1/(k^2 + 1). Counts in
// [-L, L] have divergent mean but bounded variance.
struct BumpKernel {};

struct DiscreteKernel {
  std::vector<double> labels;  // strictly increasing site labels
  Eigen::MatrixXcd matrix;     // kernel sampled on labels
  bool hermitian = true;

  int size() const { return static_cast<int>(labels.size()); }
};

struct ExplicitDiscreteKernel {
  DiscreteKernel kernel;
};

struct KernelSpec {
  using Family =
      std::variant<SineKernel, AiryKernel, BesselKernel, HermiteKernel,
                   CueKernel, SOEvenKernel, SOOddKernel, SpKernel,
                   GinibreKernel, GinibreTauKernel, WeakNonHermitianKernel,
                   LaguerreKernel, MacchiKernel, DiscreteBesselKernel,
                   MeixnerKernel, BumpKernel, ExplicitDiscreteKernel>;

  Family family;

  KernelSpec() = default;
  template <typename F, typename = std::enable_if_t<
                            std::is_constructible_v<Family, F&&>>>
  KernelSpec(F&& f) : family(std::forward<F>(f)) {}  // NOLINT(runtime/explicit)

  template <typename F>
  bool is() const {
    return std::holds_alternative<F>(family);
  }
  template <typename F>
  const F& as() const {
    return std::get<F>(family);
  }
};

DomainKind domain_kind(const KernelSpec& spec);

// Catalog names as accepted by the command line ("sine", "cue", ...).
std::string kernel_name(const KernelSpec& spec);
std::vector<std::string> kernel_names();

// Whether the kernel, as exposed on its full domain, is Hermitian. True for
// everything except mixed-sign DiscreteBessel and non-Hermitian explicit
// matrices.
bool is_hermitian(const KernelSpec& spec);

// Rank of the finite-rank projection families (Hermite, Laguerre, circle
// groups, Meixner); 0 for everything else.
int projection_rank(const KernelSpec& spec);

// Parameter constraint checks; throws constraint_error naming the violated
// constraint.
void validate(const KernelSpec& spec);

bool in_domain(const KernelSpec& spec, Point p);

// K(x, y). Hermitian families are evaluated once in a canonical argument
// order so that eval_kernel(s, x, y) == conj(eval_kernel(s, y, x)) holds
// bitwise. Removable singularities on the diagonal are evaluated by their
// analytic limits.
Complex eval_kernel(const KernelSpec& spec, Point x, Point y);

// det [K(x_i, x_j)]: the n-point correlation (joint intensity) at the given
// points.
double correlation_det(const KernelSpec& spec, const std::vector<Point>& points);

// Materialize a lattice kernel on a finite, strictly increasing ground set.
// For BumpKernel the labels are bump indices and the matrix is diagonal.
DiscreteKernel build_discrete_kernel(const KernelSpec& spec,
                                     const std::vector<double>& ground_set);

// Finite-n elliptic kernel: weighted sum of the first n scaled Hermite
// polynomials in the plane. As n -> infinity it converges to GinibreTauKernel
// times the gauge phase exp(-i tau Im(z1^2 - z2^2) / (2 (1 - tau^2))), a
// unitary equivalence that leaves every correlation determinant unchanged.
Complex ginibre_tau_finite(int n, double tau, Complex z1, Complex z2);

// Same-sign series form Sum_{s >= 0} J_{|x|+1/2+s} J_{|y|+1/2+s} at argument
// 2 sqrt(theta); equals the quotient form and is used for the diagonal.
double discrete_bessel_series(double theta, double x, double y);

// Orthonormal frame of a circle projection written in the Fourier basis:
// frame vector j at angle t is sum_m coef(m, j) * exp(i (f0 + m) t).
struct TrigFrame {
  double f0 = 0.0;
  Eigen::MatrixXcd coef;  // rows = frequency offsets m, cols = frame vectors
  double lo = 0.0;
  double hi = 0.0;
};
TrigFrame trig_frame(const KernelSpec& spec);

// Real orthonormal frame of the line projections (Hermite, Laguerre):
// fills out[0..rank-1] with the frame functions at x.
void projection_frame_eval(const KernelSpec& spec, double x,
                           std::span<double> out);

// Window outside which a projection family's diagonal mass is negligible;
// used by the samplers and by trace/moment quadrature.
std::pair<double, double> sampling_window(const KernelSpec& spec);

// Construct a catalog kernel from its command-line name and numeric
// parameters (keys: n, m, alpha, rho, beta, tau, theta, q, x_center, mixed).
// Throws config_error for unknown names/keys, constraint_error for invalid
// parameter values.
KernelSpec kernel_from_params(const std::string& family,
                              const std::map<std::string, double>& params);

}  // namespace detfield
