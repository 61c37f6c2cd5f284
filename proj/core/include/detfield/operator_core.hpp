#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "detfield/kernel_zoo.hpp"

namespace detfield {

// Axis-aligned box. 1-D windows use axis 0 only; planar windows use both.
struct Window {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};

  static Window interval(double a, double b);
  static Window rect(double ax, double bx, double ay, double by);

  double length(int axis) const { return hi[axis] - lo[axis]; }
  double volume() const;
  bool contains(Point p) const;
};

// Returns true when the boxes share interior volume.
bool windows_overlap(const Window& a, const Window& b);

// Gauss-Legendre product rule over a window, possibly split into equal
// panels per axis. Nodes are strictly interior, weights positive and
// summing to the window volume. 1-D nodes are ascending; planar nodes are
// ordered by modulus with a lexicographic (re, im) tie-break.
struct QuadratureScheme {
  Window window;
  std::vector<Point> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
};

// `order` is the target node count per axis. With `panels` = 0 each axis is
// split automatically so no panel is wider than 16 units; pass an explicit
// panel count to control alignment (e.g. unit panels for piecewise kernels).
QuadratureScheme make_scheme(const Window& window, int order, int panels = 0);

// Nystrom discretization M_ij = sqrt(w_i) K(x_i, x_j) sqrt(w_j). Hermitian
// kernels produce an exactly Hermitian matrix; the eigendecomposition is
// computed on first use and cached (thread-safe, instance immutable).
class DiscretizedOperator {
 public:
  DiscretizedOperator(const KernelSpec& spec, QuadratureScheme scheme);
  DiscretizedOperator(const KernelSpec& spec, const Window& window, int order);

  const QuadratureScheme& scheme() const { return scheme_; }
  const KernelSpec& spec() const { return spec_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  int size() const { return static_cast<int>(matrix_.rows()); }

  Point node(int i) const { return scheme_.nodes[i]; }
  double weight(int i) const { return scheme_.weights[i]; }

  // Real spectrum (ascending) and eigenvectors of the symmetrized matrix.
  const Eigen::VectorXd& eigenvalues() const;
  const Eigen::MatrixXcd& eigenvectors() const;

  double trace() const;         // sum_i w_i K(x_i, x_i)
  double trace_square() const;  // Tr M^2 = sum_ij |M_ij|^2 for Hermitian M

 private:
  KernelSpec spec_;
  QuadratureScheme scheme_;
  Eigen::MatrixXcd matrix_;

  struct EigenCache;
  std::shared_ptr<EigenCache> cache_;
  const EigenCache& eigen_cache() const;
};

DiscretizedOperator discretize(const KernelSpec& spec, const Window& window,
                               int order);
DiscretizedOperator discretize(const KernelSpec& spec,
                               const QuadratureScheme& scheme);

// Determinant in log-magnitude + unit-phase form, det = phase * exp(log_abs),
// via pivoted LU. Guards against under/overflow on large windows.
struct LogDet {
  double log_abs = 0.0;
  Complex phase = 1.0;

  Complex value() const { return phase * std::exp(log_abs); }
};
LogDet log_det(const Eigen::MatrixXcd& m);

// Spectral validity of a Hermitian operator: a kernel defines a point field
// exactly when its spectrum lies in [0, 1]. `is_valid` allows 1e-9 of
// discretization slack on both ends; `is_valid_raw` is the strict verdict.
struct ValidityReport {
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool is_valid = false;
  bool is_valid_raw = false;
};
ValidityReport validity_check(const Eigen::MatrixXcd& m);
ValidityReport validity_check(const DiscretizedOperator& op);
ValidityReport validity_check(const DiscreteKernel& kernel);

// Maps disjoint sub-windows to node-index blocks of a scheme. A node belongs
// to a sub-window when it lies in the half-open box [lo, hi). Errors if the
// sub-windows overlap or leave the parent window.
std::vector<std::vector<int>> window_blocks(const QuadratureScheme& scheme,
                                            const std::vector<Window>& subs);

// Joint generating functional E prod_j z_j^{#B_j} = det(Id + sum_j (z_j - 1)
// M Pi_j) where Pi_j selects the nodes of block j. Blocks must be pairwise
// disjoint index sets. Returns exactly 1 when every z_j equals 1.
Complex fredholm_genfun(const Eigen::MatrixXcd& m,
                        const std::vector<std::vector<int>>& blocks,
                        const std::vector<Complex>& z);
Complex fredholm_genfun(const DiscretizedOperator& op,
                        const std::vector<Window>& sub_windows,
                        const std::vector<Complex>& z);

// P(no particle in the window) = det(Id - M).
double gap_probability(const Eigen::MatrixXcd& m);
double gap_probability(const DiscretizedOperator& op);

// Doubles the per-axis order until successive gap values agree to `tol`.
struct GapResult {
  double value = 0.0;
  int order = 0;        // per-axis order of the accepted evaluation
  double last_delta = 0.0;
};
GapResult gap_probability_converged(const KernelSpec& spec,
                                    const Window& window, int start_order = 64,
                                    double tol = 1e-9, int max_order = 512);

// Coefficients e_m of the count generating function det(Id + (z-1)M) =
// sum_m e_m (z-1)^m, i.e. the elementary symmetric polynomials of the
// spectrum. E[#(#-1)...(#-m+1)] = m! e_m. Returns e_0..e_max_m.
std::vector<double> factorial_moment_coefficients(
    const DiscretizedOperator& op, int max_m);
std::vector<double> factorial_moment_coefficients(
    const Eigen::VectorXd& eigenvalues, int max_m);

// First two count moments without an eigendecomposition.
double count_mean(const DiscretizedOperator& op);
double count_variance(const DiscretizedOperator& op);  // Tr(M - M^2)
double count_variance(const Eigen::MatrixXcd& m);

// Janossy density p_k(points) = det(Id - M) det[L(p_i, p_j)] where L =
// K(Id - K)^{-1} is assembled spectrally and evaluated at arbitrary points
// of the window through the Nystrom extension of the eigenfunctions.
// Requires max eigenvalue <= 1 - 1e-8; projection kernels must use the
// sampler module's chain-rule density instead.
double janossy_density(const DiscretizedOperator& op,
                       const std::vector<Point>& points);

// Discrete analogue: probability that exactly the given sites (indices into
// the ground set) are occupied.
double janossy_density(const DiscreteKernel& kernel,
                       const std::vector<int>& occupied);

// Full atom distribution of a discrete kernel on n <= 14 sites. Entry `mask`
// is P(occupied set == mask), bit i standing for site i, computed by
// inclusion-exclusion over principal minors.
std::vector<double> brute_force_oracle(const DiscreteKernel& kernel);

// Cluster function r_l as the signed sum over the (l-1)! cyclic orders of
// the kernel product K(x_1, x_s2) ... K(x_sl, x_1); l <= 8.
double cluster_function(const KernelSpec& spec,
                        const std::vector<Point>& points);
double cluster_function(const Eigen::MatrixXcd& kernel_values);

// Values of a symmetric ell-point function on every nonempty subset of a
// labeled ell-tuple, indexed by bitmask; entry 0 is fixed at 1 (the empty
// product) so partition sums read uniformly.
struct ClusterTable {
  int order = 0;
  std::vector<double> values;  // size 1 << order

  double at(unsigned mask) const { return values[mask]; }
};

enum class MobiusDirection {
  kCorrelationToCluster,  // rho table in, cluster table out
  kClusterToCorrelation,  // cluster table in, rho table out
};

// Partition-lattice transform between correlation and cluster tables; the
// two directions are mutually inverse. order <= 8.
ClusterTable mobius_invert(const ClusterTable& table, MobiusDirection dir);

// Correlation table rho(S) = det K[S] from a kernel sampled on ell points.
ClusterTable correlation_table(const Eigen::MatrixXcd& kernel_values);
ClusterTable correlation_table(const KernelSpec& spec,
                               const std::vector<Point>& points);

// Count cumulants from integrated cluster functions and back:
// sum C_n z^n / n! = sum V_n (e^z - 1)^n / n!. Input V_1..V_m (m <= 8) as
// v[0..m-1]; output C_1..C_m likewise.
std::vector<double> cumulants_from_cluster_integrals(
    const std::vector<double>& v);
std::vector<double> cluster_integrals_from_cumulants(
    const std::vector<double>& c);

}  // namespace detfield
