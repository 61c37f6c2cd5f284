#include "detfield/operator_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>

#include "detfield/errors.hpp"
#include "internal/gauss_legendre.hpp"

namespace detfield {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

constexpr int kMaxNodes = 4096;
constexpr int kMaxClusterOrder = 8;
constexpr int kMaxCumulantOrder = 8;
constexpr double kValidityTol = 1e-9;
constexpr double kProjectionGuard = 1e-8;

void check_window(const Window& w) {
  if (w.dim != 1 && w.dim != 2) {
    throw config_error("window dimension must be 1 or 2");
  }
  for (int axis = 0; axis < w.dim; ++axis) {
    if (!std::isfinite(w.lo[axis]) || !std::isfinite(w.hi[axis]) ||
        !(w.lo[axis] < w.hi[axis])) {
      throw config_error("window must have finite positive extent");
    }
  }
}

struct AxisRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

AxisRule axis_rule(double lo, double hi, int order, int panels) {
  double length = hi - lo;
  int p = panels;
  if (p <= 0) {
    p = std::max(1, static_cast<int>(std::ceil(length / 16.0 - 1e-12)));
  }
  int q = std::max(2, (order + p - 1) / p);
  const internal::GaussRule& rule = internal::gauss_rule(q);
  AxisRule out;
  out.nodes.reserve(static_cast<size_t>(p) * q);
  out.weights.reserve(static_cast<size_t>(p) * q);
  double width = length / p;
  for (int k = 0; k < p; ++k) {
    double a = lo + k * width;
    double mid = a + 0.5 * width;
    double half = 0.5 * width;
    for (int i = 0; i < q; ++i) {
      out.nodes.push_back(mid + half * rule.nodes[i]);
      out.weights.push_back(half * rule.weights[i]);
    }
  }
  return out;
}

bool modulus_lex_before(Point a, Point b) {
  double na = std::norm(a);
  double nb = std::norm(b);
  if (na != nb) return na < nb;
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

Eigen::MatrixXcd kernel_matrix(const KernelSpec& spec,
                               const std::vector<Point>& points) {
  int k = static_cast<int>(points.size());
  Eigen::MatrixXcd m(k, k);
  if (is_hermitian(spec)) {
    for (int i = 0; i < k; ++i) {
      m(i, i) = eval_kernel(spec, points[i], points[i]).real();
      for (int j = i + 1; j < k; ++j) {
        Complex v = eval_kernel(spec, points[i], points[j]);
        m(i, j) = v;
        m(j, i) = std::conj(v);
      }
    }
  } else {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        m(i, j) = eval_kernel(spec, points[i], points[j]);
      }
    }
  }
  return m;
}

// det(Id - M) as log-magnitude + phase from a Hermitian spectrum.
LogDet log_det_complement(const Eigen::VectorXd& eigenvalues) {
  LogDet out;
  for (int i = 0; i < eigenvalues.size(); ++i) {
    double u = 1.0 - eigenvalues[i];
    if (u == 0.0) {
      out.log_abs = -std::numeric_limits<double>::infinity();
      return out;
    }
    out.log_abs += std::log(std::abs(u));
    if (u < 0.0) out.phase = -out.phase;
  }
  return out;
}

double stirling_second(int k, int n) {
  static const auto table = [] {
    std::array<std::array<double, kMaxCumulantOrder + 1>,
               kMaxCumulantOrder + 1>
        s{};
    s[0][0] = 1.0;
    for (int i = 1; i <= kMaxCumulantOrder; ++i) {
      for (int j = 1; j <= i; ++j) {
        s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1];
      }
    }
    return s;
  }();
  return table[k][n];
}

double stirling_first_signed(int k, int n) {
  static const auto table = [] {
    std::array<std::array<double, kMaxCumulantOrder + 1>,
               kMaxCumulantOrder + 1>
        s{};
    s[0][0] = 1.0;
    for (int i = 1; i <= kMaxCumulantOrder; ++i) {
      for (int j = 1; j <= i; ++j) {
        s[i][j] = s[i - 1][j - 1] - (i - 1) * s[i - 1][j];
      }
    }
    return s;
  }();
  return table[k][n];
}

}  // namespace

Window Window::interval(double a, double b) {
  Window w;
  w.dim = 1;
  w.lo[0] = a;
  w.hi[0] = b;
  return w;
}

Window Window::rect(double ax, double bx, double ay, double by) {
  Window w;
  w.dim = 2;
  w.lo = {ax, ay};
  w.hi = {bx, by};
  return w;
}

double Window::volume() const {
  double v = 1.0;
  for (int axis = 0; axis < dim; ++axis) v *= hi[axis] - lo[axis];
  return v;
}

bool Window::contains(Point p) const {
  if (dim == 1 && p.imag() != 0.0) return false;
  if (p.real() < lo[0] || p.real() > hi[0]) return false;
  if (dim == 2 && (p.imag() < lo[1] || p.imag() > hi[1])) return false;
  return true;
}

bool windows_overlap(const Window& a, const Window& b) {
  if (a.dim != b.dim) return false;
  for (int axis = 0; axis < a.dim; ++axis) {
    if (std::max(a.lo[axis], b.lo[axis]) >=
        std::min(a.hi[axis], b.hi[axis])) {
      return false;
    }
  }
  return true;
}

QuadratureScheme make_scheme(const Window& window, int order, int panels) {
  check_window(window);
  if (order < 2) throw config_error("quadrature order must be at least 2");
  if (panels < 0) throw config_error("panel count must be nonnegative");

  QuadratureScheme scheme;
  scheme.window = window;
  AxisRule x = axis_rule(window.lo[0], window.hi[0], order, panels);
  if (window.dim == 1) {
    scheme.nodes.reserve(x.nodes.size());
    for (size_t i = 0; i < x.nodes.size(); ++i) {
      scheme.nodes.emplace_back(x.nodes[i], 0.0);
    }
    scheme.weights = std::move(x.weights);
  } else {
    AxisRule y = axis_rule(window.lo[1], window.hi[1], order, panels);
    size_t total = x.nodes.size() * y.nodes.size();
    if (total > static_cast<size_t>(kMaxNodes) * kMaxNodes) {
      throw config_error("quadrature scheme too large");
    }
    scheme.nodes.reserve(total);
    scheme.weights.reserve(total);
    for (size_t i = 0; i < x.nodes.size(); ++i) {
      for (size_t j = 0; j < y.nodes.size(); ++j) {
        scheme.nodes.emplace_back(x.nodes[i], y.nodes[j]);
        scheme.weights.push_back(x.weights[i] * y.weights[j]);
      }
    }
    std::vector<int> idx(scheme.nodes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return modulus_lex_before(scheme.nodes[a], scheme.nodes[b]);
    });
    std::vector<Point> nodes(scheme.nodes.size());
    std::vector<double> weights(scheme.nodes.size());
    for (size_t i = 0; i < idx.size(); ++i) {
      nodes[i] = scheme.nodes[idx[i]];
      weights[i] = scheme.weights[idx[i]];
    }
    scheme.nodes = std::move(nodes);
    scheme.weights = std::move(weights);
  }
  if (scheme.size() > kMaxNodes) {
    throw config_error(
        fmt("quadrature scheme has %.0f nodes; the cap is %.0f",
            static_cast<double>(scheme.size()), kMaxNodes));
  }
  return scheme;
}

struct DiscretizedOperator::EigenCache {
  std::once_flag once;
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

DiscretizedOperator::DiscretizedOperator(const KernelSpec& spec,
                                         QuadratureScheme scheme)
    : spec_(spec),
      scheme_(std::move(scheme)),
      cache_(std::make_shared<EigenCache>()) {
  validate(spec_);
  DomainKind kind = domain_kind(spec_);
  if (kind == DomainKind::HalfIntegerLattice ||
      kind == DomainKind::NonNegativeIntegers) {
    throw config_error(
        "kernel lives on a discrete ground set; use build_discrete_kernel");
  }
  int want_dim = kind == DomainKind::Real2D ? 2 : 1;
  if (scheme_.window.dim != want_dim) {
    throw config_error("window dimension does not match the kernel domain");
  }
  if (scheme_.nodes.size() != scheme_.weights.size() || scheme_.nodes.empty()) {
    throw config_error("quadrature scheme is empty or inconsistent");
  }
  for (Point p : scheme_.nodes) {
    if (!in_domain(spec_, p)) {
      throw config_error("window extends outside the kernel domain");
    }
  }
  int n = scheme_.size();
  Eigen::VectorXd sq(n);
  for (int i = 0; i < n; ++i) sq[i] = std::sqrt(scheme_.weights[i]);
  matrix_.resize(n, n);
  if (is_hermitian(spec_)) {
    for (int i = 0; i < n; ++i) {
      matrix_(i, i) =
          sq[i] * sq[i] *
          eval_kernel(spec_, scheme_.nodes[i], scheme_.nodes[i]).real();
      for (int j = i + 1; j < n; ++j) {
        Complex v =
            sq[i] * sq[j] * eval_kernel(spec_, scheme_.nodes[i],
                                        scheme_.nodes[j]);
        matrix_(i, j) = v;
        matrix_(j, i) = std::conj(v);
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        matrix_(i, j) = sq[i] * sq[j] *
                        eval_kernel(spec_, scheme_.nodes[i], scheme_.nodes[j]);
      }
    }
  }
}

DiscretizedOperator::DiscretizedOperator(const KernelSpec& spec,
                                         const Window& window, int order)
    : DiscretizedOperator(spec, make_scheme(window, order)) {}

const DiscretizedOperator::EigenCache& DiscretizedOperator::eigen_cache()
    const {
  std::call_once(cache_->once, [this] {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix_);
    if (solver.info() != Eigen::Success) {
      throw convergence_error("eigendecomposition failed");
    }
    cache_->values = solver.eigenvalues();
    cache_->vectors = solver.eigenvectors();
  });
  return *cache_;
}

const Eigen::VectorXd& DiscretizedOperator::eigenvalues() const {
  return eigen_cache().values;
}

const Eigen::MatrixXcd& DiscretizedOperator::eigenvectors() const {
  return eigen_cache().vectors;
}

double DiscretizedOperator::trace() const {
  return matrix_.diagonal().real().sum();
}

double DiscretizedOperator::trace_square() const {
  return matrix_.squaredNorm();
}

DiscretizedOperator discretize(const KernelSpec& spec, const Window& window,
                               int order) {
  return DiscretizedOperator(spec, window, order);
}

DiscretizedOperator discretize(const KernelSpec& spec,
                               const QuadratureScheme& scheme) {
  return DiscretizedOperator(spec, scheme);
}

LogDet log_det(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw config_error("determinant of a non-square matrix");
  LogDet out;
  if (m.rows() == 0) return out;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  out.phase = static_cast<Complex>(lu.permutationP().determinant());
  for (int i = 0; i < m.rows(); ++i) {
    Complex u = lu.matrixLU()(i, i);
    double a = std::abs(u);
    if (a == 0.0) {
      out.log_abs = -std::numeric_limits<double>::infinity();
      out.phase = 1.0;
      return out;
    }
    out.log_abs += std::log(a);
    out.phase *= u / a;
  }
  return out;
}

ValidityReport validity_check(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) {
    throw config_error("validity check requires a square matrix");
  }
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw constraint_error("validity check requires a Hermitian matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw convergence_error("eigendecomposition failed");
  }
  ValidityReport report;
  report.min_eig = solver.eigenvalues().minCoeff();
  report.max_eig = solver.eigenvalues().maxCoeff();
  report.is_valid = report.min_eig >= -kValidityTol &&
                    report.max_eig <= 1.0 + kValidityTol;
  report.is_valid_raw = report.min_eig >= 0.0 && report.max_eig <= 1.0;
  return report;
}

ValidityReport validity_check(const DiscretizedOperator& op) {
  const Eigen::VectorXd& eigs = op.eigenvalues();
  ValidityReport report;
  report.min_eig = eigs.minCoeff();
  report.max_eig = eigs.maxCoeff();
  report.is_valid = report.min_eig >= -kValidityTol &&
                    report.max_eig <= 1.0 + kValidityTol;
  report.is_valid_raw = report.min_eig >= 0.0 && report.max_eig <= 1.0;
  return report;
}

ValidityReport validity_check(const DiscreteKernel& kernel) {
  if (!kernel.hermitian) {
    throw constraint_error("validity check requires a Hermitian kernel");
  }
  return validity_check(kernel.matrix);
}

std::vector<std::vector<int>> window_blocks(const QuadratureScheme& scheme,
                                            const std::vector<Window>& subs) {
  for (const Window& sub : subs) {
    check_window(sub);
    if (sub.dim != scheme.window.dim) {
      throw config_error("sub-window dimension mismatch");
    }
    for (int axis = 0; axis < sub.dim; ++axis) {
      if (sub.lo[axis] < scheme.window.lo[axis] - 1e-12 ||
          sub.hi[axis] > scheme.window.hi[axis] + 1e-12) {
        throw config_error("sub-window leaves the parent window");
      }
    }
  }
  for (size_t a = 0; a < subs.size(); ++a) {
    for (size_t b = a + 1; b < subs.size(); ++b) {
      if (windows_overlap(subs[a], subs[b])) {
        throw config_error("sub-windows overlap");
      }
    }
  }
  std::vector<std::vector<int>> blocks(subs.size());
  for (int i = 0; i < scheme.size(); ++i) {
    Point p = scheme.nodes[i];
    for (size_t j = 0; j < subs.size(); ++j) {
      const Window& sub = subs[j];
      bool inside = p.real() >= sub.lo[0] && p.real() < sub.hi[0];
      if (sub.dim == 2) {
        inside = inside && p.imag() >= sub.lo[1] && p.imag() < sub.hi[1];
      }
      if (inside) {
        blocks[j].push_back(i);
        break;
      }
    }
  }
  return blocks;
}

Complex fredholm_genfun(const Eigen::MatrixXcd& m,
                        const std::vector<std::vector<int>>& blocks,
                        const std::vector<Complex>& z) {
  if (m.rows() != m.cols()) {
    throw config_error("generating function requires a square matrix");
  }
  if (blocks.size() != z.size()) {
    throw config_error("one z value per block is required");
  }
  int n = static_cast<int>(m.rows());
  std::vector<char> seen(n, 0);
  for (const auto& block : blocks) {
    for (int c : block) {
      if (c < 0 || c >= n) throw config_error("block index out of range");
      if (seen[c]) throw config_error("blocks share a node");
      seen[c] = 1;
    }
  }
  bool trivial = true;
  for (Complex zj : z) {
    if (zj != Complex(1.0, 0.0)) trivial = false;
  }
  if (trivial) return 1.0;

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
  for (size_t j = 0; j < blocks.size(); ++j) {
    Complex factor = z[j] - 1.0;
    if (factor == Complex(0.0, 0.0)) continue;
    for (int c : blocks[j]) {
      a.col(c) += factor * m.col(c);
    }
  }
  return log_det(a).value();
}

Complex fredholm_genfun(const DiscretizedOperator& op,
                        const std::vector<Window>& sub_windows,
                        const std::vector<Complex>& z) {
  return fredholm_genfun(op.matrix(), window_blocks(op.scheme(), sub_windows),
                         z);
}

double gap_probability(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) {
    throw config_error("gap probability requires a square matrix");
  }
  Eigen::MatrixXcd a =
      Eigen::MatrixXcd::Identity(m.rows(), m.cols()) - m;
  return log_det(a).value().real();
}

double gap_probability(const DiscretizedOperator& op) {
  return gap_probability(op.matrix());
}

GapResult gap_probability_converged(const KernelSpec& spec,
                                    const Window& window, int start_order,
                                    double tol, int max_order) {
  if (start_order < 2 || max_order < start_order) {
    throw config_error("invalid order ladder");
  }
  GapResult result;
  double previous = gap_probability(discretize(spec, window, start_order));
  double delta = std::numeric_limits<double>::infinity();
  for (int order = 2 * start_order; order <= max_order; order *= 2) {
    double current = gap_probability(discretize(spec, window, order));
    delta = std::abs(current - previous);
    if (delta < tol) {
      result.value = current;
      result.order = order;
      result.last_delta = delta;
      return result;
    }
    previous = current;
  }
  throw convergence_error(
      fmt("gap probability did not settle to %.1e; last change %.3e", tol,
          delta));
}

std::vector<double> factorial_moment_coefficients(
    const Eigen::VectorXd& eigenvalues, int max_m) {
  if (max_m < 0) throw config_error("moment order must be nonnegative");
  std::vector<double> e(static_cast<size_t>(max_m) + 1, 0.0);
  e[0] = 1.0;
  for (int i = 0; i < eigenvalues.size(); ++i) {
    double lambda = eigenvalues[i];
    for (int m = std::min<int>(max_m, i + 1); m >= 1; --m) {
      e[m] += lambda * e[m - 1];
    }
  }
  return e;
}

std::vector<double> factorial_moment_coefficients(
    const DiscretizedOperator& op, int max_m) {
  return factorial_moment_coefficients(op.eigenvalues(), max_m);
}

double count_mean(const DiscretizedOperator& op) { return op.trace(); }

double count_variance(const DiscretizedOperator& op) {
  return op.trace() - op.trace_square();
}

double count_variance(const Eigen::MatrixXcd& m) {
  return m.diagonal().real().sum() - m.squaredNorm();
}

namespace {

// Eigenfunction values phi_k(p) for every k, as one row per point. Nodes hit
// exactly reuse the eigenvector entry; other points go through the Nystrom
// extension phi_k(p) = sum_i sqrt(w_i) K(p, x_i) v_k(i) / lambda_k, with
// near-null modes dropped (their weight in L is O(lambda)).
Eigen::MatrixXcd eigenfunction_rows(const DiscretizedOperator& op,
                                    const std::vector<Point>& points,
                                    double lambda_cut) {
  int n = op.size();
  int k = static_cast<int>(points.size());
  const Eigen::VectorXd& lambda = op.eigenvalues();
  const Eigen::MatrixXcd& vectors = op.eigenvectors();
  Eigen::MatrixXcd rows(k, n);
  for (int a = 0; a < k; ++a) {
    int match = -1;
    for (int i = 0; i < n; ++i) {
      if (op.node(i) == points[a]) {
        match = i;
        break;
      }
    }
    if (match >= 0) {
      rows.row(a) = vectors.row(match) / std::sqrt(op.weight(match));
      continue;
    }
    Eigen::RowVectorXcd kv(n);
    for (int i = 0; i < n; ++i) {
      kv[i] = std::sqrt(op.weight(i)) *
              eval_kernel(op.spec(), points[a], op.node(i));
    }
    rows.row(a) = kv * vectors;
    for (int c = 0; c < n; ++c) {
      rows(a, c) = lambda[c] > lambda_cut ? rows(a, c) / lambda[c] : 0.0;
    }
  }
  return rows;
}

}  // namespace

double janossy_density(const DiscretizedOperator& op,
                       const std::vector<Point>& points) {
  const Eigen::VectorXd& lambda = op.eigenvalues();
  int n = op.size();
  double lambda_max = lambda[n - 1];
  if (lambda_max > 1.0 - kProjectionGuard) {
    throw constraint_error(
        fmt("operator spectrum reaches %.12g; too close to a projection -- "
            "use the sampler chain-rule density instead",
            lambda_max));
  }
  LogDet d0 = log_det_complement(lambda);
  double gap = d0.value().real();
  if (points.empty()) return gap;
  for (Point p : points) {
    if (!op.scheme().window.contains(p)) {
      throw config_error("density point lies outside the operator window");
    }
  }
  double lambda_cut = 1e-12 * std::max(1.0, lambda_max);
  Eigen::MatrixXcd phi = eigenfunction_rows(op, points, lambda_cut);
  Eigen::MatrixXcd scaled = phi;
  for (int c = 0; c < n; ++c) {
    double ratio =
        lambda[c] > lambda_cut ? lambda[c] / (1.0 - lambda[c]) : 0.0;
    scaled.col(c) *= ratio;
  }
  Eigen::MatrixXcd l = scaled * phi.adjoint();
  return gap * l.determinant().real();
}

double janossy_density(const DiscreteKernel& kernel,
                       const std::vector<int>& occupied) {
  if (!kernel.hermitian) {
    throw constraint_error("Janossy densities require a Hermitian kernel");
  }
  int n = kernel.size();
  std::vector<char> seen(n, 0);
  for (int site : occupied) {
    if (site < 0 || site >= n) throw config_error("site index out of range");
    if (seen[site]) throw config_error("duplicate site index");
    seen[site] = 1;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(kernel.matrix);
  if (solver.info() != Eigen::Success) {
    throw convergence_error("eigendecomposition failed");
  }
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  if (lambda[n - 1] > 1.0 - kProjectionGuard) {
    throw constraint_error(
        fmt("kernel spectrum reaches %.12g; too close to a projection -- "
            "use the sampler chain-rule density instead",
            lambda[n - 1]));
  }
  double gap = log_det_complement(lambda).value().real();
  if (occupied.empty()) return gap;
  int k = static_cast<int>(occupied.size());
  Eigen::MatrixXcd rows(k, n);
  for (int a = 0; a < k; ++a) {
    rows.row(a) = solver.eigenvectors().row(occupied[a]);
  }
  Eigen::MatrixXcd scaled = rows;
  for (int c = 0; c < n; ++c) {
    scaled.col(c) *= lambda[c] / (1.0 - lambda[c]);
  }
  Eigen::MatrixXcd l = scaled * rows.adjoint();
  return gap * l.determinant().real();
}

std::vector<double> brute_force_oracle(const DiscreteKernel& kernel) {
  int n = kernel.size();
  if (n > 14) {
    throw config_error("exhaustive oracle is limited to 14 sites");
  }
  size_t total = size_t{1} << n;
  std::vector<double> dist(total, 0.0);
  dist[0] = 1.0;
  std::vector<int> sites;
  sites.reserve(n);
  for (size_t mask = 1; mask < total; ++mask) {
    sites.clear();
    for (int i = 0; i < n; ++i) {
      if (mask & (size_t{1} << i)) sites.push_back(i);
    }
    int k = static_cast<int>(sites.size());
    Eigen::MatrixXcd minor(k, k);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        minor(a, b) = kernel.matrix(sites[a], sites[b]);
      }
    }
    dist[mask] = minor.determinant().real();
  }
  for (int b = 0; b < n; ++b) {
    size_t bit = size_t{1} << b;
    for (size_t mask = 0; mask < total; ++mask) {
      if (!(mask & bit)) dist[mask] -= dist[mask | bit];
    }
  }
  double sum = 0.0;
  double min_p = 0.0;
  for (double p : dist) {
    sum += p;
    min_p = std::min(min_p, p);
  }
  if (min_p < -1e-10 || std::abs(sum - 1.0) > 1e-10) {
    throw constraint_error(
        fmt("kernel does not define a point field: oracle mass %.12g, "
            "lowest atom %.3e",
            sum, min_p));
  }
  return dist;
}

double cluster_function(const Eigen::MatrixXcd& kernel_values) {
  int ell = static_cast<int>(kernel_values.rows());
  if (kernel_values.cols() != ell || ell < 1) {
    throw config_error("cluster function requires a square kernel sample");
  }
  if (ell > kMaxClusterOrder) {
    throw config_error("cluster order is limited to 8");
  }
  if (ell == 1) return kernel_values(0, 0).real();
  std::vector<int> perm(ell - 1);
  std::iota(perm.begin(), perm.end(), 1);
  Complex sum = 0.0;
  do {
    Complex term = kernel_values(0, perm[0]);
    for (int i = 0; i + 1 < ell - 1; ++i) {
      term *= kernel_values(perm[i], perm[i + 1]);
    }
    term *= kernel_values(perm[ell - 2], 0);
    sum += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  double sign = (ell % 2 == 0) ? -1.0 : 1.0;
  return sign * sum.real();
}

double cluster_function(const KernelSpec& spec,
                        const std::vector<Point>& points) {
  if (points.empty() || points.size() > kMaxClusterOrder) {
    throw config_error("cluster order must lie between 1 and 8");
  }
  return cluster_function(kernel_matrix(spec, points));
}

namespace {

void check_table(const ClusterTable& table) {
  if (table.order < 1 || table.order > kMaxClusterOrder) {
    throw config_error("table order must lie between 1 and 8");
  }
  if (table.values.size() != (size_t{1} << table.order)) {
    throw config_error("cluster table is incomplete");
  }
}

// Sums over set partitions of `mask`: each block is a subset containing the
// lowest remaining bit, recursing on the rest.
template <typename Coeff>
double partition_sum(const std::vector<double>& values, unsigned mask,
                     int blocks, double product, const Coeff& coeff) {
  if (mask == 0) return coeff(blocks) * product;
  unsigned low = mask & (~mask + 1);
  unsigned rest = mask ^ low;
  double total = 0.0;
  unsigned sub = rest;
  while (true) {
    unsigned block = sub | low;
    total += partition_sum(values, rest ^ sub, blocks + 1,
                           product * values[block], coeff);
    if (sub == 0) break;
    sub = (sub - 1) & rest;
  }
  return total;
}

}  // namespace

ClusterTable mobius_invert(const ClusterTable& table, MobiusDirection dir) {
  check_table(table);
  ClusterTable out;
  out.order = table.order;
  out.values.assign(table.values.size(), 0.0);
  out.values[0] = 1.0;
  static const std::array<double, kMaxClusterOrder + 1> factorial = {
      1, 1, 2, 6, 24, 120, 720, 5040, 40320};
  for (unsigned mask = 1; mask < table.values.size(); ++mask) {
    if (dir == MobiusDirection::kCorrelationToCluster) {
      out.values[mask] =
          partition_sum(table.values, mask, 0, 1.0, [&](int m) {
            double sign = (m % 2 == 0) ? -1.0 : 1.0;
            return sign * factorial[m - 1];
          });
    } else {
      out.values[mask] =
          partition_sum(table.values, mask, 0, 1.0, [](int) { return 1.0; });
    }
  }
  return out;
}

ClusterTable correlation_table(const Eigen::MatrixXcd& kernel_values) {
  int ell = static_cast<int>(kernel_values.rows());
  if (kernel_values.cols() != ell || ell < 1 || ell > kMaxClusterOrder) {
    throw config_error("table order must lie between 1 and 8");
  }
  ClusterTable table;
  table.order = ell;
  table.values.assign(size_t{1} << ell, 0.0);
  table.values[0] = 1.0;
  std::vector<int> sites;
  for (unsigned mask = 1; mask < table.values.size(); ++mask) {
    sites.clear();
    for (int i = 0; i < ell; ++i) {
      if (mask & (1u << i)) sites.push_back(i);
    }
    int k = static_cast<int>(sites.size());
    Eigen::MatrixXcd minor(k, k);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        minor(a, b) = kernel_values(sites[a], sites[b]);
      }
    }
    table.values[mask] = minor.determinant().real();
  }
  return table;
}

ClusterTable correlation_table(const KernelSpec& spec,
                               const std::vector<Point>& points) {
  if (points.empty() || points.size() > kMaxClusterOrder) {
    throw config_error("table order must lie between 1 and 8");
  }
  return correlation_table(kernel_matrix(spec, points));
}

std::vector<double> cumulants_from_cluster_integrals(
    const std::vector<double>& v) {
  int m = static_cast<int>(v.size());
  if (m > kMaxCumulantOrder) {
    throw config_error("cumulant order is limited to 8");
  }
  std::vector<double> c(v.size(), 0.0);
  for (int k = 1; k <= m; ++k) {
    for (int n = 1; n <= k; ++n) {
      c[k - 1] += stirling_second(k, n) * v[n - 1];
    }
  }
  return c;
}

std::vector<double> cluster_integrals_from_cumulants(
    const std::vector<double>& c) {
  int m = static_cast<int>(c.size());
  if (m > kMaxCumulantOrder) {
    throw config_error("cumulant order is limited to 8");
  }
  std::vector<double> v(c.size(), 0.0);
  for (int k = 1; k <= m; ++k) {
    for (int n = 1; n <= k; ++n) {
      v[k - 1] += stirling_first_signed(k, n) * c[n - 1];
    }
  }
  return v;
}

}  // namespace detfield
