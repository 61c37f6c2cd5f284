#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "detfield/kernel_zoo.hpp"
#include "detfield/renewal_theory.hpp"
#include "detfield/rng.hpp"

namespace detfield {

// A finite sample of a point field, sorted ascending (1-D families) so that
// coincidence checks and spacing statistics can read the points in order.
struct PointConfiguration {
  DomainKind domain = DomainKind::Real1D;
  std::vector<Point> points;

  int size() const { return static_cast<int>(points.size()); }
};

// Exact sampler for a finite kernel: eigendecomposition once, then a
// Bernoulli draw per eigenvalue followed by sequential conditional site
// selection. Returns ascending site indices into kernel.labels.
class DiscreteDppSampler {
 public:
  explicit DiscreteDppSampler(const DiscreteKernel& kernel);

  std::vector<int> sample(RngStream& rng) const;
  int size() const { return static_cast<int>(eigenvalues_.size()); }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;
};

std::vector<int> sample_discrete_dpp(const DiscreteKernel& kernel,
                                     RngStream& rng);

// Exact sampler for the rank-n projection families (hermite, laguerre, cue,
// so-even, so-odd, sp, meixner). Every draw has exactly rank() points. The
// construction precomputes the orthonormal frame, so keep one sampler per
// spec when drawing many replicas.
class ProjectionSampler {
 public:
  explicit ProjectionSampler(const KernelSpec& spec);
  ~ProjectionSampler();
  ProjectionSampler(ProjectionSampler&&) noexcept;
  ProjectionSampler& operator=(ProjectionSampler&&) noexcept;

  PointConfiguration sample(RngStream& rng) const;
  int rank() const;
  const KernelSpec& spec() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

PointConfiguration sample_projection_dpp(const KernelSpec& spec,
                                         RngStream& rng);

// Delayed renewal process on [0, horizon]: a delay draw (stationary mode
// integrates the interval tail, zero-delay starts the sums at the origin)
// followed by cumulative i.i.d. interval draws. Continuous mode only.
PointConfiguration sample_renewal(const RenewalSpec& spec, double horizon,
                                  RngStream& rng);

// Young diagram plus its modified Frobenius coordinates (ascending; the
// negative values are -(column arm + 1/2), the positive ones row arm + 1/2).
struct PlancherelSample {
  std::vector<int> shape;         // row lengths, weakly decreasing
  std::vector<double> frobenius;  // half-integers, ascending
};

// n ~ Poisson(theta), then RSK row insertion applied to a uniform random
// permutation of n letters. theta is capped at 100.
PlancherelSample sample_plancherel_poissonized(double theta, RngStream& rng);

// Same construction with the permutation size fixed (conditional law).
PlancherelSample sample_plancherel_fixed(int n, RngStream& rng);

// Last-passage time over i.i.d. geometric site weights, P(a = k) = p q^k,
// by the standard dynamic-programming recursion. Requires M >= N >= 1.
int sample_last_passage(int M, int N, double q, RngStream& rng);

// One point per row, ordered; planar points emit both coordinates.
void write_points_csv(std::ostream& os, const PointConfiguration& config);

}  // namespace detfield
