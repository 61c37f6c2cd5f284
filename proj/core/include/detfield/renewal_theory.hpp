#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "detfield/kernel_zoo.hpp"

namespace detfield {

enum class RenewalMode { kContinuous, kDiscrete };
enum class DelayMode { kStationary, kZeroDelay };

// Interarrival law of a renewal process. Continuous mode tabulates the
// density on the uniform grid {0, step, 2*step, ...}; discrete mode holds a
// probability vector on {0, 1, 2, ...} (step fixed at 1).
struct RenewalSpec {
  RenewalMode mode = RenewalMode::kContinuous;
  DelayMode delay = DelayMode::kStationary;
  double step = 0.0;
  std::vector<double> density;

  double x_max() const { return step * (density.size() - 1); }
  double total() const;  // composite Simpson (continuous) or plain sum
  double mean() const;
};

// Rejects negative mass, totals off 1 by more than 1e-8, or a degenerate
// grid.
void validate(const RenewalSpec& spec);

// Uniformly tabulated function with local cubic interpolation; clamps to the
// final value beyond the table and to zero for negative arguments.
struct TabulatedFunction {
  double step = 0.0;
  std::vector<double> values;

  double at(double x) const;
};

// Interval density of the field with kernel rho*exp(-|x-y|/alpha):
// f(x) = 2 rho (1-2 rho alpha)^{-1/2} exp(-x/alpha) sinh(sqrt(1-2 rho
// alpha) x/alpha), including the analytic boundary limit at 2 rho alpha = 1.
// Grid: step min(alpha, 1/rho)/200 up to 30/rho.
RenewalSpec macchi_interval_density(double rho, double alpha);

// Closed-form CDF of the same density (exact, for oracles and KS tests).
double macchi_interval_cdf(double rho, double alpha, double x);

// Renewal density read off a kernel: u(x2-x1) = K(x2,x2) -
// K(x1,x2)K(x2,x1)/K(x1,x1). Requires x2 >= x1 and a positive diagonal.
double renewal_density_from_kernel(const KernelSpec& spec, double x1,
                                   double x2);

// Two characterization conditions for i.i.d. spacings. For each ordered
// triple (x1,x2,x3): (a) the factorization residual
// |K(x1,x2)K(x2,x3) - K(x1,x3)K(x2,x2)|; (b) translation dependence of the
// renewal density, |u(x1, x1+g) - u(x2, x2+g)| with g = x3-x2. Both maxima
// must stay below 1e-9 to pass.
struct SpacingConditionReport {
  double cond_a_max_violation = 0.0;
  double cond_b_max_violation = 0.0;
  bool passes = false;
};
SpacingConditionReport check_iid_spacing_conditions(
    const KernelSpec& spec,
    const std::vector<std::array<double, 3>>& test_triples);

// Renewal density u = sum_k f^{*k} by convolution-series accumulation on
// the spec's grid, stopped when the sup-norm increment falls below 1e-10.
TabulatedFunction renewal_u_series(const RenewalSpec& spec);

// Inverts u = f + u*f for the interval density by forward substitution
// (trapezoid rule in continuous mode, exact recursion in discrete mode).
RenewalSpec solve_convolution(const std::vector<double>& u, double step,
                              RenewalMode mode);

// Correlation product rho_k(t1..tk) = rho1 * u(t2-t1) * ... * u(tk-t_{k-1})
// for ascending points; the overload taking a spec recomputes the series.
double renewal_correlations(const TabulatedFunction& u, double rho1,
                            const std::vector<double>& points);
double renewal_correlations(const RenewalSpec& spec, double rho1,
                            const std::vector<double>& points);

// Two-column CSV (x, f). Reading checks a uniform grid.
void write_renewal_csv(std::ostream& os, const RenewalSpec& spec);
RenewalSpec read_renewal_csv(std::istream& is, RenewalMode mode,
                             DelayMode delay);

}  // namespace detfield
