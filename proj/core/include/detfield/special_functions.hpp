#pragma once

#include <span>
#include <variant>
#include <vector>

namespace detfield {

// Orthonormal systems as used by the kernel catalog. All continuous families
// fold the square root of their weight into the function, so the returned
// values are orthonormal with respect to plain Lebesgue (or counting) measure.
struct HermiteFamily {};                    // weight e^{-x^2} on R
struct LaguerreFamily { double alpha; };    // weight e^{-x} x^alpha on (0, inf)
struct MeixnerFamily { double q; int K; };  // weight C(x+K-1, x) q^x on {0,1,...}

using OrthonormalFamily = std::variant<HermiteFamily, LaguerreFamily, MeixnerFamily>;

inline constexpr int kHermiteMaxDegree = 512;
inline constexpr int kLaguerreMaxDegree = 512;
inline constexpr int kMeixnerMaxDegree = 48;

// Degree-ell orthonormal function at x (weight factor included).
double eval_orthonormal(const OrthonormalFamily& fam, int ell, double x);

// All degrees 0..ell_max at once; out must have ell_max+1 slots. One recurrence
// pass, which is what kernel evaluation and the samplers want.
void eval_orthonormal_all(const OrthonormalFamily& fam, int ell_max, double x,
                          std::span<double> out);

double hermite_function(int ell, double x);
double laguerre_function(int ell, double alpha, double x);

// Oscillator recurrence built from the lattice weight. Recurrence
// coefficients are accumulated in exact rational arithmetic when q is a small
// dyadic rational and the degree is modest, otherwise in extended precision;
// plain double Gram-Schmidt loses orthogonality well below the supported cap.
class MeixnerSystem {
 public:
  MeixnerSystem(double q, int K, int max_degree);

  double function(int ell, double x) const;  // includes sqrt(weight)
  void function_all(int ell_max, double x, std::span<double> out) const;
  double weight(double x) const;             // x must be a non-negative integer
  double log_weight(double x) const;
  int max_degree() const { return static_cast<int>(a_.size()); }
  double q() const { return q_; }
  int K() const { return K_; }
  bool exact_construction() const { return exact_; }

 private:
  std::vector<double> a_;       // a_0 .. a_{d-1}
  std::vector<double> sqrt_b_;  // sqrt(b_1) .. sqrt(b_d)
  double inv_sqrt_m0_ = 0;
  double q_ = 0;
  int K_ = 0;
  bool exact_ = false;
};

// Shared, thread-safe cache keyed by (q, K); grown on demand up to the cap.
const MeixnerSystem& meixner_system(double q, int K, int min_degree);

// Bessel functions of integer order, downward (Miller) recurrence normalised
// by the even-order sum rule. x must be >= 0.
double bessel_j(int order, double x);
void bessel_j_all(int max_order, double x, std::span<double> out);

// Order m + 1/2 for m >= -1, Miller recurrence anchored on the closed forms
// at orders +-1/2 (whichever is better conditioned at x).
double bessel_j_half(int m, double x);

// Airy function on the supported window [-8, 50]: Maclaurin series up to 8,
// a decaying-contour quadrature beyond. Values below -8 are rejected.
double airy_ai(double x);
double airy_ai_prime(double x);

inline constexpr double kAiryWindowLo = -8.0;
inline constexpr double kAiryWindowHi = 50.0;

}  // namespace detfield
