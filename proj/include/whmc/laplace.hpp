#pragma once

// Numerical inversion of one- and multi-dimensional Laplace transforms.
//
// Two families:
//   * Gaver-Stehfest: real positive nodes only, so it applies to transforms
//     that can only be evaluated on (0,inf)^n.  The node weights involve
//     violent cancellation, hence exact integer binomials combined at a
//     configurable decimal precision (default 40 digits).
//   * Talbot: complex contour nodes; fast for transforms that admit an
//     analytic continuation off the right half-plane.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "whmc/types.hpp"

namespace whmc::laplace {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;
using BigFloat = boost::multiprecision::mpfr_float;

enum class Method { gaver_stehfest, talbot };

const char* to_string(Method m);

struct InversionConfig {
  Method method = Method::gaver_stehfest;
  int terms = 0;       // per dimension; 0 selects the method default
  int precision = 40;  // significant decimal digits for weight arithmetic
  double tolerance = 0;  // slack for [0,1] range flagging; 0 selects default
};

// Transform evaluated at real positive tuples.  `eval` runs at native double
// precision.  Closed-form transforms may also provide `eval_hp`, which is
// evaluated at the working precision of the weight arithmetic; without it,
// evaluator rounding puts a floor under the reachable accuracy that grows
// steeply with the term count.
struct RealTransform {
  int arity = 1;
  std::function<double(std::span<const double>)> eval;
  std::function<BigFloat(std::span<const BigFloat>)> eval_hp;
};

struct ComplexTransform {
  int arity = 1;
  std::function<std::complex<double>(std::span<const std::complex<double>>)> eval;
};

// Per-dimension default term counts: double evaluators sit just under their
// noise floor (which tightens with dimension); high-precision evaluators can
// afford more terms.
int default_terms(Method method, int arity, bool high_precision);
double default_tolerance(Method method);

// Level-m node weights: weight k (k = 0..m) equals
// m * C(2m, m) * (-1)^k * C(m, k), exact integers.  The log(2)/t scaling and
// the node positions (m+k) log(2)/t are applied at evaluation time.
std::vector<BigInt> gs_weights(int m);

// Combined per-node weights a_j (j = 1..2M) of the order-M accelerated
// scheme: the level sums for m = 1..M recombined with Salzer extrapolation
// coefficients (-1)^(M-m) m^M / (m! (M-m)!).  Exact rationals.
std::vector<BigRational> gs_combined_weights(int terms);

double gs_invert_1d(const RealTransform& f, double t, const InversionConfig& cfg);
double gs_invert_nd(const RealTransform& f, std::span<const double> t,
                    const InversionConfig& cfg);

double talbot_invert_1d(const ComplexTransform& f, double t, int terms);
double talbot_invert_2d(const ComplexTransform& f, double t1, double t2, int terms);

}  // namespace whmc::laplace
