#pragma once

// First-passage factorization machinery.
//
// For a single conservative generator G, drift partition (E+, E-) and
// killing rate c > 0 there is a unique quadruple (Lambda+, Lambda-, G+, G-)
// with sub-probability Lambda blocks and sub-generator G blocks satisfying
//
//   V^{-1}(G - cI) [ I+  Lambda- ;  Lambda+  I- ]
//       = [ I+  Lambda- ;  Lambda+  I- ] [ G+  0 ;  0  -G- ].
//
// Lambda+ collects the discounted law of the state occupied at the first
// upcrossing of level 0 from a down-drift start; e^{tG+} does the same for
// upcrossings of level t from an up-drift start.  The level-augmented chain
// built from a piecewise-constant schedule inherits the identity blockwise,
// which is what block_factorize exploits: diagonal blocks come from
// single-generator factorizations with level-shifted killing rates, and the
// off-diagonal blocks solve small linear systems tied together one
// superdiagonal at a time.

#include <complex>
#include <span>
#include <vector>

#include "whmc/chain.hpp"
#include "whmc/laplace.hpp"
#include "whmc/types.hpp"

namespace whmc::wh {

struct WHQuadruple {
  Matrix lambda_plus;   // |E-| x |E+|, sub-probability rows
  Matrix lambda_minus;  // |E+| x |E-|, sub-probability rows
  Matrix g_plus;        // |E+| x |E+|, sub-generator
  Matrix g_minus;       // |E-| x |E-|, sub-generator
  double killing = 0;
};

// Invariant subspaces of V^{-1}(G - cI) split by the sign of the eigenvalue
// real parts.  For conservative G and c > 0 the split is exactly
// (|E+| negative, |E-| positive) and never touches the imaginary axis.
struct SpectralSplit {
  Eigen::VectorXcd eigenvalues;
  Matrix basis_plus;   // |E| x |E+|, Re < 0 invariant subspace
  Matrix head_plus;    // quasi-triangular restriction to basis_plus
  Matrix basis_minus;  // |E| x |E-|, Re > 0 invariant subspace
  Matrix head_minus;
};

SpectralSplit spectral_split(const Matrix& q_matrix, int n_plus, int n_minus,
                             double axis_margin = 1e-9);

WHQuadruple classical_factorize(const Matrix& g, const chain::DriftModel& drift,
                                double c);

// 2x2 case via the quadratic each row of the identity reduces to; the root
// in [0,1] is the crossing transform.  Errors out when no root (or more than
// one) lies in [0,1].
WHQuadruple scalar_factorize(const Matrix& g, const chain::DriftModel& drift,
                             double c);

// Max-norm of the factorization identity defect, assembled sign-major.
double factorization_residual(const Matrix& g, const chain::DriftModel& drift,
                              double c, const WHQuadruple& quad);

// Upper-triangular level-block arrays (Lambda+_{kl}, G+_{kl}) of the
// augmented chain's factorization, 0 <= k <= l <= n.
class BlockFactorization {
public:
  BlockFactorization(chain::DriftModel drift, double c, std::vector<double> rates);

  int levels() const { return static_cast<int>(rates_.size()) + 1; }
  double killing() const { return c_; }
  const std::vector<double>& rates() const { return rates_; }
  const chain::DriftModel& drift() const { return drift_; }
  // killing rate of the level-k diagonal factorization: q_{k+1} + c,
  // except the last level which carries no randomization clock.
  double shifted_killing(int k) const;

  const Matrix& lambda(int k, int l) const { return lambda_[index(k, l)]; }
  Matrix& lambda(int k, int l) { return lambda_[index(k, l)]; }
  const Matrix& g(int k, int l) const { return g_[index(k, l)]; }
  Matrix& g(int k, int l) { return g_[index(k, l)]; }

  Matrix assembled_lambda() const;  // (n+1)|E-| x (n+1)|E+|
  Matrix assembled_g() const;       // (n+1)|E+| x (n+1)|E+|

private:
  int index(int k, int l) const;

  chain::DriftModel drift_;
  double c_;
  std::vector<double> rates_;
  std::vector<Matrix> lambda_, g_;
};

// Fill the block arrays recursively: single-generator factorizations on the
// diagonal, then one superdiagonal at a time via vectorized linear solves.
BlockFactorization block_factorize(const chain::RegimeSchedule& schedule,
                                   const chain::DriftModel& drift, double c,
                                   std::span<const double> q);

// Factorize the full augmented generator in one shot and re-partition into
// level blocks.  Cross-check oracle for block_factorize (the quadruple is
// unique).
BlockFactorization direct_augmented_factorize(const chain::RegimeSchedule& schedule,
                                              const chain::DriftModel& drift, double c,
                                              std::span<const double> q);

// Defect of the first block column of the augmented factorization identity,
// which involves only the plus-side arrays.
double augmented_residual_plus(const chain::RegimeSchedule& schedule,
                               const chain::DriftModel& drift, double c,
                               std::span<const double> q,
                               const BlockFactorization& block);

// Level-summed transform values at the rate tuple embedded in the block
// factorization.  i and j are global state indices.
double hat_pi_plus(const BlockFactorization& block, int i, int j);
double hat_psi_plus(const BlockFactorization& block, double t, int i, int j);

// Closed-form transform of the two-state case, extended to complex rate
// arguments by tracking the physical quadratic root from a real anchor.
// This is what makes Talbot inversion available when |E+| = |E-| = 1.
class ScalarTransform {
public:
  ScalarTransform(const chain::RegimeSchedule& schedule,
                  const chain::DriftModel& drift, double c);

  std::complex<double> hat_pi(std::span<const std::complex<double>> q) const;
  std::complex<double> hat_psi(double t, std::span<const std::complex<double>> q) const;

private:
  struct Regime {
    double a, b, c, d;  // sign-major 2x2 entries: [a b; c d] = [E+>E+ E+>E-; ...]
  };
  struct Recursion;

  std::complex<double> lambda_plus(int regime, std::complex<double> ck) const;
  Recursion run(std::span<const std::complex<double>> q) const;

  std::vector<Regime> regimes_;
  double vp_ = 0, vm_ = 0, c_ = 0;
};

struct FunctionalValue {
  FunctionalKind kind;
  std::string from_state, to_state;
  double level_time = 0;  // Psi only
  double value = 0;
  // diagnostics
  laplace::Method method = laplace::Method::gaver_stehfest;
  int terms = 0;
  double residual = 0;   // worst factorization residual over transform nodes
  double tolerance = 0;  // [0,1] flagging slack of the inversion
  bool flagged = false;  // value outside [0,1] beyond tolerance
};

FunctionalValue pi_plus(const chain::RegimeSchedule& schedule,
                        const chain::DriftModel& drift, double c, int i, int j,
                        const laplace::InversionConfig& inv);
FunctionalValue psi_plus(const chain::RegimeSchedule& schedule,
                         const chain::DriftModel& drift, double c, double t, int i,
                         int j, const laplace::InversionConfig& inv);
FunctionalValue pi_minus(const chain::RegimeSchedule& schedule,
                         const chain::DriftModel& drift, double c, int i, int j,
                         const laplace::InversionConfig& inv);
FunctionalValue psi_minus(const chain::RegimeSchedule& schedule,
                          const chain::DriftModel& drift, double c, double t, int i,
                          int j, const laplace::InversionConfig& inv);

}  // namespace whmc::wh
