#include "whmc/laplace.hpp"

#include <cmath>
#include <numbers>

namespace whmc::laplace {

namespace {

BigInt binomial(int n, int k) {
  BigInt r = 1;
  for (int i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;
  }
  return r;
}

// Restores the thread's mpfr working precision on scope exit.
class PrecisionGuard {
public:
  explicit PrecisionGuard(int digits10) : old_(BigFloat::default_precision()) {
    BigFloat::default_precision(static_cast<unsigned>(digits10));
  }
  ~PrecisionGuard() { BigFloat::default_precision(old_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
  unsigned old_;
};

void check_gs_config(const InversionConfig& cfg) {
  if (cfg.terms < 0) throw_usage("inversion: terms must be >= 1");
  if (cfg.precision < 16)
    throw_usage("inversion: gaver-stehfest requires precision >= 16 digits");
}

int gs_terms(const InversionConfig& cfg, int arity, bool hp) {
  return cfg.terms > 0 ? cfg.terms
                       : default_terms(Method::gaver_stehfest, arity, hp);
}

}  // namespace

const char* to_string(Method m) {
  return m == Method::gaver_stehfest ? "gaver-stehfest" : "talbot";
}

int default_terms(Method method, int arity, bool high_precision) {
  if (method == Method::talbot) return 32;
  if (high_precision) return 12;
  return arity <= 1 ? 7 : 6;
}

double default_tolerance(Method method) {
  return method == Method::gaver_stehfest ? 2e-3 : 1e-6;
}

std::vector<BigInt> gs_weights(int m) {
  if (m < 1) throw_usage("gs_weights: level must be >= 1");
  std::vector<BigInt> w(m + 1);
  const BigInt scale = m * binomial(2 * m, m);
  for (int k = 0; k <= m; ++k) {
    w[k] = scale * binomial(m, k);
    if (k % 2 == 1) w[k] = -w[k];
  }
  return w;
}

std::vector<BigRational> gs_combined_weights(int terms) {
  const int big_m = terms;
  std::vector<BigRational> a(2 * big_m + 1);  // index j = 1..2M
  BigInt m_fact = 1;  // m!
  for (int m = 1; m <= big_m; ++m) {
    m_fact *= m;
    // Salzer coefficient (-1)^(M-m) m^M / (m! (M-m)!)
    BigInt num = 1;
    for (int i = 0; i < big_m; ++i) num *= m;
    if ((big_m - m) % 2 == 1) num = -num;
    BigInt mm_fact = 1;  // (M-m)!
    for (int i = 2; i <= big_m - m; ++i) mm_fact *= i;
    const BigRational salzer(num, m_fact * mm_fact);
    const auto level = gs_weights(m);
    for (int k = 0; k <= m; ++k) a[m + k] += salzer * level[k];
  }
  a.erase(a.begin());
  return a;
}

double gs_invert_1d(const RealTransform& f, double t, const InversionConfig& cfg) {
  if (f.arity != 1) throw_usage("gs_invert_1d: transform arity must be 1");
  return gs_invert_nd(f, std::span<const double>(&t, 1), cfg);
}

double gs_invert_nd(const RealTransform& f, std::span<const double> t,
                    const InversionConfig& cfg) {
  check_gs_config(cfg);
  const int arity = static_cast<int>(t.size());
  if (f.arity != arity) throw_usage("gs_invert_nd: arity mismatch");
  for (double tk : t)
    if (!(tk > 0)) throw_usage("gs_invert_nd: every t must be positive");

  const bool hp = static_cast<bool>(f.eval_hp);
  const int terms = gs_terms(cfg, arity, hp);
  const int nodes = 2 * terms;

  PrecisionGuard guard(cfg.precision);
  const BigFloat ln2 = boost::multiprecision::log(BigFloat(2));

  // convert exact rationals via numerator/denominator (the direct
  // rational->mpfr construction truncates in the boost version shipped here)
  const auto rational = gs_combined_weights(terms);
  std::vector<BigFloat> weight(rational.size());
  for (std::size_t j = 0; j < rational.size(); ++j)
    weight[j] = BigFloat(boost::multiprecision::numerator(rational[j])) /
                BigFloat(boost::multiprecision::denominator(rational[j]));

  // Node coordinates per dimension, j = 1..2M, at both precisions.
  std::vector<std::vector<BigFloat>> node_hp(arity);
  std::vector<std::vector<double>> node_d(arity);
  for (int d = 0; d < arity; ++d) {
    node_hp[d].resize(nodes);
    node_d[d].resize(nodes);
    for (int j = 1; j <= nodes; ++j) {
      node_hp[d][j - 1] = j * ln2 / t[d];
      node_d[d][j - 1] = static_cast<double>(j) * std::numbers::ln2 / t[d];
    }
  }

  // Tensor sum over the node grid, dimension 1 outermost, ascending node
  // index inside: a fixed order so results are reproducible bit for bit.
  std::vector<int> idx(arity, 0);
  std::vector<BigFloat> q_hp(arity);
  std::vector<double> q_d(arity);
  BigFloat total = 0;
  for (;;) {
    BigFloat w = 1;
    for (int d = 0; d < arity; ++d) w *= weight[idx[d]];
    if (hp) {
      for (int d = 0; d < arity; ++d) q_hp[d] = node_hp[d][idx[d]];
      total += w * f.eval_hp(q_hp);
    } else {
      for (int d = 0; d < arity; ++d) q_d[d] = node_d[d][idx[d]];
      total += w * BigFloat(f.eval(q_d));
    }
    int d = arity - 1;
    while (d >= 0 && ++idx[d] == nodes) idx[d--] = 0;
    if (d < 0) break;
  }
  for (int d = 0; d < arity; ++d) total *= ln2 / t[d];
  return total.convert_to<double>();
}

namespace {

struct TalbotNodes {
  std::vector<std::complex<double>> delta;
  std::vector<std::complex<double>> gamma;
};

// delta_0 = 2M/5, delta_k = (2 k pi / 5)(cot(k pi / M) + i);
// gamma_0 = e^{delta_0}/2,
// gamma_k = (1 + i (k pi / M)(1 + cot^2) - i cot) e^{delta_k}.
TalbotNodes talbot_nodes(int terms) {
  if (terms < 1) throw_usage("talbot: terms must be >= 1");
  TalbotNodes n;
  n.delta.resize(terms);
  n.gamma.resize(terms);
  n.delta[0] = {2.0 * terms / 5.0, 0.0};
  n.gamma[0] = 0.5 * std::exp(n.delta[0]);
  for (int k = 1; k < terms; ++k) {
    const double theta = std::numbers::pi * k / terms;
    const double cot = std::cos(theta) / std::sin(theta);
    n.delta[k] = 2.0 * std::numbers::pi * k / 5.0 * std::complex<double>(cot, 1.0);
    const std::complex<double> pre(
        1.0, std::numbers::pi * k / terms * (1.0 + cot * cot) - cot);
    n.gamma[k] = pre * std::exp(n.delta[k]);
  }
  return n;
}

}  // namespace

double talbot_invert_1d(const ComplexTransform& f, double t, int terms) {
  if (f.arity != 1) throw_usage("talbot_invert_1d: transform arity must be 1");
  if (!(t > 0)) throw_usage("talbot_invert_1d: t must be positive");
  const auto n = talbot_nodes(terms);
  double sum = 0;
  std::complex<double> q;
  for (int k = 0; k < terms; ++k) {
    q = n.delta[k] / t;
    sum += (n.gamma[k] * f.eval(std::span<const std::complex<double>>(&q, 1))).real();
  }
  return 2.0 / (5.0 * t) * sum;
}

double talbot_invert_2d(const ComplexTransform& f, double t1, double t2, int terms) {
  if (f.arity != 2) throw_usage("talbot_invert_2d: transform arity must be 2");
  if (!(t1 > 0) || !(t2 > 0)) throw_usage("talbot_invert_2d: t must be positive");
  const auto n = talbot_nodes(terms);
  double sum = 0;
  std::complex<double> q[2];
  for (int k1 = 0; k1 < terms; ++k1) {
    q[0] = n.delta[k1] / t1;
    std::complex<double> inner = 0;
    for (int k2 = 0; k2 < terms; ++k2) {
      q[1] = n.delta[k2] / t2;
      inner += n.gamma[k2] * f.eval(std::span<const std::complex<double>>(q, 2));
      q[1] = std::conj(n.delta[k2]) / t2;
      inner += std::conj(n.gamma[k2]) * f.eval(std::span<const std::complex<double>>(q, 2));
    }
    sum += (n.gamma[k1] * inner).real();
  }
  return 2.0 / (25.0 * t1 * t2) * sum;
}

}  // namespace whmc::laplace
