#pragma once

// Matrix exponential by scaling-and-squaring with diagonal Pade
// approximants (orders 3/5/7/9/13 selected by the 1-norm).  Templated on
// the scalar so the same code serves real and complex matrices.

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace whmc::detail {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
double one_norm(const Mat<Scalar>& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

template <typename Scalar>
void pade_3(const Mat<Scalar>& a, const Mat<Scalar>& a2, Mat<Scalar>& u, Mat<Scalar>& v) {
  const double b[] = {120, 60, 12, 1};
  const auto n = a.rows();
  const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
  u = a * (b[3] * a2 + b[1] * id);
  v = b[2] * a2 + b[0] * id;
}

template <typename Scalar>
void pade_5(const Mat<Scalar>& a, const Mat<Scalar>& a2, const Mat<Scalar>& a4,
            Mat<Scalar>& u, Mat<Scalar>& v) {
  const double b[] = {30240, 15120, 3360, 420, 30, 1};
  const auto n = a.rows();
  const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
  u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Scalar>
void pade_7(const Mat<Scalar>& a, const Mat<Scalar>& a2, const Mat<Scalar>& a4,
            const Mat<Scalar>& a6, Mat<Scalar>& u, Mat<Scalar>& v) {
  const double b[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
  const auto n = a.rows();
  const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
  u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Scalar>
void pade_9(const Mat<Scalar>& a, const Mat<Scalar>& a2, const Mat<Scalar>& a4,
            const Mat<Scalar>& a6, Mat<Scalar>& u, Mat<Scalar>& v) {
  const double b[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                      2162160.,     110880.,     3960.,       90.,        1.};
  const auto n = a.rows();
  const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
  const Mat<Scalar> a8 = a6 * a2;
  u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

template <typename Scalar>
void pade_13(const Mat<Scalar>& a, const Mat<Scalar>& a2, const Mat<Scalar>& a4,
             const Mat<Scalar>& a6, Mat<Scalar>& u, Mat<Scalar>& v) {
  const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                      1187353796428800.,  129060195264000.,   10559470521600.,
                      670442572800.,      33522128640.,       1323241920.,
                      40840800.,          960960.,            16380.,
                      182.,               1.};
  const auto n = a.rows();
  const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
  u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
           b[3] * a2 + b[1] * id);
  v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
      b[2] * a2 + b[0] * id;
}

template <typename Scalar>
Mat<Scalar> expm(Mat<Scalar> a) {
  const auto n = a.rows();
  if (n == 0) return a;
  if (n == 1) {
    Mat<Scalar> r(1, 1);
    using std::exp;
    r(0, 0) = exp(a(0, 0));
    return r;
  }
  const double norm = one_norm(a);
  Mat<Scalar> u, v;
  int squarings = 0;
  if (norm < 1.495585217958292e-2) {
    const Mat<Scalar> a2 = a * a;
    pade_3(a, a2, u, v);
  } else if (norm < 2.539398330063230e-1) {
    const Mat<Scalar> a2 = a * a;
    const Mat<Scalar> a4 = a2 * a2;
    pade_5(a, a2, a4, u, v);
  } else if (norm < 9.504178996162932e-1) {
    const Mat<Scalar> a2 = a * a;
    const Mat<Scalar> a4 = a2 * a2;
    const Mat<Scalar> a6 = a4 * a2;
    pade_7(a, a2, a4, a6, u, v);
  } else if (norm < 2.097847961257068) {
    const Mat<Scalar> a2 = a * a;
    const Mat<Scalar> a4 = a2 * a2;
    const Mat<Scalar> a6 = a4 * a2;
    pade_9(a, a2, a4, a6, u, v);
  } else {
    const double theta13 = 5.371920351148152;
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    a /= std::pow(2.0, squarings);
    const Mat<Scalar> a2 = a * a;
    const Mat<Scalar> a4 = a2 * a2;
    const Mat<Scalar> a6 = a4 * a2;
    pade_13(a, a2, a4, a6, u, v);
  }
  // (v - u) x = (v + u)
  Mat<Scalar> r = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

}  // namespace whmc::detail
