#include "qeflab/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "qeflab/error.hpp"

namespace qeflab {
namespace {

// Higham (2005) degree-13 coefficients and the matching 1-norm bound.
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

template <typename M>
MatrixFunctionResult<M> pade_exp(const M& x) {
  if (x.rows() != x.cols()) fail(ErrorCode::InvalidArgument, "matrix_exp needs a square matrix");
  if (!x.allFinite()) fail(ErrorCode::NonFinite, "matrix_exp input has non-finite entries");
  const Eigen::Index n = x.rows();
  MatrixFunctionResult<M> out;
  if (n == 0) {
    out.value = x;
    return out;
  }
  const double norm1 = x.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > kTheta13) s = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const M a = x / std::ldexp(1.0, s);
  const M ident = M::Identity(n, n);
  const M a2 = a * a;
  const M a4 = a2 * a2;
  const M a6 = a4 * a2;
  const auto& b = kPade13;
  const M u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                    b[5] * a4 + b[3] * a2 + b[1] * ident;
  const M u = a * u_inner;
  const M v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
              b[4] * a4 + b[2] * a2 + b[0] * ident;
  M r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) r = (r * r).eval();
  out.value = std::move(r);
  out.scaling_squarings = s;
  return out;
}

template <typename M>
double rcond_impl(const M& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<M> svd(x);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  if (!(smax > 0.0)) return 0.0;
  return sv(sv.size() - 1) / smax;
}

}  // namespace

MatrixFunctionResult<Matrix> matrix_exp(const Matrix& x) { return pade_exp(x); }
MatrixFunctionResult<CMatrix> matrix_exp(const CMatrix& x) { return pade_exp(x); }

std::pair<CMatrix, CMatrix> exp_and_integral(const CMatrix& x, double t) {
  const Eigen::Index n = x.rows();
  CMatrix aug = CMatrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = x * t;
  aug.topRightCorner(n, n) = CMatrix::Identity(n, n) * t;
  const CMatrix e = matrix_exp(aug).value;
  return {e.topLeftCorner(n, n), e.topRightCorner(n, n)};
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n)
    fail(ErrorCode::InvalidArgument, "Lyapunov operands must be square and conformant");
  if (n == 0) return Matrix(0, 0);

  Eigen::ComplexSchur<CMatrix> schur(a.cast<Complex>());
  const CMatrix& t = schur.matrixT();
  const CMatrix& z = schur.matrixU();
  // T Y + Y Tᴴ = -Zᴴ Q Z with Y = Zᴴ X Z; columns from last to first.
  const CMatrix c = -(z.adjoint() * q.cast<Complex>() * z);
  CMatrix y = CMatrix::Zero(n, n);
  const double scale = std::max(1.0, a.norm());
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    CVector rhs = c.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(t(j, k)) * y.col(k);
    const Complex shift = std::conj(t(j, j));
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      Complex acc = rhs(i);
      for (Eigen::Index k = i + 1; k < n; ++k) acc -= t(i, k) * y(k, j);
      const Complex pivot = t(i, i) + shift;
      if (std::abs(pivot) < 1e-13 * scale)
        fail(ErrorCode::LyapunovSolveFailed,
             "eigenvalues of A sum to (numerically) zero; the equation is singular");
      y(i, j) = acc / pivot;
    }
  }
  const CMatrix x = z * y * z.adjoint();
  return x.real();
}

double rcond(const Matrix& x) { return rcond_impl(x); }
double rcond(const CMatrix& x) { return rcond_impl(x); }

LogDet log_det(const CMatrix& x) {
  LogDet out;
  if (x.rows() == 0) return out;
  Eigen::PartialPivLU<CMatrix> lu(x);
  const CMatrix& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const Complex d = packed(i, i);
    const double mag = std::abs(d);
    if (mag == 0.0) {
      out.log_abs = -std::numeric_limits<double>::infinity();
      return out;
    }
    out.log_abs += std::log(mag);
    out.phase *= d / mag;
  }
  out.phase *= static_cast<double>(lu.permutationP().determinant());
  return out;
}

Matrix symplectic_unit() {
  Matrix j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

Matrix canonical_j(int m) {
  if (m <= 0 || m % 2 != 0) fail(ErrorCode::InvalidArgument, "field dimension must be even and positive");
  const int h = m / 2;
  Matrix j = Matrix::Zero(m, m);
  j.topRightCorner(h, h) = Matrix::Identity(h, h);
  j.bottomLeftCorner(h, h) = -Matrix::Identity(h, h);
  return j;
}

Matrix psd_sqrt(const Matrix& x, double clip, bool* ok) {
  if (ok) *ok = true;
  if (x.rows() == 0) return x;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (x + x.transpose()));
  Vector ev = eig.eigenvalues();
  const double top = std::max(0.0, ev.maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0) {
      if (ev(i) < -clip * std::max(top, 1e-300) && ok) *ok = false;
      ev(i) = 0.0;
    }
  }
  const Matrix& v = eig.eigenvectors();
  return v * ev.cwiseSqrt().asDiagonal() * v.transpose();
}

}  // namespace qeflab
