#include "freegeom/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace freegeom {

namespace {

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) throw ShapeError(std::string(what) + ": matrix is not square");
}

void require_same_shape(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("matrix shapes differ");
}

CMatrix hermitian_part(const CMatrix& a) { return (a + a.adjoint()) * 0.5; }

}  // namespace

cplx tr_n(const CMatrix& a) {
  require_square(a, "tr_n");
  if (a.rows() == 0) return 0.0;
  return a.trace() / static_cast<double>(a.rows());
}

cplx normalized_inner(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b);
  if (a.rows() == 0) return 0.0;
  // tr(a^* b) = sum conj(a_ij) b_ij
  cplx s = (a.conjugate().cwiseProduct(b)).sum();
  return s / static_cast<double>(a.rows());
}

double norm2_sq(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  return a.squaredNorm() / static_cast<double>(a.rows());
}

double norm2(const CMatrix& a) { return std::sqrt(norm2_sq(a)); }

double norm1(const CMatrix& a) {
  require_square(a, "norm1");
  if (a.rows() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues().sum() / static_cast<double>(a.rows());
}

double op_norm(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double hermitian_defect(const CMatrix& a) {
  require_square(a, "hermitian_defect");
  if (a.rows() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

CMatrix real_part(const CMatrix& a) { return hermitian_part(a); }

CMatrix imag_part(const CMatrix& a) { return (a - a.adjoint()) * cplx(0.0, -0.5); }

HermitianMatrix::HermitianMatrix(const CMatrix& m, double tol) {
  require_square(m, "HermitianMatrix");
  if (hermitian_defect(m) > tol) throw DomainError("matrix is not Hermitian");
  m_ = hermitian_part(m);
}

HermitianMatrix HermitianMatrix::symmetrized(const CMatrix& m) {
  require_square(m, "HermitianMatrix");
  HermitianMatrix h;
  h.m_ = hermitian_part(m);
  return h;
}

HermitianMatrix HermitianMatrix::from_spectrum(const RVector& values, const CMatrix& vectors) {
  if (vectors.rows() != vectors.cols() || vectors.cols() != values.size())
    throw ShapeError("spectrum and eigenvectors disagree");
  CMatrix m = vectors * values.cast<cplx>().asDiagonal() * vectors.adjoint();
  return symmetrized(m);
}

HermitianMatrix HermitianMatrix::identity(int n) {
  HermitianMatrix h;
  h.m_ = CMatrix::Identity(n, n);
  return h;
}

HermitianMatrix HermitianMatrix::zero(int n) {
  HermitianMatrix h;
  h.m_ = CMatrix::Zero(n, n);
  return h;
}

HermitianMatrix::Spectrum HermitianMatrix::spectrum() const {
  Spectrum s;
  if (dim() == 1) {
    s.values = RVector::Constant(1, m_(0, 0).real());
    s.vectors = CMatrix::Identity(1, 1);
    return s;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_);
  s.values = es.eigenvalues();
  s.vectors = es.eigenvectors();
  return s;
}

RVector HermitianMatrix::eigenvalues() const {
  if (dim() == 1) return RVector::Constant(1, m_(0, 0).real());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

MatrixTuple::MatrixTuple(int dim, std::vector<CMatrix> mats) : dim_(dim), mats_(std::move(mats)) {
  if (dim < 1) throw ShapeError("MatrixTuple dimension must be positive");
  for (const auto& m : mats_)
    if (m.rows() != dim || m.cols() != dim) throw ShapeError("MatrixTuple coordinate has wrong shape");
}

MatrixTuple MatrixTuple::zeros(int dim, int len) {
  return MatrixTuple(dim, std::vector<CMatrix>(static_cast<size_t>(len), CMatrix::Zero(dim, dim)));
}

MatrixTuple MatrixTuple::identity(int dim, int len) {
  return MatrixTuple(dim, std::vector<CMatrix>(static_cast<size_t>(len), CMatrix::Identity(dim, dim)));
}

MatrixTuple MatrixTuple::single(const CMatrix& m) {
  require_square(m, "MatrixTuple");
  return MatrixTuple(static_cast<int>(m.rows()), {m});
}

void MatrixTuple::set(int j, CMatrix m) {
  if (m.rows() != dim_ || m.cols() != dim_) throw ShapeError("MatrixTuple coordinate has wrong shape");
  mats_.at(static_cast<size_t>(j)) = std::move(m);
}

void MatrixTuple::push_back(CMatrix m) {
  if (m.rows() != dim_ || m.cols() != dim_) throw ShapeError("MatrixTuple coordinate has wrong shape");
  mats_.push_back(std::move(m));
}

bool MatrixTuple::is_hermitian(double tol) const {
  return std::all_of(mats_.begin(), mats_.end(),
                     [tol](const CMatrix& m) { return hermitian_defect(m) <= tol; });
}

namespace {
void require_compatible(const MatrixTuple& x, const MatrixTuple& y) {
  if (x.dim() != y.dim() || x.size() != y.size()) throw ShapeError("tuple shapes differ");
}
}  // namespace

MatrixTuple MatrixTuple::operator+(const MatrixTuple& o) const {
  require_compatible(*this, o);
  MatrixTuple r = *this;
  for (size_t j = 0; j < mats_.size(); ++j) r.mats_[j] += o.mats_[j];
  return r;
}

MatrixTuple MatrixTuple::operator-(const MatrixTuple& o) const {
  require_compatible(*this, o);
  MatrixTuple r = *this;
  for (size_t j = 0; j < mats_.size(); ++j) r.mats_[j] -= o.mats_[j];
  return r;
}

MatrixTuple MatrixTuple::operator*(double s) const {
  MatrixTuple r = *this;
  for (auto& m : r.mats_) m *= s;
  return r;
}

cplx normalized_inner(const MatrixTuple& x, const MatrixTuple& y) {
  require_compatible(x, y);
  cplx s = 0.0;
  for (int j = 0; j < x.size(); ++j) s += normalized_inner(x[j], y[j]);
  return s;
}

double norm2_sq(const MatrixTuple& x) {
  double s = 0.0;
  for (int j = 0; j < x.size(); ++j) s += norm2_sq(x[j]);
  return s;
}

double norm2(const MatrixTuple& x) { return std::sqrt(norm2_sq(x)); }

double norm1(const MatrixTuple& x) {
  double s = 0.0;
  for (int j = 0; j < x.size(); ++j) s += norm1(x[j]);
  return s;
}

HermitianMatrix apply_function(const std::function<double(double)>& f, const HermitianMatrix& x) {
  auto s = x.spectrum();
  RVector v = s.values.unaryExpr(f);
  return HermitianMatrix::from_spectrum(v, s.vectors);
}

HermitianMatrix apply_lipschitz(const LipschitzFunction& f, const HermitianMatrix& x) {
  return apply_function(f.f, x);
}

HermitianMatrix truncate_FR(const HermitianMatrix& x, double r) {
  if (!(r > 0.0)) throw DomainError("truncation radius must be positive");
  auto s = x.spectrum();
  if (s.values.size() == 0) return x;
  if (s.values(0) >= -r && s.values(s.values.size() - 1) <= r) return x;
  RVector v = s.values.unaryExpr([r](double t) { return clamp_scalar(t, r); });
  return HermitianMatrix::from_spectrum(v, s.vectors);
}

CMatrix truncate_parts(const CMatrix& z, double r) {
  require_square(z, "truncate_parts");
  auto re = truncate_FR(HermitianMatrix::symmetrized(z), r);
  auto im = truncate_FR(HermitianMatrix::symmetrized(imag_part(z)), r);
  return re.matrix() + cplx(0.0, 1.0) * im.matrix();
}

MatrixTuple tuple_truncate(const MatrixTuple& z, double r) {
  std::vector<CMatrix> out;
  out.reserve(static_cast<size_t>(z.size()));
  for (int j = 0; j < z.size(); ++j) out.push_back(truncate_parts(z[j], r));
  return MatrixTuple(z.dim(), std::move(out));
}

CMatrix project_op_ball(const CMatrix& x, double r) {
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  if (x.rows() == 1) {
    double a = std::abs(x(0, 0));
    if (a <= r) return x;
    return x * (r / a);
  }
  Eigen::JacobiSVD<CMatrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= r) return x;
  RVector c = sv.cwiseMin(r);
  return svd.matrixU() * c.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
}

double cutoff_g(double t, double r) {
  if (t > r) return 2.0 * r - r * r / t;
  if (t < -r) return -2.0 * r - r * r / t;
  return t;
}

double cutoff_g_prime(double t, double r) {
  double a = std::max(std::abs(t), r);
  return r * r / (a * a);
}

CMatrix cutoff_parts(const CMatrix& z, double r) {
  require_square(z, "cutoff_parts");
  auto g = [r](double t) { return cutoff_g(t, r); };
  auto re = apply_function(g, HermitianMatrix::symmetrized(z));
  auto im = apply_function(g, HermitianMatrix::symmetrized(imag_part(z)));
  return re.matrix() + cplx(0.0, 1.0) * im.matrix();
}

MatrixTuple cutoff_map_G(const MatrixTuple& x, double r) {
  if (!(r > 0.0)) throw DomainError("cutoff radius must be positive");
  std::vector<CMatrix> out;
  for (int j = 0; j < x.size(); ++j) out.push_back(cutoff_parts(x[j], r));
  return MatrixTuple(x.dim(), std::move(out));
}

CMatrix spectral_derivative_adjoint(const HermitianMatrix::Spectrum& spec,
                                    const std::function<double(double)>& f,
                                    const std::function<double(double)>& fprime,
                                    const CMatrix& g) {
  const auto n = spec.values.size();
  CMatrix inner = spec.vectors.adjoint() * g * spec.vectors;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double li = spec.values(i), lj = spec.values(j);
      double d;
      if (std::abs(li - lj) <= 1e-12 * (1.0 + std::abs(li)))
        d = fprime(0.5 * (li + lj));
      else
        d = (f(li) - f(lj)) / (li - lj);
      inner(i, j) *= d;
    }
  }
  return spec.vectors * inner * spec.vectors.adjoint();
}

}  // namespace freegeom
