#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace freegeom {

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RVector = Eigen::VectorXd;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

inline constexpr double kHermitianTol = 1e-12;

/// Normalized trace (1/n) Tr.
cplx tr_n(const CMatrix& a);

/// tr_n(a^* b), linear in the second slot.
cplx normalized_inner(const CMatrix& a, const CMatrix& b);

/// tr_n(a^* a).
double norm2_sq(const CMatrix& a);
double norm2(const CMatrix& a);

/// Normalized trace norm tr_n |a|.
double norm1(const CMatrix& a);

/// Operator norm (largest singular value).
double op_norm(const CMatrix& a);

/// max |a - a^*| over entries.
double hermitian_defect(const CMatrix& a);

CMatrix real_part(const CMatrix& a);  // (a + a^*)/2
CMatrix imag_part(const CMatrix& a);  // (a - a^*)/2i

class HermitianMatrix {
 public:
  struct Spectrum {
    RVector values;  // ascending
    CMatrix vectors; // columns are eigenvectors
  };

  HermitianMatrix() = default;

  /// Throws DomainError if `m` is not Hermitian within `tol` (absolute, entrywise).
  explicit HermitianMatrix(const CMatrix& m, double tol = kHermitianTol);

  /// Takes the Hermitian part without checking.
  static HermitianMatrix symmetrized(const CMatrix& m);
  static HermitianMatrix from_spectrum(const RVector& values, const CMatrix& vectors);
  static HermitianMatrix identity(int n);
  static HermitianMatrix zero(int n);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  operator const CMatrix&() const { return m_; }

  Spectrum spectrum() const;
  RVector eigenvalues() const;

 private:
  CMatrix m_;
};

class MatrixTuple {
 public:
  MatrixTuple() = default;
  MatrixTuple(int dim, std::vector<CMatrix> mats);

  static MatrixTuple zeros(int dim, int len);
  static MatrixTuple identity(int dim, int len);
  static MatrixTuple single(const CMatrix& m);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(mats_.size()); }
  bool empty() const { return mats_.empty(); }

  const CMatrix& operator[](int j) const { return mats_.at(static_cast<size_t>(j)); }
  const std::vector<CMatrix>& matrices() const { return mats_; }

  /// Replaces coordinate j, keeping the shape invariant.
  void set(int j, CMatrix m);
  void push_back(CMatrix m);

  bool is_hermitian(double tol = kHermitianTol) const;

  MatrixTuple operator+(const MatrixTuple& o) const;
  MatrixTuple operator-(const MatrixTuple& o) const;
  MatrixTuple operator*(double s) const;

 private:
  int dim_ = 1;
  std::vector<CMatrix> mats_;
};

cplx normalized_inner(const MatrixTuple& x, const MatrixTuple& y);
double norm2_sq(const MatrixTuple& x);
double norm2(const MatrixTuple& x);
/// Sum over coordinates of the normalized trace norm.
double norm1(const MatrixTuple& x);

inline double clamp_scalar(double t, double r) { return t < -r ? -r : (t > r ? r : t); }

/// F_R applied spectrally.
HermitianMatrix truncate_FR(const HermitianMatrix& x, double r);

/// F_R on real and imaginary parts of a single (possibly non-Hermitian) matrix.
CMatrix truncate_parts(const CMatrix& z, double r);
MatrixTuple tuple_truncate(const MatrixTuple& z, double r);

/// Closest point in the operator-norm ball of radius r (singular value clamp).
CMatrix project_op_ball(const CMatrix& x, double r);

struct LipschitzFunction {
  std::function<double(double)> f;
  double lipschitz = 0.0;
};

HermitianMatrix apply_function(const std::function<double(double)>& f, const HermitianMatrix& x);
HermitianMatrix apply_lipschitz(const LipschitzFunction& f, const HermitianMatrix& x);

/// Smooth cutoff: identity on [-r, r], +-2r - r^2/t outside.
double cutoff_g(double t, double r);
double cutoff_g_prime(double t, double r);
CMatrix cutoff_parts(const CMatrix& z, double r);
MatrixTuple cutoff_map_G(const MatrixTuple& x, double r);

/// Adjoint of the Frechet derivative of the spectral map f at a Hermitian matrix,
/// applied to a Hermitian direction g: U (D o (U^* g U)) U^* with D the divided differences.
CMatrix spectral_derivative_adjoint(const HermitianMatrix::Spectrum& spec,
                                    const std::function<double(double)>& f,
                                    const std::function<double(double)>& fprime,
                                    const CMatrix& g);

}  // namespace freegeom
