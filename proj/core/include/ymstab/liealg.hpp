#pragma once

// Matrix Lie algebras so(r) and su(r) used as fibers of the adjoint bundle.
//
// Elements of su(r) are stored in their real 2r x 2r realification
// (a + ib  ->  [[a, -b], [b, a]]). The realification is an injective Lie
// algebra homomorphism, so brackets can be taken on real matrices for both
// kinds; only the inner product needs to know which kind it is looking at.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ymstab::liealg {

/// Dense real matrix with a fixed upper bound on its size; r <= 16 for so(r)
/// and r <= 8 for su(r) (stored realified).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 16, 16>;
using ComplexMat = Eigen::MatrixXcd;

enum class GroupKind { SpecialOrthogonal, SpecialUnitary };

struct StructureGroup {
  GroupKind kind = GroupKind::SpecialOrthogonal;
  int r = 2;

  static StructureGroup so(int r);
  static StructureGroup su(int r);

  /// Size of the real matrices that store elements (r for so, 2r for su).
  int matrix_size() const { return kind == GroupKind::SpecialOrthogonal ? r : 2 * r; }
  /// Dimension of the Lie algebra as a real vector space.
  int algebra_dim() const;
  /// Scale s such that <a,b> = s * sum_ij A_ij B_ij on the stored real matrices.
  double inner_scale() const { return kind == GroupKind::SpecialOrthogonal ? 0.5 : 0.25; }
  std::string name() const;

  friend bool operator==(const StructureGroup&, const StructureGroup&) = default;
};

class LieAlgebraElement {
 public:
  /// Zero element.
  explicit LieAlgebraElement(StructureGroup group);

  /// so(r) from a real matrix; the antisymmetric part is kept.
  static LieAlgebraElement from_real(StructureGroup group, const Eigen::MatrixXd& m);
  /// su(r) from a complex matrix; the traceless anti-Hermitian part is kept.
  static LieAlgebraElement from_complex(StructureGroup group, const ComplexMat& m);
  /// Wraps an already realified matrix without projection.
  static LieAlgebraElement from_storage(StructureGroup group, const Mat& stored);

  const StructureGroup& group() const { return group_; }
  const Mat& storage() const { return m_; }

  /// Entries as a complex r x r matrix (real for so(r)).
  ComplexMat entries() const;

  LieAlgebraElement operator+(const LieAlgebraElement& o) const;
  LieAlgebraElement operator-(const LieAlgebraElement& o) const;
  LieAlgebraElement operator*(double s) const;

  double norm() const;

 private:
  LieAlgebraElement(StructureGroup g, Mat m) : group_(g), m_(std::move(m)) {}

  StructureGroup group_;
  Mat m_;
};

/// ab - ba. Throws DimensionError on group mismatch.
LieAlgebraElement bracket(const LieAlgebraElement& a, const LieAlgebraElement& b);

/// 1/2 Re tr(a^H b).
double inner(const LieAlgebraElement& a, const LieAlgebraElement& b);

/// Deterministic random element for a seed; entries of the generating matrix
/// are uniform in [-1, 1].
LieAlgebraElement random_element(StructureGroup group, std::uint64_t seed);

/// Orthonormal basis (w.r.t. inner) of the algebra, in realified storage.
std::vector<Mat> orthonormal_basis(StructureGroup group);

/// e_ab = E_ab - E_ba in so(r).
LieAlgebraElement so_unit(int r, int a, int b);

// Raw-storage helpers used by the tensor layer on hot paths.
inline void bracket_into(const Mat& a, const Mat& b, Mat& out) { out.noalias() = a * b; out.noalias() -= b * a; }
double inner_raw(const StructureGroup& g, const double* a, const double* b);

}  // namespace ymstab::liealg
