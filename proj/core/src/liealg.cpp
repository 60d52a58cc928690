#include "ymstab/liealg.hpp"

#include "ymstab/errors.hpp"

#include <random>

namespace ymstab::liealg {
namespace {

void check_size(const StructureGroup& g) {
  if (g.r < 2) throw ParameterError("structure group needs r >= 2, got " + std::to_string(g.r));
  if (g.matrix_size() > 16) throw ParameterError("matrix size above 16 is not supported: " + g.name());
}

Mat realify(const ComplexMat& c) {
  const auto r = c.rows();
  Mat m(2 * r, 2 * r);
  m.topLeftCorner(r, r) = c.real();
  m.topRightCorner(r, r) = -c.imag();
  m.bottomLeftCorner(r, r) = c.imag();
  m.bottomRightCorner(r, r) = c.real();
  return m;
}

ComplexMat complexify(const Mat& m, int r) {
  ComplexMat c(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) c(i, j) = {m(i, j), m(r + i, j)};
  return c;
}

void require_same(const LieAlgebraElement& a, const LieAlgebraElement& b) {
  if (!(a.group() == b.group()))
    throw DimensionError("Lie algebra mismatch: " + a.group().name() + " vs " + b.group().name());
}

}  // namespace

StructureGroup StructureGroup::so(int r) {
  StructureGroup g{GroupKind::SpecialOrthogonal, r};
  check_size(g);
  return g;
}

StructureGroup StructureGroup::su(int r) {
  StructureGroup g{GroupKind::SpecialUnitary, r};
  check_size(g);
  return g;
}

int StructureGroup::algebra_dim() const {
  return kind == GroupKind::SpecialOrthogonal ? r * (r - 1) / 2 : r * r - 1;
}

std::string StructureGroup::name() const {
  return (kind == GroupKind::SpecialOrthogonal ? "so(" : "su(") + std::to_string(r) + ")";
}

LieAlgebraElement::LieAlgebraElement(StructureGroup group)
    : group_(group), m_(Mat::Zero(group.matrix_size(), group.matrix_size())) {
  check_size(group);
}

LieAlgebraElement LieAlgebraElement::from_real(StructureGroup group, const Eigen::MatrixXd& m) {
  check_size(group);
  if (group.kind != GroupKind::SpecialOrthogonal)
    throw DimensionError("from_real needs so(r), got " + group.name());
  if (m.rows() != group.r || m.cols() != group.r)
    throw DimensionError("matrix size does not match " + group.name());
  Mat s = 0.5 * (m - m.transpose());
  return {group, s};
}

LieAlgebraElement LieAlgebraElement::from_complex(StructureGroup group, const ComplexMat& m) {
  check_size(group);
  if (m.rows() != group.r || m.cols() != group.r)
    throw DimensionError("matrix size does not match " + group.name());
  if (group.kind == GroupKind::SpecialOrthogonal) return from_real(group, m.real());
  ComplexMat a = 0.5 * (m - m.adjoint());
  const std::complex<double> tr = a.trace() / static_cast<double>(group.r);
  a -= tr * ComplexMat::Identity(group.r, group.r);
  return {group, realify(a)};
}

LieAlgebraElement LieAlgebraElement::from_storage(StructureGroup group, const Mat& stored) {
  check_size(group);
  if (stored.rows() != group.matrix_size() || stored.cols() != group.matrix_size())
    throw DimensionError("storage size does not match " + group.name());
  return {group, stored};
}

ComplexMat LieAlgebraElement::entries() const {
  if (group_.kind == GroupKind::SpecialOrthogonal) return m_.cast<std::complex<double>>();
  return complexify(m_, group_.r);
}

LieAlgebraElement LieAlgebraElement::operator+(const LieAlgebraElement& o) const {
  require_same(*this, o);
  return {group_, m_ + o.m_};
}

LieAlgebraElement LieAlgebraElement::operator-(const LieAlgebraElement& o) const {
  require_same(*this, o);
  return {group_, m_ - o.m_};
}

LieAlgebraElement LieAlgebraElement::operator*(double s) const { return {group_, m_ * s}; }

double LieAlgebraElement::norm() const { return std::sqrt(inner(*this, *this)); }

LieAlgebraElement bracket(const LieAlgebraElement& a, const LieAlgebraElement& b) {
  require_same(a, b);
  Mat out;
  bracket_into(a.storage(), b.storage(), out);
  return LieAlgebraElement::from_storage(a.group(), out);
}

double inner(const LieAlgebraElement& a, const LieAlgebraElement& b) {
  require_same(a, b);
  return inner_raw(a.group(), a.storage().data(), b.storage().data());
}

double inner_raw(const StructureGroup& g, const double* a, const double* b) {
  const int n = g.matrix_size() * g.matrix_size();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return g.inner_scale() * s;
}

LieAlgebraElement random_element(StructureGroup group, std::uint64_t seed) {
  check_size(group);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int r = group.r;
  if (group.kind == GroupKind::SpecialOrthogonal) {
    Eigen::MatrixXd m(r, r);
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = u(rng);
    Mat s = m - m.transpose();
    return LieAlgebraElement::from_storage(group, s);
  }
  ComplexMat m(r, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = {u(rng), u(rng)};
  ComplexMat a = m - m.adjoint();
  const std::complex<double> tr = a.trace() / static_cast<double>(r);
  a -= tr * ComplexMat::Identity(r, r);
  return LieAlgebraElement::from_storage(group, realify(a));
}

LieAlgebraElement so_unit(int r, int a, int b) {
  auto g = StructureGroup::so(r);
  Mat m = Mat::Zero(r, r);
  m(a, b) = 1.0;
  m(b, a) = -1.0;
  return LieAlgebraElement::from_storage(g, m);
}

std::vector<Mat> orthonormal_basis(StructureGroup group) {
  check_size(group);
  std::vector<Mat> basis;
  const int r = group.r;
  if (group.kind == GroupKind::SpecialOrthogonal) {
    // <e_ab, e_ab> = 1 already.
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) basis.push_back(so_unit(r, a, b).storage());
    return basis;
  }
  // Spanning set of su(r), then Gram-Schmidt under the trace form.
  std::vector<ComplexMat> span;
  const std::complex<double> I(0.0, 1.0);
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      ComplexMat m = ComplexMat::Zero(r, r);
      m(a, b) = 1.0;
      m(b, a) = -1.0;
      span.push_back(m);
      m.setZero();
      m(a, b) = I;
      m(b, a) = I;
      span.push_back(m);
    }
  for (int a = 0; a + 1 < r; ++a) {
    ComplexMat m = ComplexMat::Zero(r, r);
    m(a, a) = I;
    m(a + 1, a + 1) = -I;
    span.push_back(m);
  }
  for (const auto& c : span) {
    Mat v = realify(c);
    for (const auto& e : basis) v -= inner_raw(group, e.data(), v.data()) * e;
    const double nrm = std::sqrt(inner_raw(group, v.data(), v.data()));
    if (nrm > 1e-12) basis.push_back(v / nrm);
  }
  return basis;
}

}  // namespace ymstab::liealg
