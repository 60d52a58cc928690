#pragma once

// Lie-algebra-valued covariant tensors in chart components, and fields of
// them. Values keep every index tuple (no antisymmetric packing); p-forms are
// tensors whose components are alternating.

#include "ymstab/geometry.hpp"
#include "ymstab/liealg.hpp"

#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace ymstab::forms {

using geometry::FdConfig;
using geometry::GeometrySpec;
using geometry::Matrix;
using geometry::Vec;
using liealg::StructureGroup;

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;

class TensorValue {
 public:
  TensorValue() = default;
  TensorValue(int rank, int n, int m);

  int rank() const { return rank_; }
  int dim() const { return n_; }
  int msize() const { return m_; }
  std::size_t count() const { return count_; }
  std::size_t block() const { return static_cast<std::size_t>(m_) * m_; }

  MatMap operator[](std::size_t flat) { return {data_.data() + flat * block(), m_, m_}; }
  ConstMatMap operator[](std::size_t flat) const { return {data_.data() + flat * block(), m_, m_}; }
  double* ptr(std::size_t flat) { return data_.data() + flat * block(); }
  const double* ptr(std::size_t flat) const { return data_.data() + flat * block(); }

  std::size_t index(std::initializer_list<int> idx) const;
  std::size_t index(const int* idx) const;
  /// Inverse of index(): writes rank() entries.
  void unflatten(std::size_t flat, int* idx) const;

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  TensorValue& operator+=(const TensorValue& o);
  TensorValue& operator-=(const TensorValue& o);
  TensorValue& operator*=(double s);
  friend TensorValue operator+(TensorValue a, const TensorValue& b) { return a += b; }
  friend TensorValue operator-(TensorValue a, const TensorValue& b) { return a -= b; }
  friend TensorValue operator*(TensorValue a, double s) { return a *= s; }
  friend TensorValue operator*(double s, TensorValue a) { return a *= s; }

  double max_abs() const;
  void set_zero();

 private:
  void require_same(const TensorValue& o) const;
  int rank_ = 0, n_ = 0, m_ = 0;
  std::size_t count_ = 0;
  std::vector<double> data_;
};

/// Rewrites components in the frame whose vectors are the columns of E:
/// out_{a1..ap} = E^{i1}_{a1} ... T_{i1..ip}.
TensorValue frame_components(const TensorValue& t, const Matrix& E);

/// Alternating projection: (1/p!) sum over permutations with signs.
TensorValue antisymmetrize(const TensorValue& t);

using SpecPtr = std::shared_ptr<const GeometrySpec>;

/// Tensor field on a chart. Evaluation rejects coordinates outside the chart
/// domain; ChartPoint evaluation additionally enforces the chart bound.
class Field {
 public:
  using Eval = std::function<TensorValue(const Vec&)>;

  Field(SpecPtr spec, StructureGroup group, int rank, Eval eval, std::string label = {});

  TensorValue operator()(const Vec& x) const;
  TensorValue at(const geometry::ChartPoint& p) const;
  liealg::LieAlgebraElement component(const Vec& x, std::initializer_list<int> idx) const;

  int rank() const { return rank_; }
  int degree() const { return rank_; }
  int dim() const { return spec_->dim(); }
  const GeometrySpec& spec() const { return *spec_; }
  const SpecPtr& spec_ptr() const { return spec_; }
  const StructureGroup& group() const { return group_; }
  const std::string& label() const { return label_; }
  const Eval& eval() const { return eval_; }

  /// Same components, read on another geometry with the same chart.
  Field rebind(SpecPtr spec) const;
  /// Memoised copy: evaluations are remembered per thread by exact
  /// coordinates. Values are identical to the uncached field.
  Field cached() const;
  Field relabel(std::string label) const;

 private:
  SpecPtr spec_;
  StructureGroup group_;
  int rank_;
  Eval eval_;
  std::string label_;
};

using PFormField = Field;
using GaugePotential = Field;

Field zero_field(SpecPtr spec, StructureGroup group, int rank);

/// Builds a field from a function that fills the full component array.
Field make_field(SpecPtr spec, StructureGroup group, int rank, std::function<void(const Vec&, TensorValue&)> fill,
                 std::string label = {});

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
/// Pointwise product u * a with a scalar function.
Field scale(const geometry::ScalarField& u, const Field& a);

/// Coordinate partial derivative of a field value, with the chart-adapted step.
TensorValue partial(const Field& f, const Vec& x, int dir, const FdConfig& fd);

}  // namespace ymstab::forms
