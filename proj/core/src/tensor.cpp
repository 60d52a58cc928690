#include "ymstab/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace ymstab::forms {

namespace {

std::size_t ipow(int n, int p) {
  std::size_t c = 1;
  for (int i = 0; i < p; ++i) c *= static_cast<std::size_t>(n);
  return c;
}

}  // namespace

TensorValue::TensorValue(int rank, int n, int m)
    : rank_(rank), n_(n), m_(m), count_(ipow(n, rank)), data_(ipow(n, rank) * m * m, 0.0) {
  if (rank < 0 || n < 1 || m < 1) throw DimensionError("invalid tensor shape");
}

std::size_t TensorValue::index(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != rank_) throw DimensionError("index arity does not match tensor rank");
  return index(idx.begin());
}

std::size_t TensorValue::index(const int* idx) const {
  std::size_t f = 0;
  for (int s = 0; s < rank_; ++s) f = f * n_ + static_cast<std::size_t>(idx[s]);
  return f;
}

void TensorValue::unflatten(std::size_t flat, int* idx) const {
  for (int s = rank_ - 1; s >= 0; --s) {
    idx[s] = static_cast<int>(flat % n_);
    flat /= n_;
  }
}

void TensorValue::require_same(const TensorValue& o) const {
  if (o.rank_ != rank_ || o.n_ != n_ || o.m_ != m_) throw DimensionError("tensor shapes differ");
}

TensorValue& TensorValue::operator+=(const TensorValue& o) {
  require_same(o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

TensorValue& TensorValue::operator-=(const TensorValue& o) {
  require_same(o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

TensorValue& TensorValue::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double TensorValue::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

void TensorValue::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

TensorValue frame_components(const TensorValue& t, const Matrix& E) {
  const int n = t.dim();
  const std::size_t B = t.block();
  TensorValue cur = t;
  // Contract one slot at a time.
  for (int s = 0; s < t.rank(); ++s) {
    TensorValue next(t.rank(), n, t.msize());
    std::vector<int> idx(t.rank());
    for (std::size_t f = 0; f < next.count(); ++f) {
      next.unflatten(f, idx.data());
      const int a = idx[s];
      double* out = next.ptr(f);
      for (int i = 0; i < n; ++i) {
        const double e = E(i, a);
        if (e == 0.0) continue;
        idx[s] = i;
        const double* in = cur.ptr(cur.index(idx.data()));
        for (std::size_t b = 0; b < B; ++b) out[b] += e * in[b];
      }
    }
    cur = std::move(next);
  }
  return cur;
}

TensorValue antisymmetrize(const TensorValue& t) {
  const int p = t.rank();
  if (p <= 1) return t;
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::pair<std::vector<int>, int>> perms;
  do {
    int inv = 0;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j)
        if (perm[i] > perm[j]) ++inv;
    perms.emplace_back(perm, inv % 2 ? -1 : 1);
  } while (std::next_permutation(perm.begin(), perm.end()));
  double fact = 1.0;
  for (int i = 2; i <= p; ++i) fact *= i;
  TensorValue out(p, t.dim(), t.msize());
  std::vector<int> idx(p), src(p);
  const std::size_t B = t.block();
  for (std::size_t f = 0; f < out.count(); ++f) {
    out.unflatten(f, idx.data());
    double* o = out.ptr(f);
    for (const auto& [pm, sg] : perms) {
      for (int i = 0; i < p; ++i) src[i] = idx[pm[i]];
      const double* in = t.ptr(t.index(src.data()));
      for (std::size_t b = 0; b < B; ++b) o[b] += sg * in[b] / fact;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Field

Field::Field(SpecPtr spec, StructureGroup group, int rank, Eval eval, std::string label)
    : spec_(std::move(spec)), group_(group), rank_(rank), eval_(std::move(eval)), label_(std::move(label)) {
  if (!spec_) throw ParameterError("field needs a geometry");
  if (rank_ < 0 || rank_ > 4) throw DegreeError("tensor rank must be between 0 and 4");
}

TensorValue Field::operator()(const Vec& x) const {
  if (!spec_->in_domain(x)) spec_->require_domain(x);
  return eval_(x);
}

TensorValue Field::at(const geometry::ChartPoint& p) const {
  geometry::ChartPoint::make(*spec_, p.coords);
  return eval_(p.coords);
}

liealg::LieAlgebraElement Field::component(const Vec& x, std::initializer_list<int> idx) const {
  const TensorValue v = (*this)(x);
  for (int i : idx)
    if (i < 0 || i >= dim()) throw RangeError("component index out of range");
  return liealg::LieAlgebraElement::from_storage(group_, liealg::Mat(v[v.index(idx)]));
}

Field Field::rebind(SpecPtr spec) const {
  if (!spec || spec->dim() != dim()) throw DimensionError("rebind needs a geometry of the same dimension");
  return Field(std::move(spec), group_, rank_, eval_, label_);
}

Field Field::relabel(std::string label) const { return Field(spec_, group_, rank_, eval_, std::move(label)); }

namespace {

struct CacheKey {
  std::uint64_t id;
  std::vector<double> x;
  bool operator==(const CacheKey& o) const {
    return id == o.id && x.size() == o.x.size() && std::memcmp(x.data(), o.x.data(), x.size() * sizeof(double)) == 0;
  }
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const {
    std::uint64_t h = k.id * 0x9E3779B97F4A7C15ull;
    for (double v : k.x) {
      std::uint64_t b;
      std::memcpy(&b, &v, sizeof b);
      h ^= b + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

constexpr std::size_t kCacheLimit = 1u << 14;

std::atomic<std::uint64_t> g_cache_ids{1};

}  // namespace

Field Field::cached() const {
  const std::uint64_t id = g_cache_ids.fetch_add(1);
  Eval inner = eval_;
  Eval ev = [id, inner](const Vec& x) {
    thread_local std::unordered_map<CacheKey, TensorValue, CacheKeyHash> cache;
    CacheKey key{id, std::vector<double>(x.data(), x.data() + x.size())};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    TensorValue v = inner(x);
    if (cache.size() >= kCacheLimit) cache.clear();
    cache.emplace(std::move(key), v);
    return v;
  };
  return Field(spec_, group_, rank_, std::move(ev), label_);
}

Field zero_field(SpecPtr spec, StructureGroup group, int rank) {
  const int n = spec->dim(), m = group.matrix_size();
  return Field(std::move(spec), group, rank, [rank, n, m](const Vec&) { return TensorValue(rank, n, m); }, "0");
}

Field make_field(SpecPtr spec, StructureGroup group, int rank, std::function<void(const Vec&, TensorValue&)> fill,
                 std::string label) {
  const int n = spec->dim(), m = group.matrix_size();
  return Field(
      std::move(spec), group, rank,
      [rank, n, m, fill = std::move(fill)](const Vec& x) {
        TensorValue v(rank, n, m);
        fill(x, v);
        return v;
      },
      std::move(label));
}

namespace {
void require_compatible(const Field& a, const Field& b) {
  if (a.rank() != b.rank() || !(a.group() == b.group()) || a.dim() != b.dim())
    throw DimensionError("fields differ in rank, group or dimension");
}
}  // namespace

Field operator+(const Field& a, const Field& b) {
  require_compatible(a, b);
  auto ea = a.eval(), eb = b.eval();
  return Field(a.spec_ptr(), a.group(), a.rank(), [ea, eb](const Vec& x) { return ea(x) + eb(x); },
               a.label() + "+" + b.label());
}

Field operator-(const Field& a, const Field& b) {
  require_compatible(a, b);
  auto ea = a.eval(), eb = b.eval();
  return Field(a.spec_ptr(), a.group(), a.rank(), [ea, eb](const Vec& x) { return ea(x) - eb(x); },
               a.label() + "-" + b.label());
}

Field operator*(double s, const Field& a) {
  auto ea = a.eval();
  std::ostringstream os;
  os << s << "*" << a.label();
  return Field(a.spec_ptr(), a.group(), a.rank(), [ea, s](const Vec& x) { return ea(x) * s; }, os.str());
}

Field scale(const geometry::ScalarField& u, const Field& a) {
  auto ea = a.eval();
  auto uv = u.value;
  return Field(a.spec_ptr(), a.group(), a.rank(), [ea, uv](const Vec& x) { return ea(x) * uv(x); },
               u.label + "*" + a.label());
}

TensorValue partial(const Field& f, const Vec& x, int dir, const FdConfig& fd) {
  return geometry::fd_partial_at([&f](const Vec& p) { return f(p); }, f.spec(), x, dir, fd);
}

}  // namespace ymstab::forms
