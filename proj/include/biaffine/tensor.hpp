#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "biaffine/errors.hpp"

namespace biaffine {

template <typename T>
struct Tensor;

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

/// Dense row-major tensor (rank 1 or 2) with reverse-mode autodiff.
///
/// Every op below builds a node holding its parents and a backward closure.
/// backward(loss) replays the closures in reverse topological order.
/// Intermediate nodes are freed when the last handle into the graph drops;
/// parameters are long-lived leaves whose grad buffers accumulate across
/// sentences until zero_grads() is called.
template <typename T>
struct Tensor : std::enable_shared_from_this<Tensor<T>> {
  std::vector<int> shape;
  std::vector<T> data;
  std::vector<T> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::vector<TensorPtr<T>> parents;
  std::function<void()> backward_fn;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<T> d, bool rg)
      : shape(std::move(s)), data(std::move(d)), requires_grad(rg) {
    if (rg) grad.assign(data.size(), T(0));
  }

  int rank() const { return static_cast<int>(shape.size()); }
  std::size_t numel() const { return data.size(); }
  bool is_scalar() const { return numel() == 1; }
  int rows() const { return rank() == 2 ? shape[0] : 1; }
  int cols() const { return shape.empty() ? 1 : shape.back(); }

  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  T at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }
  T item() const { return data[0]; }

  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <typename T>
inline std::string shape_str(const Tensor<T>& t) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < t.shape.size(); ++i) {
    if (i) os << " x ";
    os << t.shape[i];
  }
  os << "]";
  return os.str();
}

inline std::string shape_str(const std::vector<int>& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << " x ";
    os << s[i];
  }
  os << "]";
  return os.str();
}

namespace detail {

inline std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

template <typename T>
inline void check_finite(const Tensor<T>& t, const char* op) {
  for (T v : t.data) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(op) + ": non-finite value in output of shape " + shape_str(t));
    }
  }
}

// c (m x n) += a (m x k) . b (k x n)
template <typename T>
inline void matmul_acc(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* ar = a + static_cast<std::size_t>(i) * k;
    T* cr = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const T av = ar[p];
      const T* br = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) cr[j] += av * br[j];
    }
  }
}

// c (m x k) += a (m x n) . b^T where b is (k x n)
template <typename T>
inline void matmul_nt_acc(const T* a, const T* b, T* c, int m, int n, int k) {
  for (int i = 0; i < m; ++i) {
    const T* ar = a + static_cast<std::size_t>(i) * n;
    T* cr = c + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T* br = b + static_cast<std::size_t>(p) * n;
      T acc = T(0);
      for (int j = 0; j < n; ++j) acc += ar[j] * br[j];
      cr[p] += acc;
    }
  }
}

// c (k x n) += a^T . b where a is (m x k), b is (m x n)
template <typename T>
inline void matmul_tn_acc(const T* a, const T* b, T* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const T* ar = a + static_cast<std::size_t>(i) * k;
    const T* br = b + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const T av = ar[p];
      if (av == T(0)) continue;
      T* cr = c + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) cr[j] += av * br[j];
    }
  }
}

}  // namespace detail

template <typename T>
inline TensorPtr<T> make_tensor(std::vector<int> shape, std::vector<T> data, bool requires_grad = false) {
  if (detail::shape_numel(shape) != data.size()) {
    throw DimensionError("make_tensor: shape " + shape_str(shape) + " does not match data length " +
                         std::to_string(data.size()));
  }
  return std::make_shared<Tensor<T>>(std::move(shape), std::move(data), requires_grad);
}

template <typename T>
inline TensorPtr<T> zeros(std::vector<int> shape, bool requires_grad = false) {
  std::vector<T> d(detail::shape_numel(shape), T(0));
  return make_tensor<T>(std::move(shape), std::move(d), requires_grad);
}

template <typename T>
inline TensorPtr<T> full(std::vector<int> shape, T value, bool requires_grad = false) {
  std::vector<T> d(detail::shape_numel(shape), value);
  return make_tensor<T>(std::move(shape), std::move(d), requires_grad);
}

template <typename T>
inline TensorPtr<T> scalar_tensor(T value, bool requires_grad = false) {
  return make_tensor<T>({1}, {value}, requires_grad);
}

namespace detail {

template <typename T>
inline TensorPtr<T> make_node(std::vector<int> shape, std::vector<T> data,
                              std::vector<TensorPtr<T>> parents) {
  bool rg = false;
  for (const auto& p : parents) rg = rg || p->requires_grad;
  auto out = make_tensor<T>(std::move(shape), std::move(data), rg);
  out->parents = std::move(parents);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ops
// ---------------------------------------------------------------------------

template <typename T>
inline TensorPtr<T> matmul(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  if (a->rank() != 2 || b->rank() != 2 || a->shape[1] != b->shape[0]) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(*a) + " vs " + shape_str(*b));
  }
  const int m = a->shape[0], k = a->shape[1], n = b->shape[1];
  std::vector<T> out(static_cast<std::size_t>(m) * n, T(0));
  detail::matmul_acc(a->data.data(), b->data.data(), out.data(), m, k, n);
  auto r = detail::make_node<T>({m, n}, std::move(out), {a, b});
  detail::check_finite(*r, "matmul");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    Tensor<T>* pb = b.get();
    r->backward_fn = [self, pa, pb, m, k, n]() {
      if (pa->requires_grad)
        detail::matmul_nt_acc(self->grad.data(), pb->data.data(), pa->grad.data(), m, n, k);
      if (pb->requires_grad)
        detail::matmul_tn_acc(pa->data.data(), self->grad.data(), pb->grad.data(), m, k, n);
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  if (a->shape != b->shape) {
    throw DimensionError("add: shape mismatch " + shape_str(*a) + " vs " + shape_str(*b));
  }
  std::vector<T> out(a->data);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->data[i];
  auto r = detail::make_node<T>(a->shape, std::move(out), {a, b});
  detail::check_finite(*r, "add");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    Tensor<T>* pb = b.get();
    r->backward_fn = [self, pa, pb]() {
      if (pa->requires_grad)
        for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
      if (pb->requires_grad)
        for (std::size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] += self->grad[i];
    };
  }
  return r;
}

/// Matrix plus row vector, broadcast over the leading (row) dimension.
template <typename T>
inline TensorPtr<T> add_row(const TensorPtr<T>& m, const TensorPtr<T>& v) {
  if (m->rank() != 2 || v->rank() != 1 || m->shape[1] != v->shape[0]) {
    throw DimensionError("add_row: shape mismatch " + shape_str(*m) + " vs " + shape_str(*v));
  }
  const int rows = m->shape[0], cols = m->shape[1];
  std::vector<T> out(m->data);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[static_cast<std::size_t>(i) * cols + j] += v->data[j];
  auto r = detail::make_node<T>(m->shape, std::move(out), {m, v});
  detail::check_finite(*r, "add_row");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pm = m.get();
    Tensor<T>* pv = v.get();
    r->backward_fn = [self, pm, pv, rows, cols]() {
      if (pm->requires_grad)
        for (std::size_t i = 0; i < self->grad.size(); ++i) pm->grad[i] += self->grad[i];
      if (pv->requires_grad)
        for (int i = 0; i < rows; ++i)
          for (int j = 0; j < cols; ++j) pv->grad[j] += self->grad[static_cast<std::size_t>(i) * cols + j];
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> mul(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  if (a->shape != b->shape) {
    throw DimensionError("mul: shape mismatch " + shape_str(*a) + " vs " + shape_str(*b));
  }
  std::vector<T> out(a->data);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->data[i];
  auto r = detail::make_node<T>(a->shape, std::move(out), {a, b});
  detail::check_finite(*r, "mul");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    Tensor<T>* pb = b.get();
    r->backward_fn = [self, pa, pb]() {
      if (pa->requires_grad)
        for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i] * pb->data[i];
      if (pb->requires_grad)
        for (std::size_t i = 0; i < self->grad.size(); ++i) pb->grad[i] += self->grad[i] * pa->data[i];
    };
  }
  return r;
}

/// Matrix times row vector, elementwise per row.
template <typename T>
inline TensorPtr<T> mul_row(const TensorPtr<T>& m, const TensorPtr<T>& v) {
  if (m->rank() != 2 || v->rank() != 1 || m->shape[1] != v->shape[0]) {
    throw DimensionError("mul_row: shape mismatch " + shape_str(*m) + " vs " + shape_str(*v));
  }
  const int rows = m->shape[0], cols = m->shape[1];
  std::vector<T> out(m->data);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[static_cast<std::size_t>(i) * cols + j] *= v->data[j];
  auto r = detail::make_node<T>(m->shape, std::move(out), {m, v});
  detail::check_finite(*r, "mul_row");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pm = m.get();
    Tensor<T>* pv = v.get();
    r->backward_fn = [self, pm, pv, rows, cols]() {
      for (int i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) {
          if (pm->requires_grad) pm->grad[base + j] += self->grad[base + j] * pv->data[j];
          if (pv->requires_grad) pv->grad[j] += self->grad[base + j] * pm->data[base + j];
        }
      }
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> scale(const TensorPtr<T>& a, T s) {
  std::vector<T> out(a->data);
  for (auto& v : out) v *= s;
  auto r = detail::make_node<T>(a->shape, std::move(out), {a});
  detail::check_finite(*r, "scale");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa, s]() {
      for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i] * s;
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> sub(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  return add(a, scale(b, T(-1)));
}

/// Scales row i of m by factors[i]. The factors are constants (no gradient),
/// which is all the token-level dropout paths need.
template <typename T>
inline TensorPtr<T> scale_rows(const TensorPtr<T>& m, const std::vector<T>& factors) {
  if (m->rank() != 2 || static_cast<int>(factors.size()) != m->shape[0]) {
    throw DimensionError("scale_rows: matrix " + shape_str(*m) + " vs " +
                         std::to_string(factors.size()) + " row factors");
  }
  const int rows = m->shape[0], cols = m->shape[1];
  std::vector<T> out(m->data);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[static_cast<std::size_t>(i) * cols + j] *= factors[i];
  auto r = detail::make_node<T>(m->shape, std::move(out), {m});
  detail::check_finite(*r, "scale_rows");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pm = m.get();
    r->backward_fn = [self, pm, factors, rows, cols]() {
      for (int i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) pm->grad[base + j] += self->grad[base + j] * factors[i];
      }
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> concat_cols(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  if (a->rank() != 2 || b->rank() != 2 || a->shape[0] != b->shape[0]) {
    throw DimensionError("concat_cols: row counts differ " + shape_str(*a) + " vs " + shape_str(*b));
  }
  const int rows = a->shape[0], ca = a->shape[1], cb = b->shape[1];
  std::vector<T> out(static_cast<std::size_t>(rows) * (ca + cb));
  for (int i = 0; i < rows; ++i) {
    std::copy_n(a->data.begin() + static_cast<std::size_t>(i) * ca, ca,
                out.begin() + static_cast<std::size_t>(i) * (ca + cb));
    std::copy_n(b->data.begin() + static_cast<std::size_t>(i) * cb, cb,
                out.begin() + static_cast<std::size_t>(i) * (ca + cb) + ca);
  }
  auto r = detail::make_node<T>({rows, ca + cb}, std::move(out), {a, b});
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    Tensor<T>* pb = b.get();
    r->backward_fn = [self, pa, pb, rows, ca, cb]() {
      for (int i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * (ca + cb);
        if (pa->requires_grad)
          for (int j = 0; j < ca; ++j) pa->grad[static_cast<std::size_t>(i) * ca + j] += self->grad[base + j];
        if (pb->requires_grad)
          for (int j = 0; j < cb; ++j) pb->grad[static_cast<std::size_t>(i) * cb + j] += self->grad[base + ca + j];
      }
    };
  }
  return r;
}

/// Stacks k tensors, each of shape (c) or (1 x c), into a (k x c) matrix.
template <typename T>
inline TensorPtr<T> stack_rows(const std::vector<TensorPtr<T>>& parts) {
  if (parts.empty()) throw DimensionError("stack_rows: no rows given");
  const int cols = parts[0]->cols();
  for (const auto& p : parts) {
    if (p->rows() != 1 || p->cols() != cols) {
      throw DimensionError("stack_rows: row shape mismatch " + shape_str(*parts[0]) + " vs " + shape_str(*p));
    }
  }
  const int k = static_cast<int>(parts.size());
  std::vector<T> out(static_cast<std::size_t>(k) * cols);
  for (int i = 0; i < k; ++i)
    std::copy_n(parts[i]->data.begin(), cols, out.begin() + static_cast<std::size_t>(i) * cols);
  auto r = detail::make_node<T>({k, cols}, std::move(out), parts);
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    std::vector<Tensor<T>*> raw;
    raw.reserve(parts.size());
    for (const auto& p : parts) raw.push_back(p.get());
    r->backward_fn = [self, raw, cols]() {
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!raw[i]->requires_grad) continue;
        for (int j = 0; j < cols; ++j) raw[i]->grad[j] += self->grad[i * cols + j];
      }
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> slice_rows(const TensorPtr<T>& a, int r0, int r1) {
  if (a->rank() != 2 || r0 < 0 || r1 > a->shape[0] || r0 >= r1) {
    throw DimensionError("slice_rows: range [" + std::to_string(r0) + ", " + std::to_string(r1) +
                         ") invalid for " + shape_str(*a));
  }
  const int cols = a->shape[1];
  std::vector<T> out(a->data.begin() + static_cast<std::size_t>(r0) * cols,
                     a->data.begin() + static_cast<std::size_t>(r1) * cols);
  auto r = detail::make_node<T>({r1 - r0, cols}, std::move(out), {a});
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa, r0, cols]() {
      const std::size_t base = static_cast<std::size_t>(r0) * cols;
      for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[base + i] += self->grad[i];
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> slice_cols(const TensorPtr<T>& a, int c0, int c1) {
  if (a->rank() != 2 || c0 < 0 || c1 > a->shape[1] || c0 >= c1) {
    throw DimensionError("slice_cols: range [" + std::to_string(c0) + ", " + std::to_string(c1) +
                         ") invalid for " + shape_str(*a));
  }
  const int rows = a->shape[0], cols = a->shape[1], w = c1 - c0;
  std::vector<T> out(static_cast<std::size_t>(rows) * w);
  for (int i = 0; i < rows; ++i)
    std::copy_n(a->data.begin() + static_cast<std::size_t>(i) * cols + c0, w,
                out.begin() + static_cast<std::size_t>(i) * w);
  auto r = detail::make_node<T>({rows, w}, std::move(out), {a});
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa, rows, cols, c0, w]() {
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < w; ++j)
          pa->grad[static_cast<std::size_t>(i) * cols + c0 + j] += self->grad[static_cast<std::size_t>(i) * w + j];
    };
  }
  return r;
}

/// Gathers rows of a (V x c) table; id -1 yields a zero row with no gradient.
template <typename T>
inline TensorPtr<T> gather_rows(const TensorPtr<T>& table, const std::vector<int>& ids) {
  if (table->rank() != 2) {
    throw DimensionError("gather_rows: table must be rank 2, got " + shape_str(*table));
  }
  const int v = table->shape[0], cols = table->shape[1];
  for (int id : ids) {
    if (id < -1 || id >= v) {
      throw ContractError("gather_rows: row id " + std::to_string(id) + " out of range for " + shape_str(*table));
    }
  }
  const int k = static_cast<int>(ids.size());
  std::vector<T> out(static_cast<std::size_t>(k) * cols, T(0));
  for (int i = 0; i < k; ++i) {
    if (ids[i] < 0) continue;
    std::copy_n(table->data.begin() + static_cast<std::size_t>(ids[i]) * cols, cols,
                out.begin() + static_cast<std::size_t>(i) * cols);
  }
  auto r = detail::make_node<T>({k, cols}, std::move(out), {table});
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pt = table.get();
    r->backward_fn = [self, pt, ids, cols]() {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0) continue;
        const std::size_t dst = static_cast<std::size_t>(ids[i]) * cols;
        const std::size_t src = i * cols;
        for (int j = 0; j < cols; ++j) pt->grad[dst + j] += self->grad[src + j];
      }
    };
  }
  return r;
}

/// Repeats the column block of a (r x c) matrix k times -> (r x k*c).
template <typename T>
inline TensorPtr<T> tile_cols(const TensorPtr<T>& a, int k) {
  if (a->rank() != 2 || k < 1) {
    throw DimensionError("tile_cols: need rank-2 input and k >= 1, got " + shape_str(*a));
  }
  const int rows = a->shape[0], cols = a->shape[1];
  std::vector<T> out(static_cast<std::size_t>(rows) * cols * k);
  for (int i = 0; i < rows; ++i)
    for (int t = 0; t < k; ++t)
      std::copy_n(a->data.begin() + static_cast<std::size_t>(i) * cols, cols,
                  out.begin() + (static_cast<std::size_t>(i) * k + t) * cols);
  auto r = detail::make_node<T>({rows, cols * k}, std::move(out), {a});
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa, rows, cols, k]() {
      for (int i = 0; i < rows; ++i)
        for (int t = 0; t < k; ++t) {
          const std::size_t src = (static_cast<std::size_t>(i) * k + t) * cols;
          const std::size_t dst = static_cast<std::size_t>(i) * cols;
          for (int j = 0; j < cols; ++j) pa->grad[dst + j] += self->grad[src + j];
        }
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> reshape(const TensorPtr<T>& a, std::vector<int> new_shape) {
  if (detail::shape_numel(new_shape) != a->numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(*a) + " as " + shape_str(new_shape));
  }
  auto r = detail::make_node<T>(std::move(new_shape), std::vector<T>(a->data), {a});
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa]() {
      for (std::size_t i = 0; i < self->grad.size(); ++i) pa->grad[i] += self->grad[i];
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> transpose(const TensorPtr<T>& a) {
  if (a->rank() != 2) throw DimensionError("transpose: need rank 2, got " + shape_str(*a));
  const int rows = a->shape[0], cols = a->shape[1];
  std::vector<T> out(a->numel());
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out[static_cast<std::size_t>(j) * rows + i] = a->data[static_cast<std::size_t>(i) * cols + j];
  auto r = detail::make_node<T>({cols, rows}, std::move(out), {a});
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa, rows, cols]() {
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
          pa->grad[static_cast<std::size_t>(i) * cols + j] += self->grad[static_cast<std::size_t>(j) * rows + i];
    };
  }
  return r;
}

namespace detail {

template <typename T, typename FwdFn, typename DerivFn>
inline TensorPtr<T> elementwise(const TensorPtr<T>& a, const char* name, FwdFn fwd, DerivFn deriv) {
  std::vector<T> out(a->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(a->data[i]);
  auto r = make_node<T>(a->shape, std::move(out), {a});
  check_finite(*r, name);
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa, deriv]() {
      for (std::size_t i = 0; i < self->grad.size(); ++i)
        pa->grad[i] += self->grad[i] * deriv(pa->data[i], self->data[i]);
    };
  }
  return r;
}

}  // namespace detail

template <typename T>
inline TensorPtr<T> sigmoid(const TensorPtr<T>& a) {
  return detail::elementwise(
      a, "sigmoid",
      [](T x) { return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
inline TensorPtr<T> tanh(const TensorPtr<T>& a) {
  return detail::elementwise(
      a, "tanh", [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
inline TensorPtr<T> relu(const TensorPtr<T>& a) {
  return detail::elementwise(
      a, "relu", [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
inline TensorPtr<T> exp(const TensorPtr<T>& a) {
  return detail::elementwise(
      a, "exp", [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
inline TensorPtr<T> log(const TensorPtr<T>& a) {
  return detail::elementwise(
      a, "log", [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

/// Softmax over the last axis. Rank-1 input is treated as a single row.
template <typename T>
inline TensorPtr<T> softmax_rows(const TensorPtr<T>& a) {
  const int rows = a->rows(), cols = a->cols();
  std::vector<T> out(a->data.size());
  for (int i = 0; i < rows; ++i) {
    const T* x = a->data.data() + static_cast<std::size_t>(i) * cols;
    T* y = out.data() + static_cast<std::size_t>(i) * cols;
    T m = x[0];
    for (int j = 1; j < cols; ++j) m = std::max(m, x[j]);
    T z = T(0);
    for (int j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - m);
      z += y[j];
    }
    for (int j = 0; j < cols; ++j) y[j] /= z;
  }
  auto r = detail::make_node<T>(a->shape, std::move(out), {a});
  detail::check_finite(*r, "softmax");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa, rows, cols]() {
      for (int i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * cols;
        T dot = T(0);
        for (int j = 0; j < cols; ++j) dot += self->grad[base + j] * self->data[base + j];
        for (int j = 0; j < cols; ++j)
          pa->grad[base + j] += self->data[base + j] * (self->grad[base + j] - dot);
      }
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> sum_all(const TensorPtr<T>& a) {
  T s = T(0);
  for (T v : a->data) s += v;
  auto r = detail::make_node<T>({1}, {s}, {a});
  detail::check_finite(*r, "sum");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa]() {
      const T g = self->grad[0];
      for (std::size_t i = 0; i < pa->grad.size(); ++i) pa->grad[i] += g;
    };
  }
  return r;
}

template <typename T>
inline TensorPtr<T> mean_all(const TensorPtr<T>& a) {
  return scale(sum_all(a), T(1) / static_cast<T>(a->numel()));
}

template <typename T>
inline TensorPtr<T> row_sums(const TensorPtr<T>& a) {
  if (a->rank() != 2) throw DimensionError("row_sums: need rank 2, got " + shape_str(*a));
  const int rows = a->shape[0], cols = a->shape[1];
  std::vector<T> out(rows, T(0));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out[i] += a->data[static_cast<std::size_t>(i) * cols + j];
  auto r = detail::make_node<T>({rows}, std::move(out), {a});
  detail::check_finite(*r, "row_sums");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* pa = a.get();
    r->backward_fn = [self, pa, rows, cols]() {
      for (int i = 0; i < rows; ++i) {
        const T g = self->grad[i];
        for (int j = 0; j < cols; ++j) pa->grad[static_cast<std::size_t>(i) * cols + j] += g;
      }
    };
  }
  return r;
}

enum class Reduction { kMean, kSum };

/// Per-row softmax cross-entropy against integer targets, reduced to a scalar.
/// Computed via a max-shifted log-sum-exp so large scores stay finite.
template <typename T>
inline TensorPtr<T> cross_entropy_rows(const TensorPtr<T>& scores, const std::vector<int>& targets,
                                       Reduction reduction = Reduction::kMean) {
  if (scores->rank() != 2 || static_cast<int>(targets.size()) != scores->shape[0]) {
    throw DimensionError("cross_entropy_rows: scores " + shape_str(*scores) + " vs " +
                         std::to_string(targets.size()) + " targets");
  }
  const int rows = scores->shape[0], cols = scores->shape[1];
  for (int t : targets) {
    if (t < 0 || t >= cols) {
      throw ContractError("cross_entropy_rows: target " + std::to_string(t) + " out of range [0, " +
                          std::to_string(cols) + ")");
    }
  }
  std::vector<T> probs(scores->data.size());
  T total = T(0);
  for (int i = 0; i < rows; ++i) {
    const T* x = scores->data.data() + static_cast<std::size_t>(i) * cols;
    T* p = probs.data() + static_cast<std::size_t>(i) * cols;
    T m = x[0];
    for (int j = 1; j < cols; ++j) m = std::max(m, x[j]);
    T z = T(0);
    for (int j = 0; j < cols; ++j) {
      p[j] = std::exp(x[j] - m);
      z += p[j];
    }
    for (int j = 0; j < cols; ++j) p[j] /= z;
    total += m + std::log(z) - x[targets[i]];
  }
  const T norm = reduction == Reduction::kMean ? T(1) / static_cast<T>(rows) : T(1);
  auto r = detail::make_node<T>({1}, {total * norm}, {scores});
  detail::check_finite(*r, "cross_entropy");
  if (r->requires_grad) {
    Tensor<T>* self = r.get();
    Tensor<T>* ps = scores.get();
    r->backward_fn = [self, ps, probs = std::move(probs), targets, rows, cols, norm]() {
      const T g = self->grad[0] * norm;
      for (int i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j)
          ps->grad[base + j] += g * (probs[base + j] - (j == targets[i] ? T(1) : T(0)));
      }
    };
  }
  return r;
}

// ---------------------------------------------------------------------------
// backward
// ---------------------------------------------------------------------------

/// Reverse-mode sweep from a scalar loss. Each reachable node is visited
/// exactly once, children before parents.
template <typename T>
inline void backward(const TensorPtr<T>& loss) {
  if (!loss->is_scalar()) {
    throw ContractError("backward: loss must be scalar, got shape " + shape_str(*loss));
  }
  if (!loss->requires_grad) return;

  std::vector<Tensor<T>*> order;
  std::unordered_set<Tensor<T>*> seen;
  struct Frame {
    Tensor<T>* node;
    std::size_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.get(), 0});
  seen.insert(loss.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.node->parents.size()) {
      Tensor<T>* p = f.node->parents[f.next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  loss->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn();
  }
}

template <typename T>
inline void zero_grads(const std::vector<TensorPtr<T>>& params) {
  for (const auto& p : params) p->zero_grad();
}

// ---------------------------------------------------------------------------
// parameter initialization
// ---------------------------------------------------------------------------

template <typename T>
inline void fill_uniform(Tensor<T>& t, T lo, T hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(static_cast<double>(lo), static_cast<double>(hi));
  for (auto& v : t.data) v = static_cast<T>(d(rng));
}

template <typename T>
inline void fill_normal(Tensor<T>& t, T mean, T stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> d(static_cast<double>(mean), static_cast<double>(stddev));
  for (auto& v : t.data) v = static_cast<T>(d(rng));
}

template <typename T>
inline void fill_glorot(Tensor<T>& t, std::mt19937_64& rng) {
  const T bound = std::sqrt(T(6) / static_cast<T>(t.rows() + t.cols()));
  fill_uniform(t, -bound, bound, rng);
}

/// Orthogonalizes a square matrix in place (modified Gram-Schmidt over a
/// Gaussian draw). Rank deficiency is broken by re-drawing the row.
template <typename T>
inline void fill_orthogonal(Tensor<T>& t, std::mt19937_64& rng) {
  if (t.rank() != 2 || t.shape[0] != t.shape[1]) {
    throw DimensionError("fill_orthogonal: need a square matrix, got " + shape_str(t));
  }
  const int n = t.shape[0];
  std::normal_distribution<double> d(0.0, 1.0);
  for (auto& v : t.data) v = static_cast<T>(d(rng));
  for (int i = 0; i < n; ++i) {
    T* ri = t.data.data() + static_cast<std::size_t>(i) * n;
    for (int k = 0; k < i; ++k) {
      const T* rk = t.data.data() + static_cast<std::size_t>(k) * n;
      T dot = T(0);
      for (int j = 0; j < n; ++j) dot += ri[j] * rk[j];
      for (int j = 0; j < n; ++j) ri[j] -= dot * rk[j];
    }
    T norm = T(0);
    for (int j = 0; j < n; ++j) norm += ri[j] * ri[j];
    norm = std::sqrt(norm);
    if (norm < T(1e-8)) {
      for (int j = 0; j < n; ++j) ri[j] = static_cast<T>(d(rng));
      --i;
      continue;
    }
    for (int j = 0; j < n; ++j) ri[j] /= norm;
  }
}

}  // namespace biaffine
