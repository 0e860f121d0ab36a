#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <unordered_set>
#include <vector>

#include "lcmt/common.hpp"

namespace lcmt::nn {

/// Thread-local autograd switch. Ops record no graph while disabled.
inline bool& grad_mode() {
  thread_local bool on = true;
  return on;
}

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(grad_mode()) { grad_mode() = false; }
  ~NoGradGuard() { grad_mode() = prev; }
};

/// A 2D tensor node in a reverse-mode autodiff graph. Scalars are 1x1.
template <typename Real>
struct TensorT {
  int rows = 0, cols = 0;
  std::vector<Real> v;
  std::vector<Real> g;  // allocated lazily, same size as v
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorT>> parents;
  std::function<void()> backward_fn;

  Real& at(int r, int c) { return v[(std::size_t)r * cols + c]; }
  Real at(int r, int c) const { return v[(std::size_t)r * cols + c]; }
  std::size_t size() const { return v.size(); }

  void ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), Real(0));
  }
  void zero_grad() { g.assign(v.size(), Real(0)); }
};

template <typename Real>
using TensorPtr = std::shared_ptr<TensorT<Real>>;

template <typename Real>
TensorPtr<Real> make_tensor(int rows, int cols, bool requires_grad = false) {
  check(rows >= 1 && cols >= 1, "tensor shape must be positive, got ", rows, "x", cols);
  auto t = std::make_shared<TensorT<Real>>();
  t->rows = rows;
  t->cols = cols;
  t->v.assign((std::size_t)rows * cols, Real(0));
  t->requires_grad = requires_grad;
  return t;
}

/// Glorot-uniform initialized trainable parameter.
template <typename Real>
TensorPtr<Real> make_param(int rows, int cols, Rng& rng) {
  auto t = make_tensor<Real>(rows, cols, true);
  float s = (float)std::sqrt(6.0 / (rows + cols));
  // Drawn at float precision so float and double builds share exact values.
  for (auto& x : t->v) x = (Real)rng.next_symmetric(s);
  return t;
}

template <typename Real>
TensorPtr<Real> make_const_param(int rows, int cols, Real value) {
  auto t = make_tensor<Real>(rows, cols, true);
  std::fill(t->v.begin(), t->v.end(), value);
  return t;
}

namespace detail {

template <typename Real>
TensorPtr<Real> op_result(int rows, int cols, std::initializer_list<TensorPtr<Real>> parents) {
  auto out = make_tensor<Real>(rows, cols);
  if (!grad_mode()) return out;
  for (const auto& p : parents) {
    if (p->requires_grad) {
      out->requires_grad = true;
      break;
    }
  }
  if (out->requires_grad) out->parents.assign(parents);
  return out;
}

}  // namespace detail

// ---- primitive ops ----

/// C = A * B.
template <typename Real>
TensorPtr<Real> matmul(const TensorPtr<Real>& a, const TensorPtr<Real>& b) {
  check(a->cols == b->rows, "matmul: shape mismatch ", a->rows, "x", a->cols, " * ", b->rows,
        "x", b->cols);
  auto out = detail::op_result<Real>(a->rows, b->cols, {a, b});
  const int n = a->rows, k = a->cols, m = b->cols;
  for (int i = 0; i < n; ++i) {
    Real* ci = &out->v[(std::size_t)i * m];
    for (int p = 0; p < k; ++p) {
      Real aip = a->at(i, p);
      const Real* bp = &b->v[(std::size_t)p * m];
      for (int j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    auto* pb = b.get();
    out->backward_fn = [po, pa, pb, n, k, m] {
      if (pa->requires_grad) {
        pa->ensure_grad();
        for (int i = 0; i < n; ++i)
          for (int p = 0; p < k; ++p) {
            Real acc = 0;
            const Real* gi = &po->g[(std::size_t)i * m];
            const Real* bp = &pb->v[(std::size_t)p * m];
            for (int j = 0; j < m; ++j) acc += gi[j] * bp[j];
            pa->g[(std::size_t)i * k + p] += acc;
          }
      }
      if (pb->requires_grad) {
        pb->ensure_grad();
        for (int p = 0; p < k; ++p)
          for (int i = 0; i < n; ++i) {
            Real aip = pa->v[(std::size_t)i * k + p];
            const Real* gi = &po->g[(std::size_t)i * m];
            Real* gb = &pb->g[(std::size_t)p * m];
            for (int j = 0; j < m; ++j) gb[j] += aip * gi[j];
          }
      }
    };
  }
  return out;
}

template <typename Real>
TensorPtr<Real> transpose(const TensorPtr<Real>& a) {
  auto out = detail::op_result<Real>(a->cols, a->rows, {a});
  for (int i = 0; i < a->rows; ++i)
    for (int j = 0; j < a->cols; ++j) out->at(j, i) = a->at(i, j);
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    out->backward_fn = [po, pa] {
      pa->ensure_grad();
      for (int i = 0; i < pa->rows; ++i)
        for (int j = 0; j < pa->cols; ++j)
          pa->g[(std::size_t)i * pa->cols + j] += po->g[(std::size_t)j * po->cols + i];
    };
  }
  return out;
}

/// A + B; B may also be a 1 x cols row vector broadcast over A's rows.
template <typename Real>
TensorPtr<Real> add(const TensorPtr<Real>& a, const TensorPtr<Real>& b) {
  bool broadcast = b->rows == 1 && a->rows != 1;
  check((a->rows == b->rows || broadcast) && a->cols == b->cols, "add: shape mismatch ", a->rows,
        "x", a->cols, " + ", b->rows, "x", b->cols);
  auto out = detail::op_result<Real>(a->rows, a->cols, {a, b});
  for (int i = 0; i < a->rows; ++i)
    for (int j = 0; j < a->cols; ++j)
      out->at(i, j) = a->at(i, j) + b->at(broadcast ? 0 : i, j);
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    auto* pb = b.get();
    out->backward_fn = [po, pa, pb, broadcast] {
      if (pa->requires_grad) {
        pa->ensure_grad();
        for (std::size_t i = 0; i < pa->g.size(); ++i) pa->g[i] += po->g[i];
      }
      if (pb->requires_grad) {
        pb->ensure_grad();
        for (int i = 0; i < po->rows; ++i)
          for (int j = 0; j < po->cols; ++j)
            pb->g[(std::size_t)(broadcast ? 0 : i) * pb->cols + j] +=
                po->g[(std::size_t)i * po->cols + j];
      }
    };
  }
  return out;
}

template <typename Real>
TensorPtr<Real> scale(const TensorPtr<Real>& a, double s) {
  auto out = detail::op_result<Real>(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < a->size(); ++i) out->v[i] = a->v[i] * (Real)s;
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    out->backward_fn = [po, pa, s] {
      pa->ensure_grad();
      for (std::size_t i = 0; i < pa->g.size(); ++i) pa->g[i] += (Real)s * po->g[i];
    };
  }
  return out;
}

template <typename Real>
TensorPtr<Real> hadamard(const TensorPtr<Real>& a, const TensorPtr<Real>& b) {
  check(a->rows == b->rows && a->cols == b->cols, "hadamard: shape mismatch ", a->rows, "x",
        a->cols, " vs ", b->rows, "x", b->cols);
  auto out = detail::op_result<Real>(a->rows, a->cols, {a, b});
  for (std::size_t i = 0; i < a->size(); ++i) out->v[i] = a->v[i] * b->v[i];
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    auto* pb = b.get();
    out->backward_fn = [po, pa, pb] {
      if (pa->requires_grad) {
        pa->ensure_grad();
        for (std::size_t i = 0; i < pa->g.size(); ++i) pa->g[i] += po->g[i] * pb->v[i];
      }
      if (pb->requires_grad) {
        pb->ensure_grad();
        for (std::size_t i = 0; i < pb->g.size(); ++i) pb->g[i] += po->g[i] * pa->v[i];
      }
    };
  }
  return out;
}

template <typename Real>
TensorPtr<Real> relu(const TensorPtr<Real>& a) {
  auto out = detail::op_result<Real>(a->rows, a->cols, {a});
  for (std::size_t i = 0; i < a->size(); ++i) out->v[i] = a->v[i] > 0 ? a->v[i] : Real(0);
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    out->backward_fn = [po, pa] {
      pa->ensure_grad();
      for (std::size_t i = 0; i < pa->g.size(); ++i)
        if (pa->v[i] > 0) pa->g[i] += po->g[i];
    };
  }
  return out;
}

/// Row-wise softmax. An optional additive mask of the same shape is applied
/// to the logits first (use large negative entries to block positions).
template <typename Real>
TensorPtr<Real> softmax_rows(const TensorPtr<Real>& a, const TensorPtr<Real>& mask = nullptr) {
  if (mask) {
    check(mask->rows == a->rows && mask->cols == a->cols, "softmax_rows: mask shape ", mask->rows,
          "x", mask->cols, " vs input ", a->rows, "x", a->cols);
  }
  auto out = mask ? detail::op_result<Real>(a->rows, a->cols, {a, mask})
                  : detail::op_result<Real>(a->rows, a->cols, {a});
  for (int i = 0; i < a->rows; ++i) {
    Real mx = -std::numeric_limits<Real>::infinity();
    for (int j = 0; j < a->cols; ++j) {
      Real z = a->at(i, j) + (mask ? mask->at(i, j) : Real(0));
      out->at(i, j) = z;
      mx = std::max(mx, z);
    }
    Real total = 0;
    for (int j = 0; j < a->cols; ++j) {
      Real e = std::exp(out->at(i, j) - mx);
      out->at(i, j) = e;
      total += e;
    }
    for (int j = 0; j < a->cols; ++j) out->at(i, j) /= total;
  }
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    out->backward_fn = [po, pa] {
      if (!pa->requires_grad) return;
      pa->ensure_grad();
      for (int i = 0; i < po->rows; ++i) {
        Real dot = 0;
        for (int j = 0; j < po->cols; ++j) dot += po->at(i, j) * po->g[(std::size_t)i * po->cols + j];
        for (int j = 0; j < po->cols; ++j) {
          Real y = po->at(i, j);
          pa->g[(std::size_t)i * pa->cols + j] += y * (po->g[(std::size_t)i * po->cols + j] - dot);
        }
      }
    };
  }
  return out;
}

/// Row-wise layer normalization with learned gain and bias (each 1 x cols).
template <typename Real>
TensorPtr<Real> layer_norm(const TensorPtr<Real>& a, const TensorPtr<Real>& gain,
                           const TensorPtr<Real>& bias) {
  check(gain->rows == 1 && gain->cols == a->cols && bias->rows == 1 && bias->cols == a->cols,
        "layer_norm: gain/bias must be 1x", a->cols);
  auto out = detail::op_result<Real>(a->rows, a->cols, {a, gain, bias});
  const Real eps = (Real)1e-5;
  const int n = a->cols;
  std::vector<Real> inv_sigma(a->rows), xhat(a->size());
  for (int i = 0; i < a->rows; ++i) {
    Real mu = 0;
    for (int j = 0; j < n; ++j) mu += a->at(i, j);
    mu /= n;
    Real var = 0;
    for (int j = 0; j < n; ++j) {
      Real d = a->at(i, j) - mu;
      var += d * d;
    }
    var /= n;
    Real is = Real(1) / std::sqrt(var + eps);
    inv_sigma[i] = is;
    for (int j = 0; j < n; ++j) {
      Real xh = (a->at(i, j) - mu) * is;
      xhat[(std::size_t)i * n + j] = xh;
      out->at(i, j) = xh * gain->v[j] + bias->v[j];
    }
  }
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    auto* pg = gain.get();
    auto* pb = bias.get();
    out->backward_fn = [po, pa, pg, pb, n, inv_sigma = std::move(inv_sigma),
                        xhat = std::move(xhat)] {
      for (int i = 0; i < po->rows; ++i) {
        const Real* gy = &po->g[(std::size_t)i * n];
        const Real* xh = &xhat[(std::size_t)i * n];
        if (pg->requires_grad) {
          pg->ensure_grad();
          for (int j = 0; j < n; ++j) pg->g[j] += gy[j] * xh[j];
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (int j = 0; j < n; ++j) pb->g[j] += gy[j];
        }
        if (pa->requires_grad) {
          pa->ensure_grad();
          Real mean_dy = 0, mean_dyxh = 0;
          for (int j = 0; j < n; ++j) {
            Real dy = gy[j] * pg->v[j];
            mean_dy += dy;
            mean_dyxh += dy * xh[j];
          }
          mean_dy /= n;
          mean_dyxh /= n;
          for (int j = 0; j < n; ++j) {
            Real dy = gy[j] * pg->v[j];
            pa->g[(std::size_t)i * n + j] += inv_sigma[i] * (dy - mean_dy - xh[j] * mean_dyxh);
          }
        }
      }
    };
  }
  return out;
}

/// Gathers rows of a table: result row i is table row ids[i].
template <typename Real>
TensorPtr<Real> embedding_lookup(const TensorPtr<Real>& table, const std::vector<int>& ids) {
  check(!ids.empty(), "embedding_lookup: empty id list");
  for (int id : ids)
    check(id >= 0 && id < table->rows, "embedding_lookup: id ", id, " outside table of ",
          table->rows, " rows");
  auto out = detail::op_result<Real>((int)ids.size(), table->cols, {table});
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy_n(&table->v[(std::size_t)ids[i] * table->cols], table->cols,
                &out->v[i * table->cols]);
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pt = table.get();
    out->backward_fn = [po, pt, ids] {
      pt->ensure_grad();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        Real* gt = &pt->g[(std::size_t)ids[i] * pt->cols];
        const Real* go = &po->g[i * pt->cols];
        for (int j = 0; j < pt->cols; ++j) gt[j] += go[j];
      }
    };
  }
  return out;
}

/// Fixed sinusoidal position encodings, rows = positions, cols = d_model.
template <typename Real>
TensorPtr<Real> sinusoidal_positions(int length, int d_model) {
  auto out = make_tensor<Real>(length, d_model);
  for (int pos = 0; pos < length; ++pos) {
    for (int j = 0; j + 1 < d_model; j += 2) {
      double angle = pos / std::pow(10000.0, (double)j / d_model);
      out->at(pos, j) = (Real)std::sin(angle);
      out->at(pos, j + 1) = (Real)std::cos(angle);
    }
    if (d_model % 2 == 1)
      out->at(pos, d_model - 1) =
          (Real)std::sin(pos / std::pow(10000.0, (double)(d_model - 1) / d_model));
  }
  return out;
}

/// Vertical stack: rows of a on top of rows of b.
template <typename Real>
TensorPtr<Real> concat_rows(const TensorPtr<Real>& a, const TensorPtr<Real>& b) {
  check(a->cols == b->cols, "concat_rows: column mismatch ", a->cols, " vs ", b->cols);
  auto out = detail::op_result<Real>(a->rows + b->rows, a->cols, {a, b});
  std::copy(a->v.begin(), a->v.end(), out->v.begin());
  std::copy(b->v.begin(), b->v.end(), out->v.begin() + (std::ptrdiff_t)a->size());
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    auto* pb = b.get();
    out->backward_fn = [po, pa, pb] {
      if (pa->requires_grad) {
        pa->ensure_grad();
        for (std::size_t i = 0; i < pa->g.size(); ++i) pa->g[i] += po->g[i];
      }
      if (pb->requires_grad) {
        pb->ensure_grad();
        for (std::size_t i = 0; i < pb->g.size(); ++i) pb->g[i] += po->g[pa->size() + i];
      }
    };
  }
  return out;
}

/// Horizontal stack: columns of a then columns of b.
template <typename Real>
TensorPtr<Real> concat_cols(const TensorPtr<Real>& a, const TensorPtr<Real>& b) {
  check(a->rows == b->rows, "concat_cols: row mismatch ", a->rows, " vs ", b->rows);
  auto out = detail::op_result<Real>(a->rows, a->cols + b->cols, {a, b});
  for (int i = 0; i < a->rows; ++i) {
    std::copy_n(&a->v[(std::size_t)i * a->cols], a->cols, &out->v[(std::size_t)i * out->cols]);
    std::copy_n(&b->v[(std::size_t)i * b->cols], b->cols,
                &out->v[(std::size_t)i * out->cols + a->cols]);
  }
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    auto* pb = b.get();
    out->backward_fn = [po, pa, pb] {
      for (int i = 0; i < po->rows; ++i) {
        if (pa->requires_grad) {
          pa->ensure_grad();
          for (int j = 0; j < pa->cols; ++j)
            pa->g[(std::size_t)i * pa->cols + j] += po->g[(std::size_t)i * po->cols + j];
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (int j = 0; j < pb->cols; ++j)
            pb->g[(std::size_t)i * pb->cols + j] += po->g[(std::size_t)i * po->cols + pa->cols + j];
        }
      }
    };
  }
  return out;
}

/// Column slice [c0, c1).
template <typename Real>
TensorPtr<Real> slice_cols(const TensorPtr<Real>& a, int c0, int c1) {
  check(0 <= c0 && c0 < c1 && c1 <= a->cols, "slice_cols: bad range [", c0, ", ", c1,
        ") for width ", a->cols);
  auto out = detail::op_result<Real>(a->rows, c1 - c0, {a});
  for (int i = 0; i < a->rows; ++i)
    std::copy_n(&a->v[(std::size_t)i * a->cols + c0], c1 - c0, &out->v[(std::size_t)i * out->cols]);
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    out->backward_fn = [po, pa, c0] {
      pa->ensure_grad();
      for (int i = 0; i < po->rows; ++i)
        for (int j = 0; j < po->cols; ++j)
          pa->g[(std::size_t)i * pa->cols + c0 + j] += po->g[(std::size_t)i * po->cols + j];
    };
  }
  return out;
}

/// Single row r as a 1 x cols tensor.
template <typename Real>
TensorPtr<Real> row(const TensorPtr<Real>& a, int r) {
  check(0 <= r && r < a->rows, "row: index ", r, " outside ", a->rows, " rows");
  auto out = detail::op_result<Real>(1, a->cols, {a});
  std::copy_n(&a->v[(std::size_t)r * a->cols], a->cols, out->v.begin());
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    out->backward_fn = [po, pa, r] {
      pa->ensure_grad();
      for (int j = 0; j < pa->cols; ++j) pa->g[(std::size_t)r * pa->cols + j] += po->g[j];
    };
  }
  return out;
}

/// Mean negative log-likelihood of targets under row-wise softmax of logits.
template <typename Real>
TensorPtr<Real> cross_entropy(const TensorPtr<Real>& logits, const std::vector<int>& targets) {
  check((int)targets.size() == logits->rows, "cross_entropy: ", targets.size(), " targets for ",
        logits->rows, " rows");
  for (int t : targets)
    check(t >= 0 && t < logits->cols, "cross_entropy: target ", t, " outside ", logits->cols,
          " classes");
  auto out = detail::op_result<Real>(1, 1, {logits});
  std::vector<Real> probs(logits->size());
  Real total = 0;
  for (int i = 0; i < logits->rows; ++i) {
    Real mx = -std::numeric_limits<Real>::infinity();
    for (int j = 0; j < logits->cols; ++j) mx = std::max(mx, logits->at(i, j));
    Real z = 0;
    for (int j = 0; j < logits->cols; ++j) {
      Real e = std::exp(logits->at(i, j) - mx);
      probs[(std::size_t)i * logits->cols + j] = e;
      z += e;
    }
    for (int j = 0; j < logits->cols; ++j) probs[(std::size_t)i * logits->cols + j] /= z;
    total += -(logits->at(i, targets[i]) - mx - std::log(z));
  }
  out->v[0] = total / logits->rows;
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pl = logits.get();
    out->backward_fn = [po, pl, targets, probs = std::move(probs)] {
      pl->ensure_grad();
      Real scale = po->g[0] / pl->rows;
      for (int i = 0; i < pl->rows; ++i) {
        for (int j = 0; j < pl->cols; ++j) {
          Real p = probs[(std::size_t)i * pl->cols + j];
          pl->g[(std::size_t)i * pl->cols + j] += scale * (p - (j == targets[i] ? Real(1) : Real(0)));
        }
      }
    };
  }
  return out;
}

/// Sum of all entries as a scalar.
template <typename Real>
TensorPtr<Real> sum(const TensorPtr<Real>& a) {
  auto out = detail::op_result<Real>(1, 1, {a});
  Real total = 0;
  for (Real x : a->v) total += x;
  out->v[0] = total;
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    out->backward_fn = [po, pa] {
      pa->ensure_grad();
      for (auto& gi : pa->g) gi += po->g[0];
    };
  }
  return out;
}

/// Inverted dropout; pass the training RNG. rate 0 returns the input.
template <typename Real>
TensorPtr<Real> dropout(const TensorPtr<Real>& a, double rate, Rng& rng) {
  check(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1), got ", rate);
  if (rate == 0.0) return a;
  auto out = detail::op_result<Real>(a->rows, a->cols, {a});
  std::vector<Real> mask(a->size());
  Real keep = (Real)(1.0 - rate);
  for (std::size_t i = 0; i < a->size(); ++i) {
    mask[i] = rng.next_real() < rate ? Real(0) : Real(1) / keep;
    out->v[i] = a->v[i] * mask[i];
  }
  if (out->requires_grad) {
    auto* po = out.get();
    auto* pa = a.get();
    out->backward_fn = [po, pa, mask = std::move(mask)] {
      pa->ensure_grad();
      for (std::size_t i = 0; i < pa->g.size(); ++i) pa->g[i] += po->g[i] * mask[i];
    };
  }
  return out;
}

/// Copy with no graph attachment.
template <typename Real>
TensorPtr<Real> detach(const TensorPtr<Real>& a) {
  auto out = make_tensor<Real>(a->rows, a->cols);
  out->v = a->v;
  return out;
}

/// Reverse-mode sweep from a scalar root.
template <typename Real>
void backward(const TensorPtr<Real>& root) {
  check(root->requires_grad, "backward: root does not require grad");
  check(root->rows == 1 && root->cols == 1, "backward: root must be scalar, got ", root->rows,
        "x", root->cols);
  std::vector<TensorT<Real>*> order;
  std::unordered_set<TensorT<Real>*> seen;
  std::vector<std::pair<TensorT<Real>*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorT<Real>* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (auto* node : order) node->ensure_grad();
  root->g[0] = Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward_fn) (*it)->backward_fn();
}

/// Index of the largest entry in row r (ties to the lowest index).
template <typename Real>
int argmax_row(const TensorPtr<Real>& a, int r) {
  check(0 <= r && r < a->rows, "argmax_row: index ", r, " outside ", a->rows, " rows");
  int best = 0;
  for (int j = 1; j < a->cols; ++j)
    if (a->at(r, j) > a->at(r, best)) best = j;
  return best;
}

}  // namespace lcmt::nn
