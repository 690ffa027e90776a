// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/grad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dyad/error.hpp"
#include "dyad/simd/kernels.hpp"

namespace dyad::grad {
namespace {

const simd::KernelTable& K() { return simd::active(); }

void check_finite(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw NumericError(std::string("non-finite output in ") + op);
}

void same_graph(Var a, Var b, const char* op) {
  if (a.graph != b.graph || a.graph == nullptr) {
    throw ContractError(std::string(op) + ": operands belong to different graphs");
  }
}

void require_shape(bool ok, const char* op, const Tensor& a, const Tensor& b) {
  if (!ok) throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

// grad(id) += delta
void accumulate(Graph& g, std::uint32_t id, const Tensor& delta) {
  if (!g.requires_grad(id)) return;
  Tensor& buf = g.grad_buffer(id);
  K().accumulate(delta.data().data(), buf.data().data(), buf.size());
}

Tensor transpose_tensor(const Tensor& a) {
  Tensor t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  }
  return t;
}

Tensor gemm_nn(const Tensor& a, const Tensor& b) {
  Tensor c(a.rows(), b.cols());
  K().gemm_nn(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols());
  return c;
}

// a[k,m]^T * b[k,n]
Tensor gemm_tn(const Tensor& a, const Tensor& b) {
  Tensor c(a.cols(), b.cols());
  K().gemm_tn(a.data().data(), b.data().data(), c.data().data(), a.cols(), a.rows(), b.cols());
  return c;
}

constexpr double kGeluC = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

}  // namespace

Var matmul(Var a, Var b) {
  same_graph(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_shape(av.cols() == bv.rows(), "matmul", av, bv);
  Tensor out = gemm_nn(av, bv);
  check_finite(out, "matmul");
  const auto ia = a.id, ib = b.id;
  return a.graph->record(std::move(out), {ia, ib}, [ia, ib](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    if (g.requires_grad(ia)) accumulate(g, ia, gemm_nn(up, transpose_tensor(g.value_of(ib))));
    if (g.requires_grad(ib)) accumulate(g, ib, gemm_tn(g.value_of(ia), up));
  });
}

Var matmul_nt(Var a, Var b) {
  same_graph(a, b, "matmul_nt");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_shape(av.cols() == bv.cols(), "matmul_nt", av, bv);
  Tensor out = gemm_nn(av, transpose_tensor(bv));
  check_finite(out, "matmul_nt");
  const auto ia = a.id, ib = b.id;
  return a.graph->record(std::move(out), {ia, ib}, [ia, ib](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    if (g.requires_grad(ia)) accumulate(g, ia, gemm_nn(up, g.value_of(ib)));
    if (g.requires_grad(ib)) accumulate(g, ib, gemm_tn(up, g.value_of(ia)));
  });
}

Var transpose(Var a) {
  const auto ia = a.id;
  return a.graph->record(transpose_tensor(a.value()), {ia}, [ia](Graph& g, std::uint32_t self) {
    accumulate(g, ia, transpose_tensor(g.upstream(self)));
  });
}

Var add(Var a, Var b) {
  same_graph(a, b, "add");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_shape(av.shape() == bv.shape(), "add", av, bv);
  Tensor out(av.rows(), av.cols());
  K().add(av.data().data(), bv.data().data(), out.data().data(), out.size());
  check_finite(out, "add");
  const auto ia = a.id, ib = b.id;
  return a.graph->record(std::move(out), {ia, ib}, [ia, ib](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    accumulate(g, ia, up);
    accumulate(g, ib, up);
  });
}

Var sub(Var a, Var b) {
  same_graph(a, b, "sub");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_shape(av.shape() == bv.shape(), "sub", av, bv);
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  check_finite(out, "sub");
  const auto ia = a.id, ib = b.id;
  return a.graph->record(std::move(out), {ia, ib}, [ia, ib](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    accumulate(g, ia, up);
    if (g.requires_grad(ib)) {
      Tensor neg(up.rows(), up.cols());
      K().scale(-1.0, up.data().data(), neg.data().data(), up.size());
      accumulate(g, ib, neg);
    }
  });
}

Var mul(Var a, Var b) {
  same_graph(a, b, "mul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_shape(av.shape() == bv.shape(), "mul", av, bv);
  Tensor out(av.rows(), av.cols());
  K().mul(av.data().data(), bv.data().data(), out.data().data(), out.size());
  check_finite(out, "mul");
  const auto ia = a.id, ib = b.id;
  return a.graph->record(std::move(out), {ia, ib}, [ia, ib](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    Tensor d(up.rows(), up.cols());
    if (g.requires_grad(ia)) {
      K().mul(up.data().data(), g.value_of(ib).data().data(), d.data().data(), d.size());
      accumulate(g, ia, d);
    }
    if (g.requires_grad(ib)) {
      K().mul(up.data().data(), g.value_of(ia).data().data(), d.data().data(), d.size());
      accumulate(g, ib, d);
    }
  });
}

Var scale(Var a, double s) {
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  K().scale(s, av.data().data(), out.data().data(), out.size());
  check_finite(out, "scale");
  const auto ia = a.id;
  return a.graph->record(std::move(out), {ia}, [ia, s](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    Tensor d(up.rows(), up.cols());
    K().scale(s, up.data().data(), d.data().data(), d.size());
    accumulate(g, ia, d);
  });
}

Var add_row(Var a, Var row) {
  same_graph(a, row, "add_row");
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  require_shape(rv.rows() == 1 && rv.cols() == av.cols(), "add_row", av, rv);
  Tensor out(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    K().add(av.row(r).data(), rv.data().data(), out.row(r).data(), av.cols());
  }
  check_finite(out, "add_row");
  const auto ia = a.id, ir = row.id;
  return a.graph->record(std::move(out), {ia, ir}, [ia, ir](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    accumulate(g, ia, up);
    if (g.requires_grad(ir)) {
      Tensor d(1, up.cols());
      for (std::size_t r = 0; r < up.rows(); ++r) K().accumulate(up.row(r).data(), d.data().data(), up.cols());
      accumulate(g, ir, d);
    }
  });
}

Var mul_row(Var a, Var row) {
  same_graph(a, row, "mul_row");
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  require_shape(rv.rows() == 1 && rv.cols() == av.cols(), "mul_row", av, rv);
  Tensor out(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    K().mul(av.row(r).data(), rv.data().data(), out.row(r).data(), av.cols());
  }
  check_finite(out, "mul_row");
  const auto ia = a.id, ir = row.id;
  return a.graph->record(std::move(out), {ia, ir}, [ia, ir](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    const Tensor& av = g.value_of(ia);
    const Tensor& rv = g.value_of(ir);
    if (g.requires_grad(ia)) {
      Tensor d(up.rows(), up.cols());
      for (std::size_t r = 0; r < up.rows(); ++r) K().mul(up.row(r).data(), rv.data().data(), d.row(r).data(), up.cols());
      accumulate(g, ia, d);
    }
    if (g.requires_grad(ir)) {
      Tensor d(1, up.cols());
      Tensor tmp(1, up.cols());
      for (std::size_t r = 0; r < up.rows(); ++r) {
        K().mul(up.row(r).data(), av.row(r).data(), tmp.data().data(), up.cols());
        K().accumulate(tmp.data().data(), d.data().data(), up.cols());
      }
      accumulate(g, ir, d);
    }
  });
}

Var gelu(Var a) {
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double x = av[i];
    out[i] = 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
  }
  check_finite(out, "gelu");
  const auto ia = a.id;
  return a.graph->record(std::move(out), {ia}, [ia](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    const Tensor& av = g.value_of(ia);
    Tensor d(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double x = av[i];
      const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
      const double dinner = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
      d[i] = up[i] * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * dinner);
    }
    accumulate(g, ia, d);
  });
}

Var sigmoid(Var a) {
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-av[i]));
  check_finite(out, "sigmoid");
  const auto ia = a.id;
  return a.graph->record(std::move(out), {ia}, [ia](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    const Tensor& y = g.value_of(self);
    Tensor d(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.size(); ++i) d[i] = up[i] * y[i] * (1.0 - y[i]);
    accumulate(g, ia, d);
  });
}

Var layer_norm(Var x, double eps) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.cols();
  if (n == 0) throw DimensionError("layer_norm over zero columns");
  Tensor out(xv.rows(), n);
  std::vector<double> inv_std(xv.rows());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    const auto row = xv.row(r);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t c = 0; c < n; ++c) out(r, c) = (row[c] - mu) * inv;
  }
  check_finite(out, "layer_norm");
  const auto ix = x.id;
  return x.graph->record(std::move(out), {ix}, [ix, inv_std = std::move(inv_std)](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    const Tensor& y = g.value_of(self);
    const std::size_t n = y.cols();
    Tensor d(y.rows(), n);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double mean_up = 0.0;
      double mean_upy = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        mean_up += up(r, c);
        mean_upy += up(r, c) * y(r, c);
      }
      mean_up /= static_cast<double>(n);
      mean_upy /= static_cast<double>(n);
      for (std::size_t c = 0; c < n; ++c) {
        d(r, c) = inv_std[r] * (up(r, c) - mean_up - y(r, c) * mean_upy);
      }
    }
    accumulate(g, ix, d);
  });
}

Var layer_norm_affine(Var x, Var gain, Var bias, double eps) {
  return add_row(mul_row(layer_norm(x, eps), gain), bias);
}

namespace {

Var softmax_impl(Var x, const VisibilityView* visible) {
  const Tensor& xv = x.value();
  if (visible != nullptr && (visible->n_rows != xv.rows() || visible->n_cols != xv.cols())) {
    throw DimensionError("masked_softmax: mask " + std::to_string(visible->n_rows) + "x" +
                         std::to_string(visible->n_cols) + " vs scores " + xv.shape_str());
  }
  Tensor out(xv.rows(), xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    const auto row = xv.row(r);
    const std::uint8_t* m = visible ? visible->allowed + r * visible->n_cols : nullptr;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (m == nullptr || m[c]) mx = std::max(mx, row[c]);
    }
    if (!std::isfinite(mx)) {
      if (row.empty()) continue;
      throw ContractError("softmax row " + std::to_string(r) + " has no visible entry");
    }
    double z = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double e = (m == nullptr || m[c]) ? std::exp(row[c] - mx) : 0.0;
      out(r, c) = e;
      z += e;
    }
    const double inv = 1.0 / z;
    for (std::size_t c = 0; c < row.size(); ++c) out(r, c) *= inv;
  }
  check_finite(out, "softmax");
  const auto ix = x.id;
  return x.graph->record(std::move(out), {ix}, [ix](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    const Tensor& y = g.value_of(self);
    Tensor d(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += up(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) d(r, c) = y(r, c) * (up(r, c) - dot);
    }
    accumulate(g, ix, d);
  });
}

}  // namespace

Var softmax(Var x) { return softmax_impl(x, nullptr); }

Var masked_softmax(Var x, VisibilityView visible) { return softmax_impl(x, &visible); }

Var embedding(Var table, std::span<const std::int32_t> ids) {
  const Tensor& tv = table.value();
  Tensor out(ids.size(), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tv.rows()) {
      throw IndexError("embedding id " + std::to_string(ids[i]) + " outside table of " +
                       std::to_string(tv.rows()) + " rows");
    }
    const auto src = tv.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  const auto it = table.id;
  std::vector<std::int32_t> idv(ids.begin(), ids.end());
  return table.graph->record(std::move(out), {it}, [it, idv = std::move(idv)](Graph& g, std::uint32_t self) {
    if (!g.requires_grad(it)) return;
    const Tensor& up = g.upstream(self);
    Tensor& buf = g.grad_buffer(it);
    for (std::size_t i = 0; i < idv.size(); ++i) {
      K().accumulate(up.row(i).data(), buf.row(static_cast<std::size_t>(idv[i])).data(), up.cols());
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_rows of nothing");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    same_graph(parts.front(), p, "concat_rows");
    if (p.cols() != cols) throw DimensionError("concat_rows: column mismatch");
    offsets.push_back(rows);
    rows += p.rows();
    ids.push_back(p.id);
  }
  Tensor out(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto src = parts[k].value().data();
    std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(offsets[k] * cols));
  }
  return parts.front().graph->record(std::move(out), ids, [ids, offsets](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.requires_grad(ids[k])) continue;
      Tensor& buf = g.grad_buffer(ids[k]);
      K().accumulate(up.data().data() + offsets[k] * up.cols(), buf.data().data(), buf.size());
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concat_cols of nothing");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    same_graph(parts.front(), p, "concat_cols");
    if (p.rows() != rows) throw DimensionError("concat_cols: row mismatch");
    offsets.push_back(cols);
    cols += p.cols();
    ids.push_back(p.id);
  }
  Tensor out(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(offsets[k]));
    }
  }
  return parts.front().graph->record(std::move(out), ids, [ids, offsets](Graph& g, std::uint32_t self) {
    const Tensor& up = g.upstream(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!g.requires_grad(ids[k])) continue;
      Tensor& buf = g.grad_buffer(ids[k]);
      for (std::size_t r = 0; r < buf.rows(); ++r) {
        K().accumulate(up.row(r).data() + offsets[k], buf.row(r).data(), buf.cols());
      }
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  if (begin > end || end > av.rows()) {
    throw DimensionError("slice_rows [" + std::to_string(begin) + "," + std::to_string(end) + ") of " + av.shape_str());
  }
  Tensor out(end - begin, av.cols());
  std::copy(av.data().begin() + static_cast<std::ptrdiff_t>(begin * av.cols()),
            av.data().begin() + static_cast<std::ptrdiff_t>(end * av.cols()), out.data().begin());
  const auto ia = a.id;
  return a.graph->record(std::move(out), {ia}, [ia, begin](Graph& g, std::uint32_t self) {
    if (!g.requires_grad(ia)) return;
    const Tensor& up = g.upstream(self);
    Tensor& buf = g.grad_buffer(ia);
    K().accumulate(up.data().data(), buf.data().data() + begin * buf.cols(), up.size());
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  if (begin > end || end > av.cols()) {
    throw DimensionError("slice_cols [" + std::to_string(begin) + "," + std::to_string(end) + ") of " + av.shape_str());
  }
  const std::size_t w = end - begin;
  Tensor out(av.rows(), w);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    std::copy(av.row(r).begin() + static_cast<std::ptrdiff_t>(begin),
              av.row(r).begin() + static_cast<std::ptrdiff_t>(end), out.row(r).begin());
  }
  const auto ia = a.id;
  return a.graph->record(std::move(out), {ia}, [ia, begin](Graph& g, std::uint32_t self) {
    if (!g.requires_grad(ia)) return;
    const Tensor& up = g.upstream(self);
    Tensor& buf = g.grad_buffer(ia);
    for (std::size_t r = 0; r < up.rows(); ++r) {
      K().accumulate(up.row(r).data(), buf.row(r).data() + begin, up.cols());
    }
  });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& av = a.value();
  Tensor out(rows.size(), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= av.rows()) throw IndexError("gather_rows index " + std::to_string(rows[i]) + " of " + av.shape_str());
    std::copy(av.row(rows[i]).begin(), av.row(rows[i]).end(), out.row(i).begin());
  }
  const auto ia = a.id;
  std::vector<std::size_t> rv(rows.begin(), rows.end());
  return a.graph->record(std::move(out), {ia}, [ia, rv = std::move(rv)](Graph& g, std::uint32_t self) {
    if (!g.requires_grad(ia)) return;
    const Tensor& up = g.upstream(self);
    Tensor& buf = g.grad_buffer(ia);
    for (std::size_t i = 0; i < rv.size(); ++i) {
      K().accumulate(up.row(i).data(), buf.row(rv[i]).data(), up.cols());
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const auto ia = a.id;
  Tensor out = Tensor::scalar(s);
  check_finite(out, "sum");
  return a.graph->record(std::move(out), {ia}, [ia](Graph& g, std::uint32_t self) {
    const double up = g.upstream(self)[0];
    const Tensor& av = g.value_of(ia);
    accumulate(g, ia, Tensor(av.rows(), av.cols(), up));
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ContractError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var cross_entropy(Var logits, std::span<const std::int32_t> targets) {
  const Tensor& lv = logits.value();
  if (targets.size() != lv.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " + lv.shape_str());
  }
  if (lv.rows() == 0) throw ContractError("cross_entropy over zero rows");
  const double inv_n = 1.0 / static_cast<double>(lv.rows());
  Tensor probs(lv.rows(), lv.cols());
  double total = 0.0;
  for (std::size_t r = 0; r < lv.rows(); ++r) {
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= lv.cols()) {
      throw IndexError("cross_entropy target " + std::to_string(targets[r]) + " outside vocab of " +
                       std::to_string(lv.cols()));
    }
    const auto row = lv.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : row) mx = std::max(mx, v);
    double z = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      probs(r, c) = std::exp(row[c] - mx);
      z += probs(r, c);
    }
    for (std::size_t c = 0; c < row.size(); ++c) probs(r, c) /= z;
    total += (mx + std::log(z)) - row[static_cast<std::size_t>(targets[r])];
  }
  Tensor out = Tensor::scalar(total * inv_n);
  check_finite(out, "cross_entropy");
  const auto il = logits.id;
  std::vector<std::int32_t> tv(targets.begin(), targets.end());
  return logits.graph->record(std::move(out), {il},
                              [il, inv_n, probs = std::move(probs), tv = std::move(tv)](Graph& g, std::uint32_t self) {
    const double up = g.upstream(self)[0];
    Tensor d = probs;
    for (std::size_t r = 0; r < d.rows(); ++r) d(r, static_cast<std::size_t>(tv[r])) -= 1.0;
    K().scale(up * inv_n, d.data().data(), d.data().data(), d.size());
    accumulate(g, il, d);
  });
}

Var squared_error_sum(Var pred, Var target) {
  same_graph(pred, target, "squared_error_sum");
  const Tensor& pv = pred.value();
  const Tensor& tv = target.value();
  require_shape(pv.shape() == tv.shape(), "squared_error_sum", pv, tv);
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) s += (pv[i] - tv[i]) * (pv[i] - tv[i]);
  Tensor out = Tensor::scalar(s);
  check_finite(out, "squared_error_sum");
  const auto ip = pred.id, it = target.id;
  return pred.graph->record(std::move(out), {ip, it}, [ip, it](Graph& g, std::uint32_t self) {
    const double up = g.upstream(self)[0];
    const Tensor& pv = g.value_of(ip);
    const Tensor& tv = g.value_of(it);
    Tensor d(pv.rows(), pv.cols());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 2.0 * up * (pv[i] - tv[i]);
    accumulate(g, ip, d);
    if (g.requires_grad(it)) {
      K().scale(-1.0, d.data().data(), d.data().data(), d.size());
      accumulate(g, it, d);
    }
  });
}

Tensor softmax_rows(const Tensor& x) {
  Tensor out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : x.row(r)) mx = std::max(mx, v);
    double z = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      out(r, c) = std::exp(x(r, c) - mx);
      z += out(r, c);
    }
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) /= z;
  }
  return out;
}

std::vector<std::int32_t> argmax_rows(const Tensor& x) {
  std::vector<std::int32_t> out(x.rows(), 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < x.cols(); ++c) {
      if (x(r, c) > x(r, best)) best = c;
    }
    out[r] = static_cast<std::int32_t>(best);
  }
  return out;
}

}  // namespace dyad::grad
