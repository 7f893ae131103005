#include "mpcm/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "mpcm/kernels/kernels.hpp"

namespace mpcm {

namespace {

const kernels::Kernels<real_t>& K() { return kernels::active<real_t>(); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

void require_rank(const Tensor& t, int rank, const char* op) {
  if (t.rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(t.shape()));
}

real_t stable_sigmoid(real_t x) {
  if (x >= real_t{0}) {
    real_t e = std::exp(-x);
    return real_t{1} / (real_t{1} + e);
  }
  real_t e = std::exp(x);
  return e / (real_t{1} + e);
}

void transpose_into(const real_t* src, real_t* dst, std::size_t r, std::size_t c) {
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) dst[j * r + i] = src[i * c + j];
}

std::size_t count_live(const Mask& m) {
  std::size_t n = 0;
  for (auto v : m) n += (v != 0);
  return n;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape());
  K().add(a.data(), b.data(), out.data(), a.size());
  tape.record([a, b, out]() mutable {
    const std::size_t n = out.size();
    K().axpy(real_t{1}, out.grad_data(), a.grad_data(), n);
    K().axpy(real_t{1}, out.grad_data(), b.grad_data(), n);
  });
  return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] - b.data()[i];
  tape.record([a, b, out]() mutable {
    const std::size_t n = out.size();
    K().axpy(real_t{1}, out.grad_data(), a.grad_data(), n);
    K().axpy(real_t{-1}, out.grad_data(), b.grad_data(), n);
  });
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape());
  K().mul(a.data(), b.data(), out.data(), a.size());
  tape.record([a, b, out]() mutable {
    const std::size_t n = out.size();
    K().madd(out.grad_data(), b.data(), a.grad_data(), n);
    K().madd(out.grad_data(), a.data(), b.grad_data(), n);
  });
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, real_t c) {
  Tensor out = Tensor::zeros(a.shape());
  K().scale(c, a.data(), out.data(), a.size());
  tape.record([a, out, c]() mutable { K().axpy(c, out.grad_data(), a.grad_data(), out.size()); });
  return out;
}

Tensor tanh(Tape& tape, const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = std::tanh(a.data()[i]);
  tape.record([a, out]() mutable {
    const std::size_t n = out.size();
    const real_t* y = out.data();
    const real_t* g = out.grad_data();
    real_t* da = a.grad_data();
    for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * (real_t{1} - y[i] * y[i]);
  });
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = stable_sigmoid(a.data()[i]);
  tape.record([a, out]() mutable {
    const std::size_t n = out.size();
    const real_t* y = out.data();
    const real_t* g = out.grad_data();
    real_t* da = a.grad_data();
    for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * y[i] * (real_t{1} - y[i]);
  });
  return out;
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner extents disagree, " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  const std::size_t m = static_cast<std::size_t>(a.rows());
  const std::size_t k = static_cast<std::size_t>(a.cols());
  const std::size_t n = static_cast<std::size_t>(b.cols());
  Tensor out = Tensor::zeros({a.rows(), b.cols()});
  K().gemm(a.data(), b.data(), out.data(), m, k, n);
  tape.record([a, b, out, m, k, n]() mutable {
    // dA += dC * B^T, dB += A^T * dC
    std::vector<real_t> bt(k * n);
    transpose_into(b.data(), bt.data(), k, n);
    K().gemm(out.grad_data(), bt.data(), a.grad_data(), m, n, k);
    std::vector<real_t> at(m * k);
    transpose_into(a.data(), at.data(), m, k);
    K().gemm(at.data(), out.grad_data(), b.grad_data(), k, m, n);
  });
  return out;
}

Tensor vecmat(Tape& tape, const Tensor& v, const Tensor& m) {
  require_rank(v, 1, "vecmat");
  require_rank(m, 2, "vecmat");
  if (v.extent(0) != m.rows())
    throw DimensionError("vecmat: " + shape_str(v.shape()) + " vs " + shape_str(m.shape()));
  const std::size_t k = static_cast<std::size_t>(m.rows());
  const std::size_t n = static_cast<std::size_t>(m.cols());
  Tensor out = Tensor::zeros({m.cols()});
  K().gemm(v.data(), m.data(), out.data(), 1, k, n);
  tape.record([v, m, out, k, n]() mutable {
    const real_t* g = out.grad_data();
    real_t* dv = v.grad_data();
    real_t* dm = m.grad_data();
    const real_t* mv = m.data();
    const real_t* vv = v.data();
    for (std::size_t p = 0; p < k; ++p) {
      dv[p] += K().dot(mv + p * n, g, n);
      K().axpy(vv[p], g, dm + p * n, n);
    }
  });
  return out;
}

Tensor matvec(Tape& tape, const Tensor& m, const Tensor& v) {
  require_rank(m, 2, "matvec");
  require_rank(v, 1, "matvec");
  if (m.cols() != v.extent(0))
    throw DimensionError("matvec: " + shape_str(m.shape()) + " vs " + shape_str(v.shape()));
  const std::size_t n = static_cast<std::size_t>(m.rows());
  const std::size_t d = static_cast<std::size_t>(m.cols());
  Tensor out = Tensor::zeros({m.rows()});
  for (std::size_t i = 0; i < n; ++i) out.data()[i] = K().dot(m.data() + i * d, v.data(), d);
  tape.record([m, v, out, n, d]() mutable {
    const real_t* g = out.grad_data();
    real_t* dm = m.grad_data();
    real_t* dv = v.grad_data();
    for (std::size_t i = 0; i < n; ++i) {
      K().axpy(g[i], v.data(), dm + i * d, d);
      K().axpy(g[i], m.data() + i * d, dv, d);
    }
  });
  return out;
}

Tensor add_scalar_broadcast(Tape& tape, const Tensor& v, const Tensor& s) {
  require_rank(v, 1, "add_scalar_broadcast");
  if (!s.is_scalar())
    throw DimensionError("add_scalar_broadcast: second operand must be scalar, got " +
                         shape_str(s.shape()));
  Tensor out = Tensor::zeros(v.shape());
  const real_t sv = s.item();
  for (std::size_t i = 0; i < v.size(); ++i) out.data()[i] = v.data()[i] + sv;
  tape.record([v, s, out]() mutable {
    const real_t* g = out.grad_data();
    K().axpy(real_t{1}, g, v.grad_data(), out.size());
    s.grad_data()[0] += K().sum(g, out.size());
  });
  return out;
}

Tensor sum(Tape& tape, const Tensor& a) {
  Tensor out = Tensor::scalar_value(K().sum(a.data(), a.size()));
  tape.record([a, out]() mutable {
    const real_t g = out.grad_data()[0];
    real_t* da = a.grad_data();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) da[i] += g;
  });
  return out;
}

Tensor l2_norm(Tape& tape, const Tensor& a) {
  const real_t norm = std::sqrt(K().sumsq(a.data(), a.size()));
  Tensor out = Tensor::scalar_value(norm);
  if (norm >= static_cast<real_t>(kCosineEps)) {
    tape.record([a, out, norm]() mutable {
      K().axpy(out.grad_data()[0] / norm, a.data(), a.grad_data(), a.size());
    });
  }
  return out;
}

Tensor cosine(Tape& tape, const Tensor& v1, const Tensor& v2) {
  require_rank(v1, 1, "cosine");
  require_rank(v2, 1, "cosine");
  if (v1.extent(0) != v2.extent(0))
    throw DimensionError("cosine: length mismatch " + shape_str(v1.shape()) + " vs " +
                         shape_str(v2.shape()));
  const std::size_t n = v1.size();
  const real_t n1 = std::sqrt(K().sumsq(v1.data(), n));
  const real_t n2 = std::sqrt(K().sumsq(v2.data(), n));
  if (n1 < static_cast<real_t>(kCosineEps) || n2 < static_cast<real_t>(kCosineEps))
    return Tensor::scalar_value(real_t{0});
  const real_t c = K().dot(v1.data(), v2.data(), n) / (n1 * n2);
  Tensor out = Tensor::scalar_value(c);
  tape.record([v1, v2, out, n1, n2, c]() mutable {
    const real_t g = out.grad_data()[0];
    const std::size_t n = v1.size();
    K().axpy(g / (n1 * n2), v2.data(), v1.grad_data(), n);
    K().axpy(-g * c / (n1 * n1), v1.data(), v1.grad_data(), n);
    K().axpy(g / (n1 * n2), v1.data(), v2.grad_data(), n);
    K().axpy(-g * c / (n2 * n2), v2.data(), v2.grad_data(), n);
  });
  return out;
}

Tensor cosine_matrix(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "cosine_matrix");
  require_rank(b, 2, "cosine_matrix");
  if (a.cols() != b.cols())
    throw DimensionError("cosine_matrix: widths disagree, " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  const std::size_t m = static_cast<std::size_t>(a.rows());
  const std::size_t n = static_cast<std::size_t>(b.rows());
  const std::size_t d = static_cast<std::size_t>(a.cols());
  const real_t eps = static_cast<real_t>(kCosineEps);

  std::vector<real_t> na(m), nb(n);
  for (std::size_t i = 0; i < m; ++i) na[i] = std::sqrt(K().sumsq(a.data() + i * d, d));
  for (std::size_t j = 0; j < n; ++j) nb[j] = std::sqrt(K().sumsq(b.data() + j * d, d));

  Tensor out = Tensor::zeros({a.rows(), b.rows()});
  for (std::size_t i = 0; i < m; ++i) {
    if (na[i] < eps) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (nb[j] < eps) continue;
      out.data()[i * n + j] = K().dot(a.data() + i * d, b.data() + j * d, d) / (na[i] * nb[j]);
    }
  }
  tape.record([a, b, out, na = std::move(na), nb = std::move(nb), m, n, d, eps]() mutable {
    real_t* da = a.grad_data();
    real_t* db = b.grad_data();
    for (std::size_t i = 0; i < m; ++i) {
      if (na[i] < eps) continue;
      const real_t* ai = a.data() + i * d;
      for (std::size_t j = 0; j < n; ++j) {
        const real_t g = out.grad()[i * n + j];
        if (g == real_t{0} || nb[j] < eps) continue;
        const real_t* bj = b.data() + j * d;
        const real_t c = out.at(static_cast<int>(i), static_cast<int>(j));
        const real_t inv = real_t{1} / (na[i] * nb[j]);
        K().axpy(g * inv, bj, da + i * d, d);
        K().axpy(-g * c / (na[i] * na[i]), ai, da + i * d, d);
        K().axpy(g * inv, ai, db + j * d, d);
        K().axpy(-g * c / (nb[j] * nb[j]), bj, db + j * d, d);
      }
    }
  });
  return out;
}

Tensor masked_softmax(Tape& tape, const Tensor& logits, const Mask& mask) {
  require_rank(logits, 1, "masked_softmax");
  const std::size_t n = logits.size();
  if (mask.size() != n)
    throw DimensionError("masked_softmax: mask size " + std::to_string(mask.size()) +
                         " vs logits " + shape_str(logits.shape()));
  if (count_live(mask) == 0) throw InvalidInputError("masked_softmax: all positions masked");

  real_t maxv = -std::numeric_limits<real_t>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i] && logits.data()[i] > maxv) maxv = logits.data()[i];
  Tensor out = Tensor::zeros(logits.shape());
  real_t z = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const real_t e = std::exp(logits.data()[i] - maxv);
    out.data()[i] = e;
    z += e;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) out.data()[i] /= z;

  tape.record([logits, out, mask]() mutable {
    const std::size_t n = out.size();
    const real_t* p = out.data();
    const real_t* g = out.grad_data();
    real_t dotpg = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) dotpg += p[i] * g[i];
    real_t* dl = logits.grad_data();
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) dl[i] += p[i] * (g[i] - dotpg);
  });
  return out;
}

namespace {

Tensor pool_impl(Tape& tape, const Tensor& values, const Mask& row_mask, bool take_max,
                 const char* op) {
  require_rank(values, 2, op);
  const std::size_t n = static_cast<std::size_t>(values.rows());
  const std::size_t l = static_cast<std::size_t>(values.cols());
  if (row_mask.size() != n)
    throw DimensionError(std::string(op) + ": mask size " + std::to_string(row_mask.size()) +
                         " vs rows " + std::to_string(n));
  const std::size_t live = count_live(row_mask);
  if (live == 0) throw InvalidInputError(std::string(op) + ": all rows masked");

  Tensor out = Tensor::zeros({values.cols()});
  if (take_max) {
    std::vector<int> arg(l, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (!row_mask[i]) continue;
      const real_t* r = values.data() + i * l;
      for (std::size_t c = 0; c < l; ++c) {
        if (arg[c] < 0 || r[c] > out.data()[c]) {
          out.data()[c] = r[c];
          arg[c] = static_cast<int>(i);
        }
      }
    }
    tape.record([values, out, arg = std::move(arg), l]() mutable {
      const real_t* g = out.grad_data();
      real_t* dv = values.grad_data();
      for (std::size_t c = 0; c < l; ++c)
        dv[static_cast<std::size_t>(arg[c]) * l + c] += g[c];
    });
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (row_mask[i]) K().axpy(real_t{1}, values.data() + i * l, out.data(), l);
    const real_t inv = real_t{1} / static_cast<real_t>(live);
    K().scale(inv, out.data(), out.data(), l);
    tape.record([values, out, row_mask, inv, n, l]() mutable {
      const real_t* g = out.grad_data();
      real_t* dv = values.grad_data();
      for (std::size_t i = 0; i < n; ++i)
        if (row_mask[i]) K().axpy(inv, g, dv + i * l, l);
    });
  }
  return out;
}

}  // namespace

Tensor pool_max(Tape& tape, const Tensor& values, const Mask& row_mask) {
  return pool_impl(tape, values, row_mask, true, "pool_max");
}

Tensor pool_mean(Tape& tape, const Tensor& values, const Mask& row_mask) {
  return pool_impl(tape, values, row_mask, false, "pool_mean");
}

Tensor concat(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidInputError("concat: no parts");
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank(p, 1, "concat");
    total += p.size();
  }
  Tensor out = Tensor::zeros({static_cast<int>(total)});
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::memcpy(out.data() + off, p.data(), p.size() * sizeof(real_t));
    off += p.size();
  }
  tape.record([parts, out]() mutable {
    std::size_t off = 0;
    for (auto& p : parts) {
      K().axpy(real_t{1}, out.grad_data() + off, p.grad_data(), p.size());
      off += p.size();
    }
  });
  return out;
}

Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidInputError("concat_cols: no parts");
  const int n = parts.front().rows();
  int width = 0;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.rows() != n)
      throw DimensionError("concat_cols: row counts disagree, " + shape_str(p.shape()) + " vs " +
                           shape_str(parts.front().shape()));
    width += p.cols();
  }
  Tensor out = Tensor::zeros({n, width});
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t w = static_cast<std::size_t>(p.cols());
    for (int i = 0; i < n; ++i)
      std::memcpy(out.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(width) + off,
                  p.data() + static_cast<std::size_t>(i) * w, w * sizeof(real_t));
    off += w;
  }
  tape.record([parts, out, n, width]() mutable {
    std::size_t off = 0;
    for (auto& p : parts) {
      const std::size_t w = static_cast<std::size_t>(p.cols());
      for (int i = 0; i < n; ++i)
        K().axpy(real_t{1},
                 out.grad_data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(width) + off,
                 p.grad_data() + static_cast<std::size_t>(i) * w, w);
      off += w;
    }
  });
  return out;
}

Tensor stack_rows(Tape& tape, const std::vector<Tensor>& rows) {
  if (rows.empty()) throw InvalidInputError("stack_rows: no rows");
  const std::size_t d = rows.front().size();
  for (const auto& r : rows) {
    require_rank(r, 1, "stack_rows");
    if (r.size() != d)
      throw DimensionError("stack_rows: lengths disagree, " + shape_str(r.shape()) + " vs " +
                           shape_str(rows.front().shape()));
  }
  Tensor out = Tensor::zeros({static_cast<int>(rows.size()), static_cast<int>(d)});
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::memcpy(out.data() + i * d, rows[i].data(), d * sizeof(real_t));
  tape.record([rows, out, d]() mutable {
    for (std::size_t i = 0; i < rows.size(); ++i)
      K().axpy(real_t{1}, out.grad_data() + i * d, rows[i].grad_data(), d);
  });
  return out;
}

Tensor slice(Tape& tape, const Tensor& v, int start, int len) {
  require_rank(v, 1, "slice");
  if (start < 0 || len <= 0 || start + len > v.extent(0))
    throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + len) + ") outside " + shape_str(v.shape()));
  Tensor out = Tensor::zeros({len});
  std::memcpy(out.data(), v.data() + start, static_cast<std::size_t>(len) * sizeof(real_t));
  tape.record([v, out, start, len]() mutable {
    K().axpy(real_t{1}, out.grad_data(), v.grad_data() + start, static_cast<std::size_t>(len));
  });
  return out;
}

Tensor row(Tape& tape, const Tensor& m, int r) {
  require_rank(m, 2, "row");
  if (r < 0 || r >= m.rows())
    throw DimensionError("row: index " + std::to_string(r) + " outside " + shape_str(m.shape()));
  const std::size_t d = static_cast<std::size_t>(m.cols());
  Tensor out = Tensor::zeros({m.cols()});
  std::memcpy(out.data(), m.data() + static_cast<std::size_t>(r) * d, d * sizeof(real_t));
  tape.record([m, out, r, d]() mutable {
    K().axpy(real_t{1}, out.grad_data(), m.grad_data() + static_cast<std::size_t>(r) * d, d);
  });
  return out;
}

Tensor scale_rows(Tape& tape, const Tensor& m, const Tensor& s) {
  require_rank(m, 2, "scale_rows");
  require_rank(s, 1, "scale_rows");
  if (s.extent(0) != m.rows())
    throw DimensionError("scale_rows: " + shape_str(s.shape()) + " vs " + shape_str(m.shape()));
  const std::size_t n = static_cast<std::size_t>(m.rows());
  const std::size_t d = static_cast<std::size_t>(m.cols());
  Tensor out = Tensor::zeros(m.shape());
  for (std::size_t i = 0; i < n; ++i)
    K().scale(s.data()[i], m.data() + i * d, out.data() + i * d, d);
  tape.record([m, s, out, n, d]() mutable {
    real_t* dm = m.grad_data();
    real_t* ds = s.grad_data();
    const real_t* g = out.grad_data();
    for (std::size_t i = 0; i < n; ++i) {
      K().axpy(s.data()[i], g + i * d, dm + i * d, d);
      ds[i] += K().dot(m.data() + i * d, g + i * d, d);
    }
  });
  return out;
}

Tensor mul_rowbroadcast(Tape& tape, const Tensor& m, const Tensor& v) {
  require_rank(m, 2, "mul_rowbroadcast");
  require_rank(v, 1, "mul_rowbroadcast");
  if (v.extent(0) != m.cols())
    throw DimensionError("mul_rowbroadcast: " + shape_str(v.shape()) + " vs " +
                         shape_str(m.shape()));
  const std::size_t n = static_cast<std::size_t>(m.rows());
  const std::size_t d = static_cast<std::size_t>(m.cols());
  Tensor out = Tensor::zeros(m.shape());
  for (std::size_t i = 0; i < n; ++i)
    K().mul(m.data() + i * d, v.data(), out.data() + i * d, d);
  tape.record([m, v, out, n, d]() mutable {
    real_t* dm = m.grad_data();
    real_t* dv = v.grad_data();
    const real_t* g = out.grad_data();
    for (std::size_t i = 0; i < n; ++i) {
      K().madd(g + i * d, v.data(), dm + i * d, d);
      K().madd(g + i * d, m.data() + i * d, dv, d);
    }
  });
  return out;
}

Tensor add_rowbroadcast(Tape& tape, const Tensor& m, const Tensor& v) {
  require_rank(m, 2, "add_rowbroadcast");
  require_rank(v, 1, "add_rowbroadcast");
  if (v.extent(0) != m.cols())
    throw DimensionError("add_rowbroadcast: " + shape_str(v.shape()) + " vs " +
                         shape_str(m.shape()));
  const std::size_t n = static_cast<std::size_t>(m.rows());
  const std::size_t d = static_cast<std::size_t>(m.cols());
  Tensor out = Tensor::zeros(m.shape());
  for (std::size_t i = 0; i < n; ++i)
    K().add(m.data() + i * d, v.data(), out.data() + i * d, d);
  tape.record([m, v, out, n, d]() mutable {
    real_t* dm = m.grad_data();
    real_t* dv = v.grad_data();
    const real_t* g = out.grad_data();
    K().axpy(real_t{1}, g, dm, n * d);
    for (std::size_t i = 0; i < n; ++i) K().axpy(real_t{1}, g + i * d, dv, d);
  });
  return out;
}

Tensor gather_rows(Tape& tape, const Tensor& table, const std::vector<int>& indices) {
  require_rank(table, 2, "gather_rows");
  const std::size_t d = static_cast<std::size_t>(table.cols());
  for (int idx : indices)
    if (idx < 0 || idx >= table.rows())
      throw InvalidInputError("gather_rows: index " + std::to_string(idx) + " outside table " +
                              shape_str(table.shape()));
  Tensor out = Tensor::zeros({static_cast<int>(indices.size()), table.cols()});
  for (std::size_t i = 0; i < indices.size(); ++i)
    std::memcpy(out.data() + i * d, table.data() + static_cast<std::size_t>(indices[i]) * d,
                d * sizeof(real_t));
  // Frozen embedding tables skip the scatter entirely; their gradient is
  // never consumed and the buffer would dominate memory.
  if (table.requires_grad()) {
    tape.record([table, out, indices, d]() mutable {
      real_t* dt = table.grad_data();
      for (std::size_t i = 0; i < indices.size(); ++i)
        K().axpy(real_t{1}, out.grad_data() + i * d,
                 dt + static_cast<std::size_t>(indices[i]) * d, d);
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& x, real_t rate, CounterRng& rng) {
  if (rate == real_t{0}) return x;
  if (!(rate > real_t{0} && rate < real_t{1}))
    throw InvalidInputError("dropout: rate must lie in [0,1), got " + std::to_string(rate));
  Mask keep(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    keep[i] = rng.uniform01() >= static_cast<double>(rate) ? 1 : 0;
  return dropout_mask_apply(tape, x, keep, real_t{1} - rate);
}

Tensor dropout_mask_apply(Tape& tape, const Tensor& x, const Mask& keep, real_t keep_prob) {
  if (keep.size() != x.size())
    throw DimensionError("dropout_mask_apply: mask size " + std::to_string(keep.size()) +
                         " vs tensor " + shape_str(x.shape()));
  if (!(keep_prob > real_t{0} && keep_prob <= real_t{1}))
    throw InvalidInputError("dropout_mask_apply: keep_prob out of (0,1]");
  const real_t inv = real_t{1} / keep_prob;
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.data()[i] = keep[i] ? x.data()[i] * inv : real_t{0};
  tape.record([x, out, keep, inv]() mutable {
    const real_t* g = out.grad_data();
    real_t* dx = x.grad_data();
    for (std::size_t i = 0; i < x.size(); ++i)
      if (keep[i]) dx[i] += g[i] * inv;
  });
  return out;
}

namespace {

// Weighted-cosine core shared by the matching ops. For perspective row w,
// a = w o u and b = w o v:
//   c = a.b / (|a||b|)
// The zero-norm convention (either |a| or |b| below kCosineEps) maps to
// c = 0 with zero gradient, so filtered-out or padded vectors are inert.
struct WeightedCos {
  real_t value = 0;
  real_t nasq = 0, nbsq = 0, ab = 0;
  bool live = false;  // false when the zero-norm convention applied
};

WeightedCos weighted_cos(const real_t* w, const real_t* u, const real_t* v, std::size_t h) {
  WeightedCos r;
  for (std::size_t t = 0; t < h; ++t) {
    const real_t a = w[t] * u[t];
    const real_t b = w[t] * v[t];
    r.ab += a * b;
    r.nasq += a * a;
    r.nbsq += b * b;
  }
  const real_t epssq = static_cast<real_t>(kCosineEps * kCosineEps);
  if (r.nasq < epssq || r.nbsq < epssq) return r;
  r.live = true;
  r.value = r.ab / std::sqrt(r.nasq * r.nbsq);
  return r;
}

// Adds g * d(cos)/d{u, v, w} for one (u, v, w) triple. du/dv/dw may be
// null when that input takes no gradient.
void weighted_cos_backward(const real_t* w, const real_t* u, const real_t* v, std::size_t h,
                           const WeightedCos& f, real_t g, real_t* du, real_t* dv, real_t* dw) {
  if (!f.live || g == real_t{0}) return;
  const real_t na = std::sqrt(f.nasq);
  const real_t nb = std::sqrt(f.nbsq);
  const real_t inv = real_t{1} / (na * nb);
  const real_t c = f.value;
  for (std::size_t t = 0; t < h; ++t) {
    const real_t a = w[t] * u[t];
    const real_t b = w[t] * v[t];
    const real_t ga = g * (b * inv - c * a / f.nasq);
    const real_t gb = g * (a * inv - c * b / f.nbsq);
    if (du) du[t] += w[t] * ga;
    if (dv) dv[t] += w[t] * gb;
    if (dw) dw[t] += u[t] * ga + v[t] * gb;
  }
}

void require_perspective_shapes(const Tensor& w, int h, const char* op) {
  require_rank(w, 2, op);
  if (w.cols() != h)
    throw DimensionError(std::string(op) + ": perspective width " + shape_str(w.shape()) +
                         " vs state width " + std::to_string(h));
}

}  // namespace

Tensor multi_perspective_match(Tape& tape, const Tensor& v1, const Tensor& v2, const Tensor& w) {
  require_rank(v1, 1, "multi_perspective_match");
  require_same_shape(v1, v2, "multi_perspective_match");
  require_perspective_shapes(w, v1.extent(0), "multi_perspective_match");
  const std::size_t l = static_cast<std::size_t>(w.rows());
  const std::size_t h = static_cast<std::size_t>(w.cols());

  Tensor out = Tensor::zeros({w.rows()});
  std::vector<WeightedCos> fs(l);
  for (std::size_t k = 0; k < l; ++k) {
    fs[k] = weighted_cos(w.data() + k * h, v1.data(), v2.data(), h);
    out.data()[k] = fs[k].value;
  }
  tape.record([v1, v2, w, out, fs = std::move(fs), l, h]() mutable {
    for (std::size_t k = 0; k < l; ++k)
      weighted_cos_backward(w.data() + k * h, v1.data(), v2.data(), h, fs[k],
                            out.grad_data()[k], v1.grad_data(), v2.grad_data(),
                            w.grad_data() + k * h);
  });
  return out;
}

Tensor mpm_full(Tape& tape, const Tensor& states, const Tensor& target, const Tensor& w) {
  require_rank(states, 2, "mpm_full");
  require_rank(target, 1, "mpm_full");
  if (states.cols() != target.extent(0))
    throw DimensionError("mpm_full: " + shape_str(states.shape()) + " vs target " +
                         shape_str(target.shape()));
  require_perspective_shapes(w, states.cols(), "mpm_full");
  const std::size_t n = static_cast<std::size_t>(states.rows());
  const std::size_t l = static_cast<std::size_t>(w.rows());
  const std::size_t h = static_cast<std::size_t>(w.cols());

  Tensor out = Tensor::zeros({states.rows(), w.rows()});
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < l; ++k)
      out.data()[j * l + k] =
          weighted_cos(w.data() + k * h, states.data() + j * h, target.data(), h).value;

  tape.record([states, target, w, out, n, l, h]() mutable {
    for (std::size_t j = 0; j < n; ++j) {
      const real_t* sj = states.data() + j * h;
      for (std::size_t k = 0; k < l; ++k) {
        const real_t g = out.grad()[j * l + k];
        if (g == real_t{0}) continue;
        const real_t* wk = w.data() + k * h;
        WeightedCos f = weighted_cos(wk, sj, target.data(), h);
        weighted_cos_backward(wk, sj, target.data(), h, f, g, states.grad_data() + j * h,
                              target.grad_data(), w.grad_data() + k * h);
      }
    }
  });
  return out;
}

Tensor mpm_pool(Tape& tape, const Tensor& states, const Tensor& question, const Mask& qmask,
                const Tensor& w, PoolKind kind) {
  require_rank(states, 2, "mpm_pool");
  require_rank(question, 2, "mpm_pool");
  if (states.cols() != question.cols())
    throw DimensionError("mpm_pool: " + shape_str(states.shape()) + " vs question " +
                         shape_str(question.shape()));
  require_perspective_shapes(w, states.cols(), "mpm_pool");
  const std::size_t n = static_cast<std::size_t>(states.rows());
  const std::size_t m = static_cast<std::size_t>(question.rows());
  const std::size_t l = static_cast<std::size_t>(w.rows());
  const std::size_t h = static_cast<std::size_t>(w.cols());
  if (qmask.size() != m)
    throw DimensionError("mpm_pool: mask size " + std::to_string(qmask.size()) + " vs question " +
                         shape_str(question.shape()));
  const std::size_t live = count_live(qmask);
  if (live == 0) throw InvalidInputError("mpm_pool: all question rows masked");

  Tensor out = Tensor::zeros({states.rows(), w.rows()});
  std::vector<int> argmax;
  if (kind == PoolKind::max) argmax.assign(n * l, -1);
  const real_t invlive = real_t{1} / static_cast<real_t>(live);

  for (std::size_t j = 0; j < n; ++j) {
    const real_t* sj = states.data() + j * h;
    for (std::size_t k = 0; k < l; ++k) {
      const real_t* wk = w.data() + k * h;
      real_t acc = 0;
      int arg = -1;
      for (std::size_t i = 0; i < m; ++i) {
        if (!qmask[i]) continue;
        const real_t c = weighted_cos(wk, sj, question.data() + i * h, h).value;
        if (kind == PoolKind::max) {
          if (arg < 0 || c > acc) {
            acc = c;
            arg = static_cast<int>(i);
          }
        } else {
          acc += c;
        }
      }
      if (kind == PoolKind::max) {
        out.data()[j * l + k] = acc;
        argmax[j * l + k] = arg;
      } else {
        out.data()[j * l + k] = acc * invlive;
      }
    }
  }

  tape.record([states, question, w, out, qmask, argmax = std::move(argmax), kind, n, m, l, h,
               invlive]() mutable {
    for (std::size_t j = 0; j < n; ++j) {
      const real_t* sj = states.data() + j * h;
      real_t* dsj = states.grad_data() + j * h;
      for (std::size_t k = 0; k < l; ++k) {
        const real_t g = out.grad()[j * l + k];
        if (g == real_t{0}) continue;
        const real_t* wk = w.data() + k * h;
        real_t* dwk = w.grad_data() + k * h;
        if (kind == PoolKind::max) {
          const int i = argmax[j * l + k];
          const real_t* qi = question.data() + static_cast<std::size_t>(i) * h;
          WeightedCos f = weighted_cos(wk, sj, qi, h);
          weighted_cos_backward(wk, sj, qi, h, f, g, dsj,
                                question.grad_data() + static_cast<std::size_t>(i) * h, dwk);
        } else {
          for (std::size_t i = 0; i < m; ++i) {
            if (!qmask[i]) continue;
            const real_t* qi = question.data() + i * h;
            WeightedCos f = weighted_cos(wk, sj, qi, h);
            weighted_cos_backward(wk, sj, qi, h, f, g * invlive, dsj,
                                  question.grad_data() + i * h, dwk);
          }
        }
      }
    }
  });
  return out;
}

Tensor span_nll(Tape& tape, const Tensor& probs, int index, const Mask& mask) {
  require_rank(probs, 1, "span_nll");
  if (index < 0 || index >= probs.extent(0))
    throw InvalidInputError("span_nll: index " + std::to_string(index) + " outside " +
                            shape_str(probs.shape()));
  if (mask.size() != probs.size() || !mask[static_cast<std::size_t>(index)])
    throw InvalidInputError("span_nll: gold index " + std::to_string(index) +
                            " falls on a masked position");
  const real_t p = probs.at(index);
  const real_t clamped = std::max(p, static_cast<real_t>(kLogClamp));
  Tensor out = Tensor::scalar_value(-std::log(clamped));
  if (p > static_cast<real_t>(kLogClamp)) {
    tape.record([probs, out, index, p]() mutable {
      probs.grad_data()[index] -= out.grad_data()[0] / p;
    });
  }
  return out;
}

}  // namespace mpcm
