#pragma once

#include <vector>

#include "mpcm/rng.hpp"
#include "mpcm/tensor/tape.hpp"
#include "mpcm/tensor/tensor.hpp"

namespace mpcm {

// Differentiable primitives. Every function computes its value eagerly and,
// when the tape is recording, pushes a closure that adds the operation's
// vector-Jacobian product into the inputs' grad buffers.

// Elementwise; shapes must match exactly.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, real_t c);
Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);

// [m x k] * [k x n] -> [m x n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// v[k] * M[k x n] -> [n]
Tensor vecmat(Tape& tape, const Tensor& v, const Tensor& m);
// M[n x d] * v[d] -> [n]
Tensor matvec(Tape& tape, const Tensor& m, const Tensor& v);
// v[n] + s (scalar tensor) -> [n]
Tensor add_scalar_broadcast(Tape& tape, const Tensor& v, const Tensor& s);

Tensor sum(Tape& tape, const Tensor& a);      // -> scalar
Tensor l2_norm(Tape& tape, const Tensor& a);  // -> scalar; zero gradient at 0

// v1'v2 / (|v1||v2|), defined as 0 (with zero gradient) when either norm
// falls below kCosineEps. Padded or fully filtered positions produce zero
// vectors, so the convention must be total.
inline constexpr double kCosineEps = 1e-12;
Tensor cosine(Tape& tape, const Tensor& v1, const Tensor& v2);
// All pairwise cosines between rows: A[m x d], B[n x d] -> [m x n].
Tensor cosine_matrix(Tape& tape, const Tensor& a, const Tensor& b);

// Softmax over live positions; masked entries are exactly zero. Stable via
// max subtraction. Throws InvalidInputError when everything is masked.
Tensor masked_softmax(Tape& tape, const Tensor& logits, const Mask& mask);

// Column-wise pooling over live rows of values[n x l] -> [l]. Max routes
// its gradient to the earliest argmax row; mean divides by the live count.
Tensor pool_max(Tape& tape, const Tensor& values, const Mask& row_mask);
Tensor pool_mean(Tape& tape, const Tensor& values, const Mask& row_mask);

// Structure ops.
Tensor concat(Tape& tape, const std::vector<Tensor>& parts);        // rank-1
Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts);   // rank-2, same rows
Tensor stack_rows(Tape& tape, const std::vector<Tensor>& rows);     // rank-1[d] x n -> [n x d]
Tensor slice(Tape& tape, const Tensor& v, int start, int len);      // rank-1
Tensor row(Tape& tape, const Tensor& m, int r);                     // [n x d] -> [d]

// Row-wise broadcasts over M[n x d].
Tensor scale_rows(Tape& tape, const Tensor& m, const Tensor& s);          // out[i,:] = s[i]*m[i,:]
Tensor mul_rowbroadcast(Tape& tape, const Tensor& m, const Tensor& v);    // out[i,:] = m[i,:]*v
Tensor add_rowbroadcast(Tape& tape, const Tensor& m, const Tensor& v);    // out[i,:] = m[i,:]+v

// Embedding lookup: rows of table[v x d] by index -> [n x d]. Backward
// scatter-adds into the table (frozen tables simply keep requires_grad off
// and their accumulated grads are never consumed).
Tensor gather_rows(Tape& tape, const Tensor& table, const std::vector<int>& indices);

// Inverted dropout. rate == 0 returns x unchanged; otherwise keeps each
// coordinate with probability 1-rate and rescales by 1/(1-rate). Mask draws
// come from the counter-based generator so they depend only on its key.
Tensor dropout(Tape& tape, const Tensor& x, real_t rate, CounterRng& rng);
Tensor dropout_mask_apply(Tape& tape, const Tensor& x, const Mask& keep, real_t keep_prob);

// Per-perspective weighted cosine: m_k = cos(W_k o v1, W_k o v2) for each
// row W_k of w[l x h] -> [l].
Tensor multi_perspective_match(Tape& tape, const Tensor& v1, const Tensor& v2, const Tensor& w);
// states[N x h] against one target[h]: out[j,k] = cos(W_k o states_j, W_k o target).
Tensor mpm_full(Tape& tape, const Tensor& states, const Tensor& target, const Tensor& w);

enum class PoolKind { max, mean };
// states[N x h] against every live question row[M x h], pooled over the
// question axis per perspective -> [N x l]. Max keeps the earliest argmax.
Tensor mpm_pool(Tape& tape, const Tensor& states, const Tensor& question, const Mask& qmask,
                const Tensor& w, PoolKind kind);

// -log(max(probs[index], clamp)) with clamp 1e-12; gradient is zero through
// a clamped probability. index is 0-based and must be live in the mask.
inline constexpr double kLogClamp = 1e-12;
Tensor span_nll(Tape& tape, const Tensor& probs, int index, const Mask& mask);

}  // namespace mpcm
