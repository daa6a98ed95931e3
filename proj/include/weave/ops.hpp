#pragma once

#include <cstdint>
#include <vector>

#include "weave/tape.hpp"
#include "weave/tensor.hpp"

namespace weave::ops {

using TokenId = std::int64_t;

enum class Reduction { Mean, Sum };

constexpr TokenId kIgnoreIndex = -100;

// All ops record a backward rule on `tape` when it is non-null and at least
// one input requires grad. With a null tape they are plain forward math.

// [m x k] * [k x n] -> [m x n]. Row-major i/j/k accumulation, matching the
// naive triple-loop reference bit for bit.
Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b);

// [m x k] * [n x k]^T -> [m x n]; the x*W^T form used by linear layers.
Tensor matmul_nt(Tape* tape, const Tensor& a, const Tensor& b);

Tensor add(Tape* tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape* tape, const Tensor& a, double c);

// Adds bias[n] to every row of a[m x n].
Tensor add_bias(Tape* tape, const Tensor& a, const Tensor& bias);

Tensor silu(Tape* tape, const Tensor& a);

// Row-wise RMS normalization with a learned gain vector.
Tensor rmsnorm(Tape* tape, const Tensor& x, const Tensor& gain,
               double eps = 1e-5);

// Softmax over the causal prefix of each row: row r is normalized over
// columns 0..r and zero beyond. Input must be square [n x n].
Tensor causal_softmax(Tape* tape, const Tensor& scores);

// Gather rows of table[V x d] by token id; backward scatters into the table.
Tensor embedding_rows(Tape* tape, const Tensor& table,
                      const std::vector<TokenId>& ids);

Tensor slice_cols(Tape* tape, const Tensor& a, Dim start, Dim count);
Tensor concat_cols(Tape* tape, const std::vector<Tensor>& parts);

Tensor sum(Tape* tape, const Tensor& a);
Tensor mean(Tape* tape, const Tensor& a);

// Mean (or sum) of -log softmax(logits[n])[target_n] over rows whose target
// is not `ignore_index`. Ignored rows contribute nothing to the value or the
// gradient; perturbing them leaves the result bit-identical.
Tensor softmax_cross_entropy_ignore(Tape* tape, const Tensor& logits,
                                    const std::vector<TokenId>& targets,
                                    TokenId ignore_index = kIgnoreIndex,
                                    Reduction reduction = Reduction::Mean);

} // namespace weave::ops
