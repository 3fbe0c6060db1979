#pragma once

#include <array>
#include <cstddef>

#include "srf/tensor.hpp"

namespace srf {

enum class Pointwise { relu, sigmoid, tanh };

// Standard 2-D product. Both operands must be rank 2 with agreeing inner dims.
Tensor matmul(const Tensor& a, const Tensor& b);
// A[m x n] times x[n].
Tensor matvec(const Tensor& a, const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
// x[rows x n] + bias[n] broadcast over rows; x may also be rank 1 of length n.
Tensor add_rowwise(const Tensor& x, const Tensor& bias);

// relu'(0) is taken to be 0.
Tensor pointwise(const Tensor& x, Pointwise f);
inline Tensor relu(const Tensor& x) { return pointwise(x, Pointwise::relu); }
inline Tensor sigmoid(const Tensor& x) { return pointwise(x, Pointwise::sigmoid); }
inline Tensor tanh(const Tensor& x) { return pointwise(x, Pointwise::tanh); }

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
// Rank-3 axis permutation: out.dim(i) == x.dim(order[i]).
Tensor permute(const Tensor& x, std::array<std::size_t, 3> order);
// Rank-2 transpose.
Tensor transpose(const Tensor& x);
// Rank-1 or rank-2 row range [begin, end).
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
// [F x A] and [F x B] -> [F x (A + B)].
Tensor concat_cols(const Tensor& a, const Tensor& b);
// Reverses the leading axis.
Tensor flip_rows(const Tensor& x);

/// 2-D cross-correlation with zero "same" padding.
/// x: [C_in x H x W], w: [C_out x C_in x kh x kw], b: [C_out]; kh and kw odd.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b);

/// One GRU direction run over all rows of x ([steps x input]) with a zero
/// initial state. Parameters are gate-stacked in (z, r, h) order:
/// w [3H x input], u [3H x H], b [3H]. With `reverse` the scan runs from the
/// last row to the first; output row t is always the state after consuming
/// row t. Backward is hand-written BPTT over the whole sequence.
Tensor gru_sequence(const Tensor& x, const Tensor& w, const Tensor& u, const Tensor& b, bool reverse);

}  // namespace srf
