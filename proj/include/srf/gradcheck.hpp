#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "srf/tensor.hpp"

namespace srf {

/// Compares the autodiff gradient of `fn` at `x` against central differences.
/// Returns max over elements of |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|, r),
/// where r is 1e4 times the round-off of the difference quotient (eps*|f|/step).
double finite_diff_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& x, double step = 1e-5);

/// Same comparison for a closure over parameter tensors, restricted to
/// `samples` randomly chosen scalar entries (all entries when samples == 0).
/// Parameter values are restored afterwards; their grads are overwritten.
double finite_diff_check_params(const std::function<Tensor()>& loss_fn, std::span<Tensor> params,
                                std::size_t samples, std::uint64_t seed, double step = 1e-5);

}  // namespace srf
