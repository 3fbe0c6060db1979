#include <gtest/gtest.h>

#include <random>

#include "../common/oracles.hpp"
#include "srf/gradcheck.hpp"
#include "srf/ops.hpp"

using namespace srf;

TEST(Tensor, RejectsMismatchedData) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_THROW(Tensor({2, 0}, {}), ShapeError);
}

TEST(Tensor, HandleSharesStorageCloneDoesNot) {
  Tensor a({2}, {1.0, 2.0});
  Tensor alias = a;
  Tensor copy = a.clone();
  a.mutable_data()[0] = 5.0;
  EXPECT_EQ(alias.at(0), 5.0);
  EXPECT_EQ(copy.at(0), 1.0);
}

TEST(Tensor, BackwardNeedsScalarLoss) {
  Tensor x({2}, {1.0, 2.0}, true);
  EXPECT_THROW(backward(scale(x, 2.0)), ContractError);
  EXPECT_THROW(backward(sum(Tensor({2}, {1.0, 2.0}))), ContractError);
}

TEST(Tensor, LeafGradientsAccumulateUntilZeroed) {
  Tensor x({3}, {1.0, -2.0, 0.5}, true);
  backward(sum(mul(x, x)));
  backward(sum(mul(x, x)));
  EXPECT_DOUBLE_EQ(x.grad()[1], 2 * 2 * -2.0);
  x.zero_grad();
  EXPECT_DOUBLE_EQ(x.grad()[1], 0.0);
}

TEST(Tensor, SharedSubexpressionGetsBothContributions) {
  // y = x*x + x: dy/dx = 2x + 1, with x reached through two paths.
  Tensor x({1}, {3.0}, true);
  backward(sum(add(mul(x, x), x)));
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
}

TEST(Tensor, GraphIsTopological) {
  std::mt19937_64 rng(3);
  auto a = oracle::random_tensor({4, 3}, rng).set_requires_grad(true);
  auto b = oracle::random_tensor({3, 5}, rng).set_requires_grad(true);
  auto loss = mean(tanh(matmul(a, b)));
  const auto g = Graph::trace(loss);
  EXPECT_TRUE(g.is_topological());
  EXPECT_EQ(g.size(), 6u);  // a, b, matmul, tanh, mean + nothing else
}

TEST(Tensor, NoGradGuardRecordsNothing) {
  Tensor x({2}, {1.0, 2.0}, true);
  {
    NoGradGuard guard;
    auto y = mul(x, x);
    EXPECT_FALSE(y.requires_grad());
    EXPECT_TRUE(y.is_leaf());
  }
  EXPECT_TRUE(mul(x, x).requires_grad());
}

TEST(Ops, MatmulMatchesNaiveLoops) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng() % 7, k = 1 + rng() % 9, n = 1 + rng() % 6;
    auto a = oracle::random_tensor({m, k}, rng);
    auto b = oracle::random_tensor({k, n}, rng);
    const auto want = oracle::matmul({a.data().begin(), a.data().end()}, {b.data().begin(), b.data().end()}, m, k, n);
    EXPECT_LT(oracle::max_abs_diff(matmul(a, b).data(), want), 1e-12);
  }
}

TEST(Ops, MatmulShapeErrorNamesBothShapes) {
  try {
    matmul(Tensor::zeros({2, 3}), Tensor::zeros({4, 5}));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos);
    EXPECT_NE(msg.find("[4x5]"), std::string::npos);
  }
}

TEST(Ops, Conv2dMatchesNaiveLoops) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t cin = 1 + rng() % 3, cout = 1 + rng() % 3, h = 1 + rng() % 6, w = 1 + rng() % 5;
    const std::size_t kh = 1 + 2 * (rng() % 2), kw = 1 + 2 * (rng() % 3);
    auto x = oracle::random_tensor({cin, h, w}, rng);
    auto k = oracle::random_tensor({cout, cin, kh, kw}, rng);
    auto b = oracle::random_tensor({cout}, rng);
    EXPECT_LT(oracle::max_abs_diff(conv2d(x, k, b).data(), oracle::conv2d(x, k, b)), 1e-12);
  }
}

TEST(Ops, Conv2dRejectsEvenKernel) {
  EXPECT_THROW(conv2d(Tensor::zeros({1, 4, 4}), Tensor::zeros({1, 1, 2, 3}), Tensor::zeros({1})), ConfigError);
}

TEST(Ops, Conv2dIdentityKernelCopiesInput) {
  std::mt19937_64 rng(5);
  auto x = oracle::random_tensor({1, 5, 4}, rng);
  Tensor k({1, 1, 3, 3}, {0, 0, 0, 0, 1, 0, 0, 0, 0});
  EXPECT_EQ(oracle::max_abs_diff(conv2d(x, k, Tensor::zeros({1})).data(), x.data()), 0.0);
}

TEST(Ops, PermuteAndTransposeMoveElements) {
  Tensor x({2, 3, 4}, [] {
    std::vector<double> v(24);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    return v;
  }());
  const auto y = permute(x, {2, 0, 1});
  EXPECT_EQ(y.shape(), (Shape{4, 2, 3}));
  // y[c][a][b] == x[a][b][c]
  EXPECT_EQ(y.at((3 * 2 + 1) * 3 + 2), x.at((1 * 3 + 2) * 4 + 3));
  const auto t = transpose(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(std::vector<double>(t.data().begin(), t.data().end()), (std::vector<double>{1, 4, 2, 5, 3, 6}));
}

TEST(Ops, ReluDerivativeAtZeroIsZero) {
  Tensor x({3}, {-1.0, 0.0, 2.0}, true);
  backward(sum(relu(x)));
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(x.grad()[1], 0.0);
  EXPECT_EQ(x.grad()[2], 1.0);
}

TEST(Ops, ElementwiseGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  const auto other = oracle::random_tensor({3, 4}, rng);
  const auto bias = oracle::random_tensor({4}, rng);
  const auto x = oracle::random_tensor({3, 4}, rng);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(mul(sigmoid(t), other)); }, x), 1e-6);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return mean(tanh(add_rowwise(t, bias))); }, x), 1e-6);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(mul(sub(t, other), add_scalar(t, 0.3))); }, x), 1e-6);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(mul(flip_rows(t), other)); }, x), 1e-6);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(mul(slice_rows(t, 1, 3), slice_rows(other, 0, 2))); },
                              x),
            1e-6);
}

TEST(Ops, ShapeOpsGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(22);
  const auto x = oracle::random_tensor({2, 3, 4}, rng);
  const auto weights = oracle::random_tensor({4, 2, 3}, rng);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(mul(permute(t, {2, 0, 1}), weights)); }, x), 1e-6);
  const auto w2 = oracle::random_tensor({6, 4}, rng);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(mul(tanh(reshape(t, {6, 4})), w2)); }, x), 1e-6);
  const auto m = oracle::random_tensor({3, 2}, rng);
  const auto a = oracle::random_tensor({3, 5}, rng);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(tanh(concat_cols(t, a))); }, m), 1e-6);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(tanh(transpose(t))); }, m), 1e-6);
}

TEST(Ops, MatmulAndConvGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(23);
  const auto b = oracle::random_tensor({4, 3}, rng);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(tanh(matmul(t, b))); },
                              oracle::random_tensor({2, 4}, rng)),
            1e-6);
  const auto v = oracle::random_tensor({4}, rng);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(tanh(matvec(t, v))); },
                              oracle::random_tensor({3, 4}, rng)),
            1e-6);
  const auto k = oracle::random_tensor({2, 3, 3, 3}, rng);
  const auto kb = oracle::random_tensor({2}, rng);
  const auto x = oracle::random_tensor({3, 5, 4}, rng);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(tanh(conv2d(t, k, kb))); }, x), 1e-6);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(tanh(conv2d(x, t, kb))); }, k), 1e-6);
  EXPECT_LT(finite_diff_check([&](const Tensor& t) { return sum(tanh(conv2d(x, k, t))); }, kb), 1e-6);
}

TEST(Ops, GruSequenceGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(24);
  const std::size_t steps = 5, in = 3, hid = 4;
  const auto x = oracle::random_tensor({steps, in}, rng);
  const auto w = oracle::random_tensor({3 * hid, in}, rng);
  const auto u = oracle::random_tensor({3 * hid, hid}, rng);
  const auto b = oracle::random_tensor({3 * hid}, rng);
  const auto probe = oracle::random_tensor({steps, hid}, rng);
  for (bool reverse : {false, true}) {
    auto loss = [&](const Tensor& xx, const Tensor& ww, const Tensor& uu, const Tensor& bb) {
      return sum(mul(gru_sequence(xx, ww, uu, bb, reverse), probe));
    };
    EXPECT_LT(finite_diff_check([&](const Tensor& t) { return loss(t, w, u, b); }, x), 1e-6);
    EXPECT_LT(finite_diff_check([&](const Tensor& t) { return loss(x, t, u, b); }, w), 1e-6);
    EXPECT_LT(finite_diff_check([&](const Tensor& t) { return loss(x, w, t, b); }, u), 1e-6);
    EXPECT_LT(finite_diff_check([&](const Tensor& t) { return loss(x, w, u, t); }, b), 1e-6);
  }
}

// Vectorized reductions can change summation order with buffer alignment;
// gradients must not depend on where the heap puts each tensor.
TEST(Ops, GradientsAreBitwiseRepeatableAcrossHeapLayouts) {
  std::mt19937_64 rng(25);
  const auto x = oracle::random_tensor({7, 5}, rng);
  const auto w = oracle::random_tensor({36, 5}, rng);
  const auto u = oracle::random_tensor({36, 12}, rng);
  const auto b = oracle::random_tensor({36}, rng);
  const auto img = oracle::random_tensor({3, 6, 9}, rng);
  const auto k = oracle::random_tensor({1, 3, 3, 3}, rng);
  const auto kb = oracle::random_tensor({1}, rng);
  const auto row = oracle::random_tensor({1, 12}, rng);
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> padding;
  for (std::size_t rep = 0; rep < 8; ++rep) {
    padding.emplace_back(rep + 1, 0.0);
    std::vector<Tensor> leaves{x.clone(), w.clone(), u.clone(), b.clone(), k.clone(), kb.clone(), row.clone()};
    for (auto& t : leaves) t.set_requires_grad(true);
    const auto h = gru_sequence(leaves[0], leaves[1], leaves[2], leaves[3], rep % 2 == 1);
    const auto c = conv2d(img, leaves[4], leaves[5]);
    const auto m = matmul(leaves[6], transpose(h));
    backward(add(sum(mul(c, c)), sum(mul(m, m))));
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const std::vector<double> g(leaves[i].grad().begin(), leaves[i].grad().end());
      if (rep < 2) {
        first.push_back(g);
      } else {
        EXPECT_EQ(g, first[(rep % 2) * leaves.size() + i]) << "leaf " << i << " rep " << rep;
      }
    }
  }
}
