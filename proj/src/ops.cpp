#include "srf/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace srf {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

ConstMatMap as_matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
  return ConstMatMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MatMap as_matrix(std::vector<double>& v, std::size_t rows, std::size_t cols) {
  return MatMap(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + " tensor, got " +
                     to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

// grad of parent i, or nullptr when that parent does not need one.
std::vector<double>* parent_grad(detail::TensorNode& node, std::size_t i) {
  auto& p = node.parents[i];
  return p->requires_grad ? &p->ensure_grad() : nullptr;
}

// Eigen evaluates vector-shaped products with gemv, whose summation order
// depends on operand addresses. Owned copies are aligned, so the order is fixed.
template <typename L, typename R>
RowMat product(const L& lhs, const R& rhs) {
  if (lhs.rows() == 1 || rhs.cols() == 1) {
    const RowMat a = lhs, b = rhs;
    return a * b;
  }
  return lhs * rhs;
}

template <typename Fn>
Tensor elementwise_binary(const char* op, const Tensor& a, const Tensor& b, Fn fn,
                          std::function<void(detail::TensorNode&)> bw) {
  require_same_shape(a, b, op);
  std::vector<double> out(a.size());
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(da[i], db[i]);
  return detail::make_result(op, a.shape(), std::move(out), {a, b}, std::move(bw));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: cannot multiply " + to_string(a.shape()) + " by " + to_string(b.shape()));
  }
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n);
  as_matrix(out, m, n) = product(as_matrix(a.node()->data, m, k), as_matrix(b.node()->data, k, n));
  return detail::make_result("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](detail::TensorNode& node) {
    auto dc = as_matrix(node.grad, m, n);
    if (auto* ga = parent_grad(node, 0)) {
      as_matrix(*ga, m, k) += product(dc, as_matrix(node.parents[1]->data, k, n).transpose());
    }
    if (auto* gb = parent_grad(node, 1)) {
      as_matrix(*gb, k, n) += product(as_matrix(node.parents[0]->data, m, k).transpose(), dc);
    }
  });
}

Tensor matvec(const Tensor& a, const Tensor& x) {
  if (a.rank() != 2 || x.rank() != 1 || a.dim(1) != x.dim(0)) {
    throw ShapeError("matvec: cannot multiply " + to_string(a.shape()) + " by " + to_string(x.shape()));
  }
  return reshape(matmul(a, reshape(x, {x.dim(0), 1})), {a.dim(0)});
}

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise_binary("add", a, b, [](double x, double y) { return x + y; }, [](detail::TensorNode& node) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto* g = parent_grad(node, p)) {
        for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise_binary("sub", a, b, [](double x, double y) { return x - y; }, [](detail::TensorNode& node) {
    if (auto* g = parent_grad(node, 0)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i];
    }
    if (auto* g = parent_grad(node, 1)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] -= node.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return elementwise_binary("mul", a, b, [](double x, double y) { return x * y; }, [](detail::TensorNode& node) {
    const auto& av = node.parents[0]->data;
    const auto& bv = node.parents[1]->data;
    if (auto* g = parent_grad(node, 0)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i] * bv[i];
    }
    if (auto* g = parent_grad(node, 1)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return detail::make_result("scale", x.shape(), std::move(out), {x}, [factor](detail::TensorNode& node) {
    auto& g = node.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i) g[i] += factor * node.grad[i];
  });
}

Tensor add_scalar(const Tensor& x, double value) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (auto& v : out) v += value;
  return detail::make_result("add_scalar", x.shape(), std::move(out), {x}, [](detail::TensorNode& node) {
    auto& g = node.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i) g[i] += node.grad[i];
  });
}

Tensor add_rowwise(const Tensor& x, const Tensor& bias) {
  require_rank(bias, 1, "add_rowwise");
  const auto n = bias.dim(0);
  if (x.shape().back() != n || x.rank() > 2) {
    throw ShapeError("add_rowwise: cannot broadcast " + to_string(bias.shape()) + " over " + to_string(x.shape()));
  }
  const auto rows = x.size() / n;
  std::vector<double> out(x.data().begin(), x.data().end());
  auto bv = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] += bv[j];
  }
  return detail::make_result("add_rowwise", x.shape(), std::move(out), {x, bias}, [rows, n](detail::TensorNode& node) {
    if (auto* g = parent_grad(node, 0)) {
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i];
    }
    if (auto* g = parent_grad(node, 1)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) (*g)[j] += node.grad[r * n + j];
      }
    }
  });
}

Tensor pointwise(const Tensor& x, Pointwise f) {
  std::vector<double> out(x.size());
  auto xv = x.data();
  const char* name = "relu";
  switch (f) {
    case Pointwise::relu:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
      break;
    case Pointwise::sigmoid:
      name = "sigmoid";
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
      break;
    case Pointwise::tanh:
      name = "tanh";
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
      break;
  }
  return detail::make_result(name, x.shape(), std::move(out), {x}, [f](detail::TensorNode& node) {
    auto& g = node.parents[0]->ensure_grad();
    const auto& y = node.data;
    const auto& in = node.parents[0]->data;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double d = 0.0;
      switch (f) {
        case Pointwise::relu: d = in[i] > 0.0 ? 1.0 : 0.0; break;
        case Pointwise::sigmoid: d = y[i] * (1.0 - y[i]); break;
        case Pointwise::tanh: d = 1.0 - y[i] * y[i]; break;
      }
      g[i] += d * node.grad[i];
    }
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return detail::make_result("sum", {1}, {s}, {x}, [](detail::TensorNode& node) {
    auto& g = node.parents[0]->ensure_grad();
    for (auto& v : g) v += node.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return detail::make_result("reshape", std::move(shape), std::move(out), {x}, [](detail::TensorNode& node) {
    auto& g = node.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += node.grad[i];
  });
}

Tensor permute(const Tensor& x, std::array<std::size_t, 3> order) {
  require_rank(x, 3, "permute");
  {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<std::size_t, 3>{0, 1, 2}) throw ShapeError("permute: order is not a permutation");
  }
  const std::array<std::size_t, 3> in_dims{x.dim(0), x.dim(1), x.dim(2)};
  const std::array<std::size_t, 3> in_strides{in_dims[1] * in_dims[2], in_dims[2], 1};
  const std::array<std::size_t, 3> out_dims{in_dims[order[0]], in_dims[order[1]], in_dims[order[2]]};
  // Flat source index for every destination element.
  std::vector<std::size_t> src(x.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < out_dims[0]; ++i) {
    for (std::size_t j = 0; j < out_dims[1]; ++j) {
      for (std::size_t k = 0; k < out_dims[2]; ++k) {
        src[n++] = i * in_strides[order[0]] + j * in_strides[order[1]] + k * in_strides[order[2]];
      }
    }
  }
  std::vector<double> out(x.size());
  auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[src[i]];
  return detail::make_result("permute", {out_dims[0], out_dims[1], out_dims[2]}, std::move(out), {x},
                             [src = std::move(src)](detail::TensorNode& node) {
                               auto& g = node.parents[0]->ensure_grad();
                               for (std::size_t i = 0; i < src.size(); ++i) g[src[i]] += node.grad[i];
                             });
}

Tensor transpose(const Tensor& x) {
  require_rank(x, 2, "transpose");
  return reshape(permute(reshape(x, {1, x.dim(0), x.dim(1)}), {0, 2, 1}), {x.dim(1), x.dim(0)});
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  if (x.rank() < 1 || x.rank() > 2 || begin >= end || end > x.dim(0)) {
    throw ShapeError("slice_rows: invalid range [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                     to_string(x.shape()));
  }
  const std::size_t row = x.rank() == 2 ? x.dim(1) : 1;
  Shape shape = x.shape();
  shape[0] = end - begin;
  std::vector<double> out(x.data().begin() + begin * row, x.data().begin() + end * row);
  return detail::make_result("slice_rows", std::move(shape), std::move(out), {x},
                             [offset = begin * row](detail::TensorNode& node) {
                               auto& g = node.parents[0]->ensure_grad();
                               for (std::size_t i = 0; i < node.grad.size(); ++i) g[offset + i] += node.grad[i];
                             });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "concat_cols");
  require_rank(b, 2, "concat_cols");
  if (a.dim(0) != b.dim(0)) {
    throw ShapeError("concat_cols: row mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  const auto rows = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  std::vector<double> out(rows * (ca + cb));
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.begin() + r * ca, ca, out.begin() + r * (ca + cb));
    std::copy_n(bv.begin() + r * cb, cb, out.begin() + r * (ca + cb) + ca);
  }
  return detail::make_result("concat_cols", {rows, ca + cb}, std::move(out), {a, b},
                             [rows, ca, cb](detail::TensorNode& node) {
                               if (auto* g = parent_grad(node, 0)) {
                                 for (std::size_t r = 0; r < rows; ++r) {
                                   for (std::size_t j = 0; j < ca; ++j) (*g)[r * ca + j] += node.grad[r * (ca + cb) + j];
                                 }
                               }
                               if (auto* g = parent_grad(node, 1)) {
                                 for (std::size_t r = 0; r < rows; ++r) {
                                   for (std::size_t j = 0; j < cb; ++j) {
                                     (*g)[r * cb + j] += node.grad[r * (ca + cb) + ca + j];
                                   }
                                 }
                               }
                             });
}

Tensor flip_rows(const Tensor& x) {
  const auto rows = x.dim(0);
  const auto row = x.size() / rows;
  std::vector<double> out(x.size());
  auto xv = x.data();
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(xv.begin() + (rows - 1 - r) * row, row, out.begin() + r * row);
  return detail::make_result("flip_rows", x.shape(), std::move(out), {x}, [rows, row](detail::TensorNode& node) {
    auto& g = node.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < row; ++j) g[(rows - 1 - r) * row + j] += node.grad[r * row + j];
    }
  });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank(x, 3, "conv2d input");
  require_rank(w, 4, "conv2d weight");
  require_rank(b, 1, "conv2d bias");
  const auto cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const auto cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (kh % 2 == 0 || kw % 2 == 0) {
    throw ConfigError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) + " must have odd sizes");
  }
  if (w.dim(1) != cin || b.dim(0) != cout) {
    throw ShapeError("conv2d: input " + to_string(x.shape()) + " incompatible with weight " + to_string(w.shape()) +
                     " and bias " + to_string(b.shape()));
  }
  const long ph = static_cast<long>(kh / 2), pw = static_cast<long>(kw / 2);
  const std::size_t patch = cin * kh * kw;
  const std::size_t pix = h * wd;

  // im2col: cols[(c, i, j)][(y, x)] = x[c][y + i - ph][x + j - pw], zero outside.
  std::vector<double> cols(patch * pix, 0.0);
  auto xv = x.data();
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        double* dst = cols.data() + ((c * kh + i) * kw + j) * pix;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + static_cast<long>(i) - ph;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          const double* src = xv.data() + (c * h + static_cast<std::size_t>(sy)) * wd;
          for (std::size_t xx = 0; xx < wd; ++xx) {
            const long sx = static_cast<long>(xx) + static_cast<long>(j) - pw;
            if (sx >= 0 && sx < static_cast<long>(wd)) dst[y * wd + xx] = src[sx];
          }
        }
      }
    }
  }

  std::vector<double> out(cout * pix);
  auto out_m = as_matrix(out, cout, pix);
  out_m = product(as_matrix(w.node()->data, cout, patch), as_matrix(cols, patch, pix));
  auto bv = b.data();
  for (std::size_t o = 0; o < cout; ++o) out_m.row(static_cast<Eigen::Index>(o)).array() += bv[o];

  return detail::make_result(
      "conv2d", {cout, h, wd}, std::move(out), {x, w, b},
      [cols = std::move(cols), cin, h, wd, cout, kh, kw, ph, pw, patch, pix](detail::TensorNode& node) {
        auto dout = as_matrix(node.grad, cout, pix);
        if (auto* gw = parent_grad(node, 1)) {
          as_matrix(*gw, cout, patch) += product(dout, as_matrix(cols, patch, pix).transpose());
        }
        if (auto* gb = parent_grad(node, 2)) {
          // Plain loop: Eigen's vectorized sum peels by buffer address, which breaks run-to-run determinism.
          const double* g = node.grad.data();
          for (std::size_t o = 0; o < cout; ++o) {
            double acc = 0.0;
            for (std::size_t q = 0; q < pix; ++q) acc += g[o * pix + q];
            (*gb)[o] += acc;
          }
        }
        if (auto* gx = parent_grad(node, 0)) {
          const RowMat dcols = product(as_matrix(node.parents[1]->data, cout, patch).transpose(), dout);
          for (std::size_t c = 0; c < cin; ++c) {
            for (std::size_t i = 0; i < kh; ++i) {
              for (std::size_t j = 0; j < kw; ++j) {
                const double* src = dcols.data() + ((c * kh + i) * kw + j) * pix;
                for (std::size_t y = 0; y < h; ++y) {
                  const long sy = static_cast<long>(y) + static_cast<long>(i) - ph;
                  if (sy < 0 || sy >= static_cast<long>(h)) continue;
                  double* dst = gx->data() + (c * h + static_cast<std::size_t>(sy)) * wd;
                  for (std::size_t xx = 0; xx < wd; ++xx) {
                    const long sx = static_cast<long>(xx) + static_cast<long>(j) - pw;
                    if (sx >= 0 && sx < static_cast<long>(wd)) dst[sx] += src[y * wd + xx];
                  }
                }
              }
            }
          }
        }
      });
}

Tensor gru_sequence(const Tensor& x, const Tensor& w, const Tensor& u, const Tensor& b, bool reverse) {
  require_rank(x, 2, "gru_sequence input");
  require_rank(w, 2, "gru_sequence w");
  require_rank(u, 2, "gru_sequence u");
  require_rank(b, 1, "gru_sequence b");
  const auto steps = x.dim(0), in = x.dim(1), hid = u.dim(1);
  if (u.dim(0) != 3 * hid || w.dim(0) != 3 * hid || w.dim(1) != in || b.dim(0) != 3 * hid) {
    throw ConfigError("gru_sequence: input " + to_string(x.shape()) + " incompatible with w " + to_string(w.shape()) +
                      ", u " + to_string(u.shape()) + ", b " + to_string(b.shape()));
  }
  const auto H = static_cast<Eigen::Index>(hid);
  auto row_at = [steps, reverse](std::size_t t) { return reverse ? steps - 1 - t : t; };

  // Input projections for every step in one product.
  RowMat xp = product(as_matrix(x.node()->data, steps, in), as_matrix(w.node()->data, 3 * hid, in).transpose());
  xp.rowwise() += ConstVecMap(b.data().data(), 3 * H).transpose();

  // Owned (aligned) copy so the matrix-vector products do not depend on where u happens to live.
  const RowMat um = as_matrix(u.node()->data, 3 * hid, hid);
  // Saved per input row: z, r, candidate, previous state, r * previous state.
  RowMat zs(steps, H), rs(steps, H), cand(steps, H), prev(steps, H), rprev(steps, H);
  std::vector<double> out(steps * hid);
  auto out_m = as_matrix(out, steps, hid);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto r_i = static_cast<Eigen::Index>(row_at(t));
    Eigen::VectorXd a = um.topRows(2 * H) * h;
    Eigen::VectorXd z = (xp.row(r_i).head(H).transpose() + a.head(H)).unaryExpr([](double v) {
      return 1.0 / (1.0 + std::exp(-v));
    });
    Eigen::VectorXd r = (xp.row(r_i).segment(H, H).transpose() + a.tail(H)).unaryExpr([](double v) {
      return 1.0 / (1.0 + std::exp(-v));
    });
    Eigen::VectorXd rh = r.cwiseProduct(h);
    Eigen::VectorXd c = (xp.row(r_i).tail(H).transpose() + um.bottomRows(H) * rh).array().tanh().matrix();
    zs.row(r_i) = z.transpose();
    rs.row(r_i) = r.transpose();
    cand.row(r_i) = c.transpose();
    prev.row(r_i) = h.transpose();
    rprev.row(r_i) = rh.transpose();
    h += z.cwiseProduct(c - h);
    out_m.row(r_i) = h.transpose();
  }

  return detail::make_result(
      "gru_sequence", {steps, hid}, std::move(out), {x, w, u, b},
      [=, zs = std::move(zs), rs = std::move(rs), cand = std::move(cand), prev = std::move(prev),
       rprev = std::move(rprev)](detail::TensorNode& node) {
        const RowMat um = as_matrix(node.parents[2]->data, 3 * hid, hid);
        const auto dout = as_matrix(node.grad, steps, hid);
        RowMat dxp(steps, 3 * H);
        Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
        for (std::size_t t = steps; t-- > 0;) {
          const auto r_i = static_cast<Eigen::Index>(row_at(t));
          const Eigen::VectorXd dh = dout.row(r_i).transpose() + dh_next;
          const auto z = zs.row(r_i).transpose();
          const auto r = rs.row(r_i).transpose();
          const auto c = cand.row(r_i).transpose();
          const auto hp = prev.row(r_i).transpose();
          const Eigen::VectorXd dz = dh.cwiseProduct(c - hp);
          Eigen::VectorXd dh_prev = dh.cwiseProduct((1.0 - z.array()).matrix());
          const Eigen::VectorXd dac = dh.cwiseProduct(z).cwiseProduct((1.0 - c.array().square()).matrix());
          const Eigen::VectorXd drh = um.bottomRows(H).transpose() * dac;
          const Eigen::VectorXd dr = drh.cwiseProduct(hp);
          dh_prev += drh.cwiseProduct(r);
          dxp.row(r_i).head(H) = dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix())).transpose();
          dxp.row(r_i).segment(H, H) = dr.cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix())).transpose();
          dxp.row(r_i).tail(H) = dac.transpose();
          dh_prev.noalias() += um.topRows(2 * H).transpose() * dxp.row(r_i).head(2 * H).transpose();
          dh_next = dh_prev;
        }
        if (auto* gx = parent_grad(node, 0)) {
          as_matrix(*gx, steps, in) += product(dxp, as_matrix(node.parents[1]->data, 3 * hid, in));
        }
        if (auto* gw = parent_grad(node, 1)) {
          as_matrix(*gw, 3 * hid, in) += product(dxp.transpose(), as_matrix(node.parents[0]->data, steps, in));
        }
        if (auto* gu = parent_grad(node, 2)) {
          auto gum = as_matrix(*gu, 3 * hid, hid);
          gum.topRows(2 * H) += product(dxp.leftCols(2 * H).transpose(), prev);
          gum.bottomRows(H) += product(dxp.rightCols(H).transpose(), rprev);
        }
        if (auto* gb = parent_grad(node, 3)) {
          for (Eigen::Index t = 0; t < dxp.rows(); ++t) {
            for (Eigen::Index j = 0; j < 3 * H; ++j) (*gb)[static_cast<std::size_t>(j)] += dxp(t, j);
          }
        }
      });
}

}  // namespace srf
