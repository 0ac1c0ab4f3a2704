#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "truckmorl/autodiff/tape.hpp"
#include "truckmorl/autodiff/types.hpp"
#include "truckmorl/errors.hpp"

// Differentiable free functions over Var. Batches are laid out column-wise: a
// (features x batch) matrix holds one sample per column.

namespace truckmorl::ad {

namespace detail {

template <typename Scalar>
Tape<Scalar>& same_tape(const Var<Scalar>& a, const Var<Scalar>& b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) throw UsageError(std::string(op) + ": operands live on different tapes");
  return *a.tape;
}

template <typename Scalar>
void require_same_shape(const Var<Scalar>& a, const Var<Scalar>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ConfigError(std::string(op) + ": shape mismatch");
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) throw ConfigError("matmul: inner dimension mismatch");
  const std::size_t ia = a.id, ib = b.id;
  return t.push(a.value() * b.value(), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib).transpose());
                  if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value(ia).transpose() * g);
                });
}

/// x (n x B) + bias (n x 1) broadcast across columns.
template <typename Scalar>
Var<Scalar> add_bias(Var<Scalar> x, Var<Scalar> bias) {
  Tape<Scalar>& t = detail::same_tape(x, bias, "add_bias");
  if (bias.cols() != 1 || bias.rows() != x.rows()) throw ConfigError("add_bias: bias must be (rows x 1)");
  const std::size_t ix = x.id, ib = bias.id;
  Matrix<Scalar> out = x.value().colwise() + bias.value().col(0);
  return t.push(std::move(out), t.requires_grad(ix) || t.requires_grad(ib),
                [ix, ib](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  tp.accumulate(ix, g);
                  if (tp.requires_grad(ib)) tp.accumulate(ib, g.rowwise().sum());
                });
}

template <typename Scalar>
Var<Scalar> operator+(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "add");
  detail::require_same_shape(a, b, "add");
  const std::size_t ia = a.id, ib = b.id;
  return t.push(a.value() + b.value(), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  tp.accumulate(ia, g);
                  tp.accumulate(ib, g);
                });
}

template <typename Scalar>
Var<Scalar> operator-(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "sub");
  detail::require_same_shape(a, b, "sub");
  const std::size_t ia = a.id, ib = b.id;
  return t.push(a.value() - b.value(), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  tp.accumulate(ia, g);
                  tp.accumulate(ib, -g);
                });
}

template <typename Scalar>
Var<Scalar> operator*(Scalar s, Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  return t.push(s * a.value(), t.requires_grad(ia),
                [ia, s](Tape<Scalar>& tp, const Matrix<Scalar>& g) { tp.accumulate(ia, s * g); });
}

template <typename Scalar>
Var<Scalar> operator-(Var<Scalar> a) {
  return Scalar(-1) * a;
}

/// Element-wise product.
template <typename Scalar>
Var<Scalar> cmul(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "cmul");
  detail::require_same_shape(a, b, "cmul");
  const std::size_t ia = a.id, ib = b.id;
  return t.push(a.value().cwiseProduct(b.value()), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
                  if (tp.requires_grad(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
                });
}

/// Element-wise product with a constant matrix of the same shape.
template <typename Scalar>
Var<Scalar> cmul(Var<Scalar> a, const Matrix<Scalar>& c) {
  if (a.rows() != c.rows() || a.cols() != c.cols()) throw ConfigError("cmul: shape mismatch");
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  return t.push(a.value().cwiseProduct(c), t.requires_grad(ia),
                [ia, c](Tape<Scalar>& tp, const Matrix<Scalar>& g) { tp.accumulate(ia, g.cwiseProduct(c)); });
}

template <typename Scalar>
Var<Scalar> tanh(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  const std::size_t io = t.size();  // id of the node pushed below
  // d tanh = 1 - tanh^2, read back from the node's own value.
  return t.push(a.value().array().tanh().matrix(), t.requires_grad(ia),
                [ia, io](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  const auto& y = tp.value(io);
                  tp.accumulate(ia, g.cwiseProduct((Scalar(1) - y.array().square()).matrix()));
                });
}

template <typename Scalar>
Var<Scalar> exp(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  const std::size_t io = t.size();
  return t.push(a.value().array().exp().matrix(), t.requires_grad(ia),
                [ia, io](Tape<Scalar>& tp, const Matrix<Scalar>& g) { tp.accumulate(ia, g.cwiseProduct(tp.value(io))); });
}

template <typename Scalar>
Var<Scalar> square(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  return t.push(a.value().array().square().matrix(), t.requires_grad(ia),
                [ia](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  tp.accumulate(ia, Scalar(2) * g.cwiseProduct(tp.value(ia)));
                });
}

/// Clamp to [lo, hi]; the gradient passes only where the input lies strictly inside.
template <typename Scalar>
Var<Scalar> clip(Var<Scalar> a, Scalar lo, Scalar hi) {
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  return t.push(a.value().cwiseMax(lo).cwiseMin(hi), t.requires_grad(ia),
                [ia, lo, hi](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  const auto& x = tp.value(ia);
                  Matrix<Scalar> pass = ((x.array() > lo) && (x.array() < hi)).template cast<Scalar>().matrix();
                  tp.accumulate(ia, g.cwiseProduct(pass));
                });
}

/// Element-wise minimum; ties route the gradient to `a`.
template <typename Scalar>
Var<Scalar> minimum(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "minimum");
  detail::require_same_shape(a, b, "minimum");
  const std::size_t ia = a.id, ib = b.id;
  return t.push(a.value().cwiseMin(b.value()), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  Matrix<Scalar> take_a =
                      (tp.value(ia).array() <= tp.value(ib).array()).template cast<Scalar>().matrix();
                  tp.accumulate(ia, g.cwiseProduct(take_a));
                  tp.accumulate(ib, g - g.cwiseProduct(take_a));
                });
}

/// Sum of all entries, as a 1x1 node.
template <typename Scalar>
Var<Scalar> sum(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  const Eigen::Index r = a.rows(), c = a.cols();
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  return t.push(std::move(out), t.requires_grad(ia), [ia, r, c](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(ia, Matrix<Scalar>::Constant(r, c, g(0, 0)));
  });
}

template <typename Scalar>
Var<Scalar> mean(Var<Scalar> a) {
  return (Scalar(1) / static_cast<Scalar>(a.value().size())) * sum(a);
}

/// Sums each column: (n x B) -> (1 x B).
template <typename Scalar>
Var<Scalar> column_sum(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  const Eigen::Index r = a.rows();
  return t.push(a.value().colwise().sum(), t.requires_grad(ia), [ia, r](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    tp.accumulate(ia, g.replicate(r, 1));
  });
}

/// Linear scalarization of per-objective logits.
/// `logits` is (A*d x B) with row a*d+i holding objective i of action a; `weights` is (d x B).
/// Returns (A x B) with z(a, b) = sum_i weights(i, b) * logits(a*d+i, b).
template <typename Scalar>
Var<Scalar> scalarize(Var<Scalar> logits, const Matrix<Scalar>& weights) {
  const Eigen::Index d = weights.rows();
  const Eigen::Index batch = weights.cols();
  if (d == 0 || logits.rows() % d != 0 || logits.cols() != batch) throw ConfigError("scalarize: shape mismatch");
  const Eigen::Index actions = logits.rows() / d;
  const Matrix<Scalar>& z = logits.value();
  Matrix<Scalar> out(actions, batch);
  for (Eigen::Index b = 0; b < batch; ++b)
    for (Eigen::Index a = 0; a < actions; ++a) out(a, b) = z.col(b).segment(a * d, d).dot(weights.col(b));
  Tape<Scalar>& t = *logits.tape;
  const std::size_t il = logits.id;
  return t.push(std::move(out), t.requires_grad(il),
                [il, weights, actions, d, batch](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
                  Matrix<Scalar> gz(actions * d, batch);
                  for (Eigen::Index b = 0; b < batch; ++b)
                    for (Eigen::Index a = 0; a < actions; ++a) gz.col(b).segment(a * d, d) = g(a, b) * weights.col(b);
                  tp.accumulate(il, gz);
                });
}

/// Column-wise log-softmax with masked entries replaced by kMaskedLogit before normalization.
/// Masked inputs receive no gradient. Throws InvalidMaskError when a column has no valid entry.
template <typename Scalar>
Var<Scalar> masked_log_softmax(Var<Scalar> logits, const MaskMatrix& mask) {
  const Matrix<Scalar>& z = logits.value();
  if (mask.rows() != z.rows() || mask.cols() != z.cols()) throw ConfigError("masked_log_softmax: mask shape mismatch");
  Matrix<Scalar> out(z.rows(), z.cols());
  for (Eigen::Index b = 0; b < z.cols(); ++b) {
    if (!mask.col(b).any()) throw InvalidMaskError("masked_log_softmax: every action is masked");
    Vector<Scalar> col = mask.col(b).select(z.col(b), Vector<Scalar>::Constant(z.rows(), Scalar(kMaskedLogit)));
    const Scalar m = col.maxCoeff();
    const Scalar lse = m + std::log((col.array() - m).exp().sum());
    out.col(b) = col.array() - lse;
  }
  Tape<Scalar>& t = *logits.tape;
  const std::size_t il = logits.id;
  const std::size_t io = t.size();  // id of the node pushed below
  return t.push(std::move(out), t.requires_grad(il), [il, io, mask](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    const Matrix<Scalar>& logp = tp.value(io);
    Matrix<Scalar> gz(g.rows(), g.cols());
    for (Eigen::Index b = 0; b < g.cols(); ++b) {
      const Vector<Scalar> p = logp.col(b).array().exp().matrix();
      gz.col(b) = g.col(b) - p * g.col(b).sum();
    }
    gz = mask.select(gz, Matrix<Scalar>::Zero(gz.rows(), gz.cols()));
    tp.accumulate(il, gz);
  });
}

/// Picks one row per column: out(0, b) = a(index[b], b).
template <typename Scalar>
Var<Scalar> pick(Var<Scalar> a, const std::vector<int>& index) {
  const Matrix<Scalar>& x = a.value();
  if (static_cast<Eigen::Index>(index.size()) != x.cols()) throw ConfigError("pick: index count mismatch");
  Matrix<Scalar> out(1, x.cols());
  for (Eigen::Index b = 0; b < x.cols(); ++b) {
    if (index[b] < 0 || index[b] >= x.rows()) throw ConfigError("pick: index out of range");
    out(0, b) = x(index[b], b);
  }
  Tape<Scalar>& t = *a.tape;
  const std::size_t ia = a.id;
  const Eigen::Index rows = x.rows();
  return t.push(std::move(out), t.requires_grad(ia), [ia, index, rows](Tape<Scalar>& tp, const Matrix<Scalar>& g) {
    Matrix<Scalar> ga = Matrix<Scalar>::Zero(rows, g.cols());
    for (Eigen::Index b = 0; b < g.cols(); ++b) ga(index[b], b) = g(0, b);
    tp.accumulate(ia, ga);
  });
}

}  // namespace truckmorl::ad
