#ifndef ACTIVEVIEW_NUMCORE_TAPE_HPP_
#define ACTIVEVIEW_NUMCORE_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "activeview/errors.hpp"
#include "activeview/numcore/functional.hpp"
#include "activeview/numcore/types.hpp"

namespace activeview {

template <typename Scalar>
class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
/// lives.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Tape<Scalar>* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix<Scalar>& value() const { return tape_->value(id_); }
  const Matrix<Scalar>& grad() const { return tape_->grad(id_); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Tape<Scalar>* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  Tape<Scalar>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/**
 * Reverse-mode differentiation graph.
 *
 * Nodes are appended in evaluation order, which is already a topological
 * order, so backward() is a single reverse sweep. Each node carries a closure
 * that scatters its output gradient into the gradients of its inputs.
 * Gradients are only accumulated into nodes that (transitively) depend on a
 * leaf recorded with requires_grad.
 */
template <typename Scalar>
class Tape {
 public:
  using MatrixType = Matrix<Scalar>;
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<Scalar> leaf(MatrixType value, bool requires_grad = true) {
    nodes_.push_back(Node{std::move(value), MatrixType(), {}, nullptr, requires_grad});
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  Var<Scalar> constant(MatrixType value) { return leaf(std::move(value), false); }

  Var<Scalar> record(MatrixType value, std::vector<std::size_t> inputs, BackwardFn backward) {
    bool needs = false;
    for (std::size_t in : inputs) needs = needs || nodes_[in].requires_grad;
    if (!needs) backward = nullptr;
    nodes_.push_back(Node{std::move(value), MatrixType(), std::move(inputs), std::move(backward), needs});
    return Var<Scalar>(this, nodes_.size() - 1);
  }

  const MatrixType& value(std::size_t id) const { return nodes_[id].value; }

  /// Gradient of the backward root with respect to node id; zeros if the node
  /// did not influence the root.
  const MatrixType& grad(std::size_t id) const {
    Node& node = const_cast<Node&>(nodes_[id]);
    if (node.grad.size() == 0) node.grad = MatrixType::Zero(node.value.rows(), node.value.cols());
    return node.grad;
  }

  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Adds contribution to the gradient of node id (no-op for constants).
  template <typename Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& contribution) {
    Node& node = nodes_[id];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0)
      node.grad = contribution;
    else
      node.grad += contribution;
  }

  /// Propagates d(root)/d(node) to every node. The root must be 1 x 1 and a
  /// tape can be swept once.
  void backward(const Var<Scalar>& root) {
    if (root.tape() != this) throw ContractViolation("backward: root belongs to another tape");
    if (nodes_[root.id()].value.size() != 1) throw ContractViolation("backward: root is not scalar");
    if (swept_) throw ContractViolation("backward: tape already swept");
    swept_ = true;
    if (!nodes_[root.id()].requires_grad) return;
    nodes_[root.id()].grad = MatrixType::Ones(1, 1);
    for (std::size_t id = root.id() + 1; id-- > 0;) {
      Node& node = nodes_[id];
      if (!node.backward || node.grad.size() == 0) continue;
      node.backward(*this, id);
    }
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }

 private:
  struct Node {
    MatrixType value;
    MatrixType grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad;
  };

  std::vector<Node> nodes_;
  bool swept_ = false;
};

// ---------------------------------------------------------------------------
// Recorded primitives. Names mirror the eager versions in functional.hpp.
// ---------------------------------------------------------------------------

template <typename Scalar>
Var<Scalar> constant_like(const Var<Scalar>& ref, Matrix<Scalar> value) {
  return ref.tape()->constant(std::move(value));
}

template <typename Scalar>
Matrix<Scalar> constant_like(const Matrix<Scalar>&, Matrix<Scalar> value) {
  return value;
}

template <typename Scalar>
const Matrix<Scalar>& value_of(const Var<Scalar>& v) {
  return v.value();
}

template <typename Scalar>
Scalar scalar_of(const Var<Scalar>& v) {
  return scalar_of(v.value());
}

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& t = *a.tape();
  return t.record(matmul(a.value(), b.value()), {a.id(), b.id()}, [ia = a.id(), ib = b.id()](Tape<Scalar>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

template <typename Scalar>
Var<Scalar> add_row(const Var<Scalar>& a, const Var<Scalar>& bias) {
  Tape<Scalar>& t = *a.tape();
  return t.record(add_row(a.value(), bias.value()), {a.id(), bias.id()},
                  [ia = a.id(), ib = bias.id()](Tape<Scalar>& t, std::size_t self) {
                    const auto& g = t.grad(self);
                    t.accumulate(ia, g);
                    if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
                  });
}

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("add: shape mismatch");
  Tape<Scalar>& t = *a.tape();
  return t.record(a.value() + b.value(), {a.id(), b.id()}, [ia = a.id(), ib = b.id()](Tape<Scalar>& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("sub: shape mismatch");
  Tape<Scalar>& t = *a.tape();
  return t.record(a.value() - b.value(), {a.id(), b.id()}, [ia = a.id(), ib = b.id()](Tape<Scalar>& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, -t.grad(self));
  });
}

template <typename Scalar>
Var<Scalar> hadamard(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("hadamard: shape mismatch");
  Tape<Scalar>& t = *a.tape();
  return t.record(a.value().cwiseProduct(b.value()), {a.id(), b.id()},
                  [ia = a.id(), ib = b.id()](Tape<Scalar>& t, std::size_t self) {
                    const auto& g = t.grad(self);
                    if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                    if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                  });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar s) {
  Tape<Scalar>& t = *a.tape();
  return t.record(a.value() * s, {a.id()},
                  [ia = a.id(), s](Tape<Scalar>& t, std::size_t self) { t.accumulate(ia, t.grad(self) * s); });
}

template <typename Scalar>
Var<Scalar> one_minus(const Var<Scalar>& a) {
  Tape<Scalar>& t = *a.tape();
  return t.record(one_minus(a.value()), {a.id()},
                  [ia = a.id()](Tape<Scalar>& t, std::size_t self) { t.accumulate(ia, -t.grad(self)); });
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  Tape<Scalar>& t = *a.tape();
  return t.record(sigmoid(a.value()), {a.id()}, [ia = a.id()](Tape<Scalar>& t, std::size_t self) {
    const auto y = t.value(self).array();
    t.accumulate(ia, (t.grad(self).array() * y * (Scalar(1) - y)).matrix());
  });
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  Tape<Scalar>& t = *a.tape();
  return t.record(tanh(a.value()), {a.id()}, [ia = a.id()](Tape<Scalar>& t, std::size_t self) {
    const auto y = t.value(self).array();
    t.accumulate(ia, (t.grad(self).array() * (Scalar(1) - y.square())).matrix());
  });
}

template <typename Scalar>
Var<Scalar> exp(const Var<Scalar>& a) {
  Tape<Scalar>& t = *a.tape();
  return t.record(exp(a.value()), {a.id()}, [ia = a.id()](Tape<Scalar>& t, std::size_t self) {
    t.accumulate(ia, t.grad(self).cwiseProduct(t.value(self)));
  });
}

template <typename Scalar>
Var<Scalar> square(const Var<Scalar>& a) {
  Tape<Scalar>& t = *a.tape();
  return t.record(square(a.value()), {a.id()}, [ia = a.id()](Tape<Scalar>& t, std::size_t self) {
    t.accumulate(ia, (Scalar(2) * t.grad(self).array() * t.value(ia).array()).matrix());
  });
}

/// log(max(a, floor)); the gradient is zero where the floor is active.
template <typename Scalar>
Var<Scalar> log_floor(const Var<Scalar>& a, Scalar floor = Scalar(kProbabilityFloor)) {
  Tape<Scalar>& t = *a.tape();
  return t.record(log_floor(a.value(), floor), {a.id()}, [ia = a.id(), floor](Tape<Scalar>& t, std::size_t self) {
    const auto& x = t.value(ia);
    const auto& g = t.grad(self);
    Matrix<Scalar> d = Matrix<Scalar>::Zero(x.rows(), x.cols());
    for (Index i = 0; i < x.size(); ++i)
      if (x.data()[i] > floor) d.data()[i] = g.data()[i] / x.data()[i];
    t.accumulate(ia, d);
  });
}

template <typename Scalar>
Var<Scalar> masked_softmax_rows(const Var<Scalar>& logits, const Matrix<Scalar>& mask) {
  Tape<Scalar>& t = *logits.tape();
  return t.record(masked_softmax_rows(logits.value(), mask), {logits.id()},
                  [ia = logits.id()](Tape<Scalar>& t, std::size_t self) {
                    const auto& p = t.value(self);
                    const auto& g = t.grad(self);
                    const Vector<Scalar> inner = g.cwiseProduct(p).rowwise().sum();
                    t.accumulate(ia, p.cwiseProduct((g.colwise() - inner)));
                  });
}

template <typename Scalar>
Var<Scalar> softmax_rows(const Var<Scalar>& logits) {
  return masked_softmax_rows(logits, Matrix<Scalar>());
}

template <typename Scalar>
Var<Scalar> pick(const Var<Scalar>& a, const std::vector<Index>& columns) {
  Tape<Scalar>& t = *a.tape();
  return t.record(pick(a.value(), columns), {a.id()}, [ia = a.id(), columns](Tape<Scalar>& t, std::size_t self) {
    const auto& g = t.grad(self);
    Matrix<Scalar> d = Matrix<Scalar>::Zero(t.value(ia).rows(), t.value(ia).cols());
    for (Index i = 0; i < d.rows(); ++i) d(i, columns[i]) = g(i, 0);
    t.accumulate(ia, d);
  });
}

template <typename Scalar>
Var<Scalar> entropy_rows(const Var<Scalar>& probs) {
  Tape<Scalar>& t = *probs.tape();
  return t.record(entropy_rows(probs.value()), {probs.id()}, [ia = probs.id()](Tape<Scalar>& t, std::size_t self) {
    const auto& p = t.value(ia);
    const auto& g = t.grad(self);
    Matrix<Scalar> d = Matrix<Scalar>::Zero(p.rows(), p.cols());
    for (Index i = 0; i < p.rows(); ++i)
      for (Index j = 0; j < p.cols(); ++j)
        if (p(i, j) > 0) d(i, j) = -g(i, 0) * (std::log(p(i, j)) + Scalar(1));
    t.accumulate(ia, d);
  });
}

template <typename Scalar>
Var<Scalar> squared_distance_rows(const Var<Scalar>& a, const Matrix<Scalar>& target) {
  if (a.rows() != target.rows() || a.cols() != target.cols())
    throw ContractViolation("squared_distance_rows: shape mismatch");
  Tape<Scalar>& t = *a.tape();
  return t.record(squared_distance_rows(a.value(), target), {a.id()},
                  [ia = a.id(), target](Tape<Scalar>& t, std::size_t self) {
                    const auto& g = t.grad(self);
                    t.accumulate(ia, Matrix<Scalar>(((Scalar(2) * (t.value(ia) - target)).array().colwise() * g.col(0).array()).matrix()));
                  });
}

template <typename Scalar>
Var<Scalar> clipped_surrogate(const Var<Scalar>& ratio, const Matrix<Scalar>& advantage, Scalar eps) {
  if (ratio.rows() != advantage.rows() || ratio.cols() != advantage.cols())
    throw ContractViolation("clipped_surrogate: shape mismatch");
  Tape<Scalar>& t = *ratio.tape();
  return t.record(clipped_surrogate(ratio.value(), advantage, eps), {ratio.id()},
                  [ia = ratio.id(), advantage, eps](Tape<Scalar>& t, std::size_t self) {
                    const auto& r = t.value(ia);
                    const auto& g = t.grad(self);
                    Matrix<Scalar> d = Matrix<Scalar>::Zero(r.rows(), r.cols());
                    for (Index i = 0; i < r.size(); ++i) {
                      const Scalar x = r.data()[i];
                      const Scalar adv = advantage.data()[i];
                      const Scalar clipped = std::min(std::max(x, Scalar(1) - eps), Scalar(1) + eps);
                      // The unclipped branch is active when it is the minimum or the clip is inactive.
                      const bool unclipped_active = x * adv <= clipped * adv;
                      const bool inside = x > Scalar(1) - eps && x < Scalar(1) + eps;
                      if (unclipped_active || inside) d.data()[i] = g.data()[i] * adv;
                    }
                    t.accumulate(ia, d);
                  });
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  Tape<Scalar>& t = *a.tape();
  return t.record(sum(a.value()), {a.id()}, [ia = a.id()](Tape<Scalar>& t, std::size_t self) {
    const auto& x = t.value(ia);
    t.accumulate(ia, Matrix<Scalar>::Constant(x.rows(), x.cols(), t.grad(self)(0, 0)));
  });
}

template <typename Scalar>
Var<Scalar> mean(const Var<Scalar>& a) {
  Tape<Scalar>& t = *a.tape();
  return t.record(mean(a.value()), {a.id()}, [ia = a.id()](Tape<Scalar>& t, std::size_t self) {
    const auto& x = t.value(ia);
    t.accumulate(ia, Matrix<Scalar>::Constant(x.rows(), x.cols(), t.grad(self)(0, 0) / Scalar(x.size())));
  });
}

}  // namespace activeview

#endif  // ACTIVEVIEW_NUMCORE_TAPE_HPP_
