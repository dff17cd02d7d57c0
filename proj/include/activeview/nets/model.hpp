#ifndef ACTIVEVIEW_NETS_MODEL_HPP_
#define ACTIVEVIEW_NETS_MODEL_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <random>
#include <string_view>
#include <type_traits>
#include <vector>

#include "activeview/errors.hpp"
#include "activeview/numcore/functional.hpp"
#include "activeview/numcore/tape.hpp"

namespace activeview {

enum class ExtractorKind : std::uint32_t { kIdentity = 0, kMlp = 1 };

/// The learnable parts of the model, in checkpoint section order.
enum class Component : std::uint8_t { kExtractor, kAggregatorE, kAggregatorS, kClassifier, kActor, kValue };

inline constexpr std::array<Component, 6> kAllComponents = {Component::kExtractor,  Component::kAggregatorE,
                                                            Component::kAggregatorS, Component::kClassifier,
                                                            Component::kActor,      Component::kValue};

inline constexpr std::string_view section_name(Component c) {
  switch (c) {
    case Component::kExtractor: return "extractor";
    case Component::kAggregatorE: return "gru_e";
    case Component::kAggregatorS: return "gru_s";
    case Component::kClassifier: return "classifier";
    case Component::kActor: return "actor";
    case Component::kValue: return "value";
  }
  return "";
}

/// Set of components, e.g. the trainable set of a stage.
class ComponentSet {
 public:
  constexpr ComponentSet() = default;
  constexpr ComponentSet(std::initializer_list<Component> cs) {
    for (Component c : cs) bits_ |= bit(c);
  }
  static constexpr ComponentSet all() {
    ComponentSet s;
    s.bits_ = 0x3f;
    return s;
  }
  constexpr bool contains(Component c) const { return (bits_ & bit(c)) != 0; }
  constexpr ComponentSet operator|(ComponentSet o) const {
    ComponentSet s;
    s.bits_ = bits_ | o.bits_;
    return s;
  }
  constexpr bool operator==(const ComponentSet&) const = default;

 private:
  static constexpr std::uint8_t bit(Component c) { return std::uint8_t(1u << static_cast<unsigned>(c)); }
  std::uint8_t bits_ = 0;
};

/// The recognition half (F, R_e, P) and the selection half (R_s, actor, value).
inline constexpr ComponentSet kRecognition{Component::kExtractor, Component::kAggregatorE, Component::kClassifier};
inline constexpr ComponentSet kSelection{Component::kAggregatorS, Component::kActor, Component::kValue};

template <typename T>
struct Affine {
  T weight;  // in x out
  T bias;    // 1 x out
};

/// GRU weights. Input maps are D_in x D_h, recurrent maps D_h x D_h, biases 1 x D_h.
template <typename T>
struct GruWeights {
  T w_z, u_z, b_z;
  T w_r, u_r, b_r;
  T w_n, u_n, b_n;
};

/// Every learnable tensor of the model. T is Matrix<Scalar> for stored
/// parameters and Var<Scalar> for a tape-bound view of them.
template <typename T>
struct ModelWeights {
  ExtractorKind extractor_kind = ExtractorKind::kMlp;
  Affine<T> extractor_hidden;  // unused in identity mode
  Affine<T> extractor_out;
  GruWeights<T> gru_e;
  GruWeights<T> gru_s;
  Affine<T> classifier;
  Affine<T> actor;
  Affine<T> value_head;
};

template <typename Scalar>
using GruParams = GruWeights<Matrix<Scalar>>;
template <typename Scalar>
using ModelParams = ModelWeights<Matrix<Scalar>>;

struct ModelDims {
  Index feature_dim = 16;
  Index classes = 20;
  Index views = 7;
  Index hidden_dim = 64;
  ExtractorKind extractor = ExtractorKind::kMlp;
  Index extractor_width = 64;
  Index extractor_out_dim = 16;

  Index aggregator_input_dim() const { return extractor == ExtractorKind::kMlp ? extractor_out_dim : feature_dim; }
};

template <typename T, typename F>
void for_each_tensor(GruWeights<T>& g, F&& f) {
  f("w_z", g.w_z), f("u_z", g.u_z), f("b_z", g.b_z);
  f("w_r", g.w_r), f("u_r", g.u_r), f("b_r", g.b_r);
  f("w_n", g.w_n), f("u_n", g.u_n), f("b_n", g.b_n);
}

template <typename T, typename F>
void for_each_tensor(Affine<T>& a, F&& f) {
  f("weight", a.weight), f("bias", a.bias);
}

/// Calls f(component, tensor_name, tensor, name_prefix) for every parameter
/// tensor in checkpoint order. Extractor tensors are skipped in identity mode.
template <typename T, typename F>
void for_each_param(ModelWeights<T>& m, F&& f) {
  if (m.extractor_kind == ExtractorKind::kMlp) {
    for_each_tensor(m.extractor_hidden, [&](std::string_view n, T& t) { f(Component::kExtractor, n, t, "hidden."); });
    for_each_tensor(m.extractor_out, [&](std::string_view n, T& t) { f(Component::kExtractor, n, t, "out."); });
  }
  for_each_tensor(m.gru_e, [&](std::string_view n, T& t) { f(Component::kAggregatorE, n, t, ""); });
  for_each_tensor(m.gru_s, [&](std::string_view n, T& t) { f(Component::kAggregatorS, n, t, ""); });
  for_each_tensor(m.classifier, [&](std::string_view n, T& t) { f(Component::kClassifier, n, t, ""); });
  for_each_tensor(m.actor, [&](std::string_view n, T& t) { f(Component::kActor, n, t, ""); });
  for_each_tensor(m.value_head, [&](std::string_view n, T& t) { f(Component::kValue, n, t, ""); });
}

/// Pointers to the stored tensors belonging to the given components.
template <typename Scalar>
std::vector<Matrix<Scalar>*> parameters(ModelParams<Scalar>& m, ComponentSet components) {
  std::vector<Matrix<Scalar>*> out;
  for_each_param(m, [&](Component c, std::string_view, Matrix<Scalar>& t, std::string_view) {
    if (components.contains(c)) out.push_back(&t);
  });
  return out;
}

/// Records every parameter as a tape leaf; only `trainable` components
/// receive gradients.
template <typename Scalar>
ModelWeights<Var<Scalar>> bind(Tape<Scalar>& tape, const ModelParams<Scalar>& m, ComponentSet trainable) {
  ModelWeights<Var<Scalar>> out;
  out.extractor_kind = m.extractor_kind;
  auto& src = const_cast<ModelParams<Scalar>&>(m);
  std::vector<Var<Scalar>> vars;
  for_each_param(src, [&](Component c, std::string_view, Matrix<Scalar>& t, std::string_view) {
    vars.push_back(tape.leaf(t, trainable.contains(c)));
  });
  std::size_t k = 0;
  for_each_param(out, [&](Component, std::string_view, Var<Scalar>& v, std::string_view) { v = vars[k++]; });
  return out;
}

/// Gradients of the bound tensors that belong to `components`, in the same
/// order as parameters(m, components).
template <typename Scalar>
std::vector<Matrix<Scalar>> gradients(ModelWeights<Var<Scalar>>& bound, ComponentSet components) {
  std::vector<Matrix<Scalar>> out;
  for_each_param(bound, [&](Component c, std::string_view, Var<Scalar>& v, std::string_view) {
    if (components.contains(c)) out.push_back(v.grad());
  });
  return out;
}

namespace detail {

template <typename Scalar, typename Rng>
Matrix<Scalar> uniform_fan_in(Index rows, Index cols, Index fan_in, Rng& rng) {
  const Scalar bound = Scalar(1) / std::sqrt(Scalar(fan_in));
  std::uniform_real_distribution<Scalar> dist(-bound, bound);
  Matrix<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

template <typename Scalar, typename Rng>
Affine<Matrix<Scalar>> init_affine(Index in, Index out, Rng& rng) {
  return {uniform_fan_in<Scalar>(in, out, in, rng), Matrix<Scalar>::Zero(1, out)};
}

template <typename Scalar, typename Rng>
GruParams<Scalar> init_gru(Index in, Index hidden, Rng& rng) {
  GruParams<Scalar> g;
  for (auto* gate : {&g.w_z, &g.w_r, &g.w_n}) *gate = uniform_fan_in<Scalar>(in, hidden, in, rng);
  for (auto* gate : {&g.u_z, &g.u_r, &g.u_n}) *gate = uniform_fan_in<Scalar>(hidden, hidden, hidden, rng);
  for (auto* gate : {&g.b_z, &g.b_r, &g.b_n}) *gate = Matrix<Scalar>::Zero(1, hidden);
  return g;
}

}  // namespace detail

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
template <typename Scalar, typename Rng>
ModelParams<Scalar> init_model(const ModelDims& dims, Rng& rng) {
  if (dims.feature_dim < 1 || dims.classes < 1 || dims.views < 1 || dims.hidden_dim < 1)
    throw ParameterError("init_model: dimensions must be positive");
  ModelParams<Scalar> m;
  m.extractor_kind = dims.extractor;
  if (dims.extractor == ExtractorKind::kMlp) {
    m.extractor_hidden = detail::init_affine<Scalar>(dims.feature_dim, dims.extractor_width, rng);
    m.extractor_out = detail::init_affine<Scalar>(dims.extractor_width, dims.extractor_out_dim, rng);
  }
  const Index in = dims.aggregator_input_dim();
  m.gru_e = detail::init_gru<Scalar>(in, dims.hidden_dim, rng);
  m.gru_s = detail::init_gru<Scalar>(in, dims.hidden_dim, rng);
  m.classifier = detail::init_affine<Scalar>(dims.hidden_dim, dims.classes, rng);
  m.actor = detail::init_affine<Scalar>(dims.hidden_dim, dims.views, rng);
  m.value_head = detail::init_affine<Scalar>(dims.hidden_dim, 1, rng);
  return m;
}

template <typename Scalar>
ModelParams<Scalar> zeros_like(const ModelParams<Scalar>& m) {
  ModelParams<Scalar> z = m;
  for_each_param(z, [](Component, std::string_view, Matrix<Scalar>& t, std::string_view) { t.setZero(); });
  return z;
}

template <typename Scalar>
Index hidden_dim(const ModelParams<Scalar>& m) {
  return m.gru_e.u_z.rows();
}

template <typename Scalar>
Index num_classes(const ModelParams<Scalar>& m) {
  return m.classifier.weight.cols();
}

template <typename Scalar>
Index num_views(const ModelParams<Scalar>& m) {
  return m.actor.weight.cols();
}

template <typename Scalar>
Index input_dim(const ModelParams<Scalar>& m) {
  return m.extractor_kind == ExtractorKind::kMlp ? m.extractor_hidden.weight.rows() : m.gru_e.w_z.rows();
}

/// True iff every tensor of the given components is bitwise equal.
template <typename Scalar>
bool components_equal(const ModelParams<Scalar>& a, const ModelParams<Scalar>& b, ComponentSet components) {
  auto& aa = const_cast<ModelParams<Scalar>&>(a);
  auto& bb = const_cast<ModelParams<Scalar>&>(b);
  std::vector<const Matrix<Scalar>*> lhs, rhs;
  for_each_param(aa, [&](Component c, std::string_view, Matrix<Scalar>& t, std::string_view) {
    if (components.contains(c)) lhs.push_back(&t);
  });
  for_each_param(bb, [&](Component c, std::string_view, Matrix<Scalar>& t, std::string_view) {
    if (components.contains(c)) rhs.push_back(&t);
  });
  if (lhs.size() != rhs.size()) return false;
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    if (lhs[k]->rows() != rhs[k]->rows() || lhs[k]->cols() != rhs[k]->cols()) return false;
    if (std::memcmp(lhs[k]->data(), rhs[k]->data(), sizeof(Scalar) * lhs[k]->size()) != 0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Forward passes. T is Matrix<Scalar> (eager) or Var<Scalar> (recorded); every
// batched input holds one sample per row.
// ---------------------------------------------------------------------------

template <typename T>
T affine(const Affine<T>& a, const T& x) {
  return add_row(matmul(x, a.weight), a.bias);
}

/// Shared per-view feature extractor F: identity, or tanh(x W1 + b1) W2 + b2.
template <typename T>
T extract(const ModelWeights<T>& m, const T& x) {
  if (m.extractor_kind == ExtractorKind::kIdentity) return x;
  if (value_of(x).cols() != value_of(m.extractor_hidden.weight).rows())
    throw ContractViolation("extract: input dimension mismatch");
  return affine(m.extractor_out, tanh(affine(m.extractor_hidden, x)));
}

/**
 * One GRU step:
 *   z = sigmoid(x W_z + h U_z + b_z)
 *   r = sigmoid(x W_r + h U_r + b_r)
 *   n = tanh(x W_n + (r * h) U_n + b_n)
 *   h' = (1 - z) * h + z * n
 */
template <typename T>
T gru_step(const GruWeights<T>& g, const T& h_prev, const T& x) {
  const auto& hv = value_of(h_prev);
  const auto& xv = value_of(x);
  if (xv.cols() != value_of(g.w_z).rows() || hv.cols() != value_of(g.u_z).rows() || hv.rows() != xv.rows())
    throw ContractViolation("gru_step: shape mismatch");
  const T z = sigmoid(add_row(add(matmul(x, g.w_z), matmul(h_prev, g.u_z)), g.b_z));
  const T r = sigmoid(add_row(add(matmul(x, g.w_r), matmul(h_prev, g.u_r)), g.b_r));
  const T n = tanh(add_row(add(matmul(x, g.w_n), matmul(hadamard(r, h_prev), g.u_n)), g.b_n));
  return add(hadamard(one_minus(z), h_prev), hadamard(z, n));
}

/// Zero hidden state for a batch shaped like x.
template <typename T>
T initial_hidden(const GruWeights<T>& g, const T& x) {
  using Scalar = typename std::remove_cvref_t<decltype(value_of(x))>::Scalar;
  return constant_like(x, Matrix<Scalar>(Matrix<Scalar>::Zero(value_of(x).rows(), value_of(g.u_z).rows())));
}

/// Left fold of gru_step from the zero state.
template <typename T>
T aggregate(const GruWeights<T>& g, const std::vector<T>& features) {
  if (features.empty()) throw ContractViolation("aggregate: empty sequence");
  T h = initial_hidden(g, features.front());
  for (const auto& f : features) h = gru_step(g, h, f);
  return h;
}

template <typename T>
struct Classification {
  T logits;
  T probs;
};

template <typename T>
Classification<T> classify(const ModelWeights<T>& m, const T& embedding) {
  T logits = affine(m.classifier, embedding);
  T probs = softmax_rows(logits);
  return {std::move(logits), std::move(probs)};
}

/// Masked next-view distribution. mask(i, v) == 0 marks view v unavailable
/// for row i; an empty mask allows every view.
template <typename T, typename Scalar>
T act(const ModelWeights<T>& m, const T& state, const Matrix<Scalar>& mask) {
  return masked_softmax_rows(affine(m.actor, state), mask);
}

template <typename T>
T value(const ModelWeights<T>& m, const T& state) {
  return affine(m.value_head, state);
}

}  // namespace activeview

#endif  // ACTIVEVIEW_NETS_MODEL_HPP_
