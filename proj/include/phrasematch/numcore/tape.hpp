#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "phrasematch/numcore/matrix.hpp"

namespace phrasematch {

/// A trainable (or frozen) matrix with its gradient accumulator.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
  /// Rows of this matrix are penalised by the diversity regulariser.
  bool diversity = false;

  Parameter() = default;
  Parameter(std::string n, Matrix v, bool train = true, bool div = false)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()),
        trainable(train), diversity(div) {}

  void zero_grad() { grad.fill(0.0); }
};

inline void zero_grads(std::span<Parameter* const> params) {
  for (auto* p : params) p->zero_grad();
}

/// Kinds of primitive recorded on a tape. Used for diagnostics and for the
/// gradient-rule fault injection that validates the gradient checker.
enum class OpKind {
  Parameter,
  Constant,
  MatMul,
  Add,
  Sub,
  Hadamard,
  Sigmoid,
  Tanh,
  OneMinus,
  Scale,
  AddRowBroadcast,
  TopRows,
  PickRows,
  ConcatRows,
  ConcatCols,
  Cosine,
  InverseDistance,
  SoftmaxCrossEntropy,
  SigmoidCrossEntropy,
  SumSquares,
  RowCosineSquares,
  Custom,
};

constexpr std::string_view op_name(OpKind k) {
  switch (k) {
    case OpKind::Parameter: return "parameter";
    case OpKind::Constant: return "constant";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Hadamard: return "hadamard";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Tanh: return "tanh";
    case OpKind::OneMinus: return "one_minus";
    case OpKind::Scale: return "scale";
    case OpKind::AddRowBroadcast: return "add_row_broadcast";
    case OpKind::TopRows: return "top_rows";
    case OpKind::PickRows: return "pick_rows";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::ConcatCols: return "concat_cols";
    case OpKind::Cosine: return "cosine";
    case OpKind::InverseDistance: return "inverse_distance";
    case OpKind::SoftmaxCrossEntropy: return "softmax_cross_entropy";
    case OpKind::SigmoidCrossEntropy: return "sigmoid_cross_entropy";
    case OpKind::SumSquares: return "sum_squares";
    case OpKind::RowCosineSquares: return "row_cosine_squares";
    case OpKind::Custom: return "custom";
  }
  return "unknown";
}

class Tape;

/// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
};

/// Records a forward pass as a flat list of nodes; backward() walks the list
/// in exact reverse recording order. A tape is single-use and single-threaded.
class Tape {
 public:
  /// Receives the node's output gradient and pushes contributions into its
  /// inputs with Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf bound to a parameter. The value is read through the pointer, so the
  /// parameter must outlive the tape and must not change while it is in use.
  Var param(Parameter& p) {
    Node n;
    n.kind = OpKind::Parameter;
    n.external = &p.value;
    n.param = &p;
    n.needs_grad = p.trainable;
    return push(std::move(n));
  }

  Var constant(Matrix m) {
    Node n;
    n.kind = OpKind::Constant;
    n.value = std::move(m);
    return push(std::move(n));
  }

  /// Appends an operation. `inputs` decides whether gradients flow through it.
  Var record(OpKind kind, Matrix value, std::span<const Var> inputs, BackwardFn backward) {
    Node n;
    n.kind = kind;
    n.value = std::move(value);
    for (const auto& v : inputs) {
      check_owned(v);
      n.needs_grad = n.needs_grad || nodes_[v.id].needs_grad;
    }
    if (n.needs_grad) {
      n.backward = std::move(backward);
      grad_kinds_.insert(kind);
    }
    return push(std::move(n));
  }

  const Matrix& value(Var v) const {
    check_owned(v);
    const Node& n = nodes_[v.id];
    return n.external ? *n.external : n.value;
  }
  bool needs_grad(Var v) const {
    check_owned(v);
    return nodes_[v.id].needs_grad;
  }

  /// Adds `delta` into the gradient of `target`. Called from backward rules.
  void accumulate(Var target, const Matrix& delta) {
    Node& n = nodes_[target.id];
    if (!n.needs_grad) return;
    const Matrix& shape = n.external ? *n.external : n.value;
    require_same_shape(shape, delta, "accumulate");
    if (n.grad.empty()) n.grad = Matrix(shape.rows(), shape.cols());
    const double scale = (fault_ && current_kind_ == *fault_) ? fault_scale : 1.0;
    for (std::size_t i = 0; i < delta.size(); ++i) n.grad[i] += scale * delta[i];
  }

  /// Back-propagates from a 1x1 loss node. Parameter leaves add their node
  /// gradient into Parameter::grad.
  void backward(Var loss) {
    if (loss.tape != this) throw ContractError("backward: loss node is not on this tape");
    check_owned(loss);
    if (used_) throw ContractError("backward: tape already replayed");
    const Matrix& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1)
      throw ContractError("backward: loss must be a scalar, got " + lv.shape());
    used_ = true;
    nodes_[loss.id].grad = Matrix(1, 1, 1.0);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.empty()) continue;
      if (n.kind == OpKind::Parameter) {
        Parameter& p = *n.param;
        for (std::size_t j = 0; j < n.grad.size(); ++j) p.grad[j] += n.grad[j];
        continue;
      }
      if (!n.backward) continue;
      current_kind_ = n.kind;
      const Matrix out_grad = std::move(n.grad);
      n.grad = Matrix();
      n.backward(*this, out_grad);
    }
    current_kind_.reset();
  }

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Operation kinds recorded on a gradient-carrying path so far.
  const std::set<OpKind>& gradient_kinds() const noexcept { return grad_kinds_; }

  /// Fault injection: every gradient contribution emitted by operations of
  /// `kind` is scaled by `fault_scale`. Exists so the gradient checker can be
  /// shown to detect a broken rule; never set during training.
  void inject_fault(std::optional<OpKind> kind) { fault_ = kind; }
  static constexpr double fault_scale = 1.25;

 private:
  struct Node {
    OpKind kind = OpKind::Constant;
    Matrix value;
    const Matrix* external = nullptr;
    Parameter* param = nullptr;
    Matrix grad;
    BackwardFn backward;
    bool needs_grad = false;
  };

  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{this, nodes_.size() - 1};
  }
  void check_owned(Var v) const {
    if (v.tape != this || v.id >= nodes_.size())
      throw ContractError("variable does not belong to this tape");
  }

  std::vector<Node> nodes_;
  std::set<OpKind> grad_kinds_;
  std::optional<OpKind> fault_;
  std::optional<OpKind> current_kind_;
  bool used_ = false;
};

}  // namespace phrasematch
