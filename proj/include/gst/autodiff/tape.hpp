#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gst/autodiff/array.hpp"
#include "gst/autodiff/parameter_store.hpp"
#include "gst/error.hpp"

namespace gst {

template <typename T>
class Tape;

// Handle to a node on a tape. Cheap to copy; valid for the tape's lifetime.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Array<T>& value() const { return tape->Value(*this); }
  const Shape& shape() const { return value().shape(); }
};

// Reverse-mode tape. Nodes are appended in creation order, which is a
// topological order, so backward is a single reverse sweep.
//
// Gradients of leaves (parameters and Variable() inputs) accumulate across
// repeated Backward() calls; interior gradients are reset at the start of
// every call.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  explicit Tape(const ParameterStore<T>* store = nullptr, bool record = true)
      : store_(store), record_(record) {
    nodes_.reserve(256);
    if (store_) param_nodes_.assign(store_->size(), -1);
  }

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  const ParameterStore<T>* store() const { return store_; }
  std::size_t NumNodes() const { return nodes_.size(); }

  Var<T> Constant(Array<T> value) { return Push(std::move(value), false, {}, "constant"); }

  // Leaf that receives a gradient (used by gradient checks and tests).
  Var<T> Variable(Array<T> value) {
    Var<T> v = Push(std::move(value), record_, {}, "variable");
    nodes_[v.id].leaf = true;
    return v;
  }

  // Parameter leaf. Repeated calls for the same index return the same node.
  Var<T> Param(std::size_t index) {
    if (!store_) throw ContractError("tape has no parameter store");
    int& slot = param_nodes_.at(index);
    if (slot >= 0) return {this, slot};
    Node n;
    n.external = &store_->Value(index);
    n.requires_grad = record_;
    n.leaf = true;
    n.param_index = static_cast<int>(index);
    n.op = "param";
    nodes_.push_back(std::move(n));
    slot = static_cast<int>(nodes_.size() - 1);
    return {this, slot};
  }
  Var<T> Param(const std::string& name) { return Param(store_->IndexOf(name)); }

  const Array<T>& Value(Var<T> v) const {
    const Node& n = nodes_.at(v.id);
    return n.external ? *n.external : n.value;
  }
  bool RequiresGrad(Var<T> v) const { return nodes_.at(v.id).requires_grad; }

  // Gradient of a node, or nullptr if none has reached it.
  const Array<T>* Grad(Var<T> v) const {
    const Node& n = nodes_.at(v.id);
    return n.has_grad ? &n.grad : nullptr;
  }

  // Mutable gradient buffer, allocated on first use. For op implementations.
  Array<T>& GradRef(int id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = Array<T>(Value({this, id}).shape());
      n.has_grad = true;
    }
    return n.grad;
  }
  const Array<T>& GradOf(int id) const { return nodes_[id].grad; }
  bool HasGrad(int id) const { return nodes_[id].has_grad; }
  bool NeedsGrad(int id) const { return nodes_[id].requires_grad; }
  const Array<T>& ValueOf(int id) const { return Value({const_cast<Tape*>(this), id}); }

  void Backward(Var<T> loss) {
    if (!record_) throw ContractError("backward on a non-recording tape");
    const Array<T>& lv = Value(loss);
    if (lv.size() != 1) {
      throw ContractError("backward requires a scalar loss, got shape " +
                          lv.shape().ToString());
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      Node& n = nodes_[i];
      if (!n.leaf && n.has_grad) n.grad.Fill(T(0));
    }
    GradRef(loss.id)[0] += T(1);
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.has_grad && n.backward) n.backward(*this, id);
    }
  }

  // Adds parameter-leaf gradients into `sink`.
  void AccumulateParamGrads(Gradients<T>& sink) const {
    for (std::size_t i = 0; i < param_nodes_.size(); ++i) {
      const int id = param_nodes_[i];
      if (id < 0 || !nodes_[id].has_grad) continue;
      auto& dst = sink[i].values();
      const auto& src = nodes_[id].grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }

  // Appends a computed node. `op` names the operation in diagnostics.
  Var<T> Push(Array<T> value, bool requires_grad, BackwardFn backward,
              const char* op) {
    const std::size_t bad = value.FirstNonFinite();
    if (bad != value.size()) {
      throw NumericError(std::string("non-finite value produced by op '") + op +
                         "' at index " + std::to_string(bad));
    }
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad && record_;
    if (n.requires_grad) n.backward = std::move(backward);
    n.op = op;
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size() - 1)};
  }

  const char* OpName(Var<T> v) const { return nodes_.at(v.id).op; }

 private:
  struct Node {
    Array<T> value;
    const Array<T>* external = nullptr;
    Array<T> grad;
    BackwardFn backward;
    const char* op = "";
    int param_index = -1;
    bool requires_grad = false;
    bool has_grad = false;
    bool leaf = false;
  };

  const ParameterStore<T>* store_;
  bool record_;
  std::vector<Node> nodes_;
  std::vector<int> param_nodes_;
};

}  // namespace gst
