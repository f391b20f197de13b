#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "epinode/tensor.hpp"

namespace epinode {

using NodeId = int32_t;

// Raised when a non-finite value appears in a forward evaluation. The
// message names the operation and node index so long rollouts can be
// debugged without a debugger attached.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

enum class Op : uint8_t {
  leaf,
  add,       // elementwise a + b (equal lengths)
  mul,       // elementwise a * b; scalar-vector broadcast allowed
  matvec,    // a: (r x c) matrix node, b: length-c vector -> length-r vector
  vtanh,
  vsigmoid,
  vsoftplus,
  vsum,      // -> scalar
  scale,     // a * daux (compile-time constant factor)
  slice,     // [iaux, iaux+len)
  concat,    // [a; b]
  recip,     // 1 / a
  clamp_min, // max(a, daux)
};

const char* op_name(Op op);

// Records a forward computation as a flat list of primitive operations.
// Values live in one contiguous arena so an epoch of training can replay
// the same record with fresh leaf values and no allocation. The record is
// append-only and confined to a single thread while it is being built.
class Tape {
 public:
  // --- construction -------------------------------------------------------
  // Every op evaluates eagerly when appended, so values are available
  // immediately and shape errors surface at the call site.
  NodeId leaf(const Tensor& t, bool param = false);
  NodeId constant(const Tensor& t) { return leaf(t, false); }
  NodeId constant(double v) { return leaf(Tensor::scalar(v), false); }

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b) { return add(a, scale(b, -1.0)); }
  NodeId mul(NodeId a, NodeId b);
  NodeId matvec(NodeId w, NodeId x);
  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId softplus(NodeId a);
  NodeId sum(NodeId a);
  NodeId scale(NodeId a, double factor);
  NodeId slice(NodeId a, int begin, int len);
  NodeId concat(NodeId a, NodeId b);
  NodeId recip(NodeId a);
  NodeId clamp_min(NodeId a, double floor);

  // --- access --------------------------------------------------------------
  std::span<const double> value(NodeId id) const;
  std::span<double> leaf_value(NodeId id);  // mutable; leaves only
  std::span<const double> grad(NodeId id) const;
  Tensor value_tensor(NodeId id) const;
  Tensor grad_tensor(NodeId id) const;
  int length(NodeId id) const { return nodes_[id].len; }
  bool is_param(NodeId id) const { return nodes_[id].op == Op::leaf && nodes_[id].iaux != 0; }
  size_t node_count() const { return nodes_.size(); }
  const std::vector<NodeId>& params() const { return params_; }
  const std::vector<NodeId>& leaves() const { return leaves_; }

  // --- execution ------------------------------------------------------------
  // Recomputes every non-leaf value in record order. Bit-identical to the
  // values produced at construction time when leaves are unchanged.
  void forward();

  // Accumulates d(seed . value(output)) / d(node) into the gradient arena
  // for every node. Leaves not reachable from `output` end up with zero
  // gradient. Must follow a forward pass over the same leaf values.
  void backward(NodeId output, std::span<const double> seed);
  void backward(NodeId output);  // scalar output, seed = 1

  void reserve(size_t nodes, size_t scalars);

 private:
  struct Node {
    Op op;
    NodeId a = -1, b = -1;
    int32_t off = 0, len = 0;
    int32_t rows = 0, cols = 0;  // cols > 0 marks a matrix leaf
    int32_t iaux = 0;            // slice begin; leaf param flag
    double daux = 0.0;           // scale factor / clamp floor
  };

  NodeId push(Node n);
  void eval(NodeId id);
  void check_finite(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<NodeId> params_;
  std::vector<NodeId> leaves_;
};

// Convenience wrapper matching the verification workflow: runs backward
// from `output` with `seed` and returns the gradient of every leaf in
// creation order as (node id, gradient) pairs.
std::vector<std::pair<NodeId, Tensor>> reverse_grad(Tape& tape, NodeId output,
                                                    const Tensor& seed);

}  // namespace epinode
