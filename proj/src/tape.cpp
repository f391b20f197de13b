#include "epinode/tape.hpp"

#include <algorithm>
#include <cmath>

namespace epinode {

const char* op_name(Op op) {
  switch (op) {
    case Op::leaf: return "leaf";
    case Op::add: return "add";
    case Op::mul: return "mul";
    case Op::matvec: return "matvec";
    case Op::vtanh: return "tanh";
    case Op::vsigmoid: return "sigmoid";
    case Op::vsoftplus: return "softplus";
    case Op::vsum: return "sum";
    case Op::scale: return "scale";
    case Op::slice: return "slice";
    case Op::concat: return "concat";
    case Op::recip: return "recip";
    case Op::clamp_min: return "clamp_min";
  }
  return "?";
}

namespace {
inline double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }
// softplus with the usual large-argument guard so exp cannot overflow
inline double softplus_scalar(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}
}  // namespace

NodeId Tape::push(Node n) {
  n.off = static_cast<int32_t>(values_.size());
  values_.resize(values_.size() + static_cast<size_t>(n.len), 0.0);
  nodes_.push_back(n);
  NodeId id = static_cast<NodeId>(nodes_.size() - 1);
  if (n.op != Op::leaf) {
    eval(id);
    check_finite(id);
  }
  return id;
}

void Tape::reserve(size_t nodes, size_t scalars) {
  nodes_.reserve(nodes);
  values_.reserve(scalars);
}

NodeId Tape::leaf(const Tensor& t, bool param) {
  if (!t.all_finite()) throw NumericalError("leaf: non-finite input tensor");
  Node n;
  n.op = Op::leaf;
  n.len = static_cast<int32_t>(t.size());
  if (t.shape.size() == 2) {
    n.rows = t.shape[0];
    n.cols = t.shape[1];
  } else {
    n.rows = n.len;
    n.cols = 0;
  }
  n.iaux = param ? 1 : 0;
  NodeId id = push(n);
  std::copy(t.data.begin(), t.data.end(), values_.begin() + nodes_[id].off);
  leaves_.push_back(id);
  if (param) params_.push_back(id);
  return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
  if (nodes_[a].len != nodes_[b].len)
    throw std::invalid_argument("add: length mismatch " + std::to_string(nodes_[a].len) +
                                " vs " + std::to_string(nodes_[b].len));
  Node n;
  n.op = Op::add;
  n.a = a;
  n.b = b;
  n.len = nodes_[a].len;
  n.rows = n.len;
  return push(n);
}

NodeId Tape::mul(NodeId a, NodeId b) {
  int la = nodes_[a].len, lb = nodes_[b].len;
  if (la != lb && la != 1 && lb != 1)
    throw std::invalid_argument("mul: incompatible lengths " + std::to_string(la) + " vs " +
                                std::to_string(lb));
  Node n;
  n.op = Op::mul;
  n.a = a;
  n.b = b;
  n.len = std::max(la, lb);
  n.rows = n.len;
  return push(n);
}

NodeId Tape::matvec(NodeId w, NodeId x) {
  const Node& wn = nodes_[w];
  const Node& xn = nodes_[x];
  if (wn.cols == 0)
    throw std::invalid_argument("matvec: first operand is not a matrix");
  if (wn.cols != xn.len)
    throw std::invalid_argument("matvec: matrix is " + std::to_string(wn.rows) + "x" +
                                std::to_string(wn.cols) + " but vector has length " +
                                std::to_string(xn.len));
  Node n;
  n.op = Op::matvec;
  n.a = w;
  n.b = x;
  n.len = wn.rows;
  n.rows = n.len;
  return push(n);
}

NodeId Tape::tanh(NodeId a) {
  Node n;
  n.op = Op::vtanh;
  n.a = a;
  n.len = nodes_[a].len;
  n.rows = n.len;
  return push(n);
}

NodeId Tape::sigmoid(NodeId a) {
  Node n;
  n.op = Op::vsigmoid;
  n.a = a;
  n.len = nodes_[a].len;
  n.rows = n.len;
  return push(n);
}

NodeId Tape::softplus(NodeId a) {
  Node n;
  n.op = Op::vsoftplus;
  n.a = a;
  n.len = nodes_[a].len;
  n.rows = n.len;
  return push(n);
}

NodeId Tape::sum(NodeId a) {
  Node n;
  n.op = Op::vsum;
  n.a = a;
  n.len = 1;
  n.rows = 1;
  return push(n);
}

NodeId Tape::scale(NodeId a, double factor) {
  Node n;
  n.op = Op::scale;
  n.a = a;
  n.len = nodes_[a].len;
  n.rows = n.len;
  n.daux = factor;
  return push(n);
}

NodeId Tape::slice(NodeId a, int begin, int len) {
  if (begin < 0 || len < 1 || begin + len > nodes_[a].len)
    throw std::invalid_argument("slice: range [" + std::to_string(begin) + ", " +
                                std::to_string(begin + len) + ") outside length " +
                                std::to_string(nodes_[a].len));
  Node n;
  n.op = Op::slice;
  n.a = a;
  n.len = len;
  n.rows = len;
  n.iaux = begin;
  return push(n);
}

NodeId Tape::concat(NodeId a, NodeId b) {
  Node n;
  n.op = Op::concat;
  n.a = a;
  n.b = b;
  n.len = nodes_[a].len + nodes_[b].len;
  n.rows = n.len;
  return push(n);
}

NodeId Tape::recip(NodeId a) {
  Node n;
  n.op = Op::recip;
  n.a = a;
  n.len = nodes_[a].len;
  n.rows = n.len;
  return push(n);
}

NodeId Tape::clamp_min(NodeId a, double floor) {
  Node n;
  n.op = Op::clamp_min;
  n.a = a;
  n.len = nodes_[a].len;
  n.rows = n.len;
  n.daux = floor;
  return push(n);
}

void Tape::eval(NodeId id) {
  Node& n = nodes_[id];
  double* out = values_.data() + n.off;
  const double* va = n.a >= 0 ? values_.data() + nodes_[n.a].off : nullptr;
  const double* vb = n.b >= 0 ? values_.data() + nodes_[n.b].off : nullptr;
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::add:
      for (int i = 0; i < n.len; ++i) out[i] = va[i] + vb[i];
      break;
    case Op::mul: {
      int la = nodes_[n.a].len, lb = nodes_[n.b].len;
      if (la == lb) {
        for (int i = 0; i < n.len; ++i) out[i] = va[i] * vb[i];
      } else if (la == 1) {
        for (int i = 0; i < n.len; ++i) out[i] = va[0] * vb[i];
      } else {
        for (int i = 0; i < n.len; ++i) out[i] = va[i] * vb[0];
      }
      break;
    }
    case Op::matvec: {
      int rows = nodes_[n.a].rows, cols = nodes_[n.a].cols;
      for (int i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* wrow = va + static_cast<size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) acc += wrow[j] * vb[j];
        out[i] = acc;
      }
      break;
    }
    case Op::vtanh:
      for (int i = 0; i < n.len; ++i) out[i] = std::tanh(va[i]);
      break;
    case Op::vsigmoid:
      for (int i = 0; i < n.len; ++i) out[i] = sigmoid_scalar(va[i]);
      break;
    case Op::vsoftplus:
      for (int i = 0; i < n.len; ++i) out[i] = softplus_scalar(va[i]);
      break;
    case Op::vsum: {
      double acc = 0.0;
      for (int i = 0; i < nodes_[n.a].len; ++i) acc += va[i];
      out[0] = acc;
      break;
    }
    case Op::scale:
      for (int i = 0; i < n.len; ++i) out[i] = n.daux * va[i];
      break;
    case Op::slice:
      for (int i = 0; i < n.len; ++i) out[i] = va[n.iaux + i];
      break;
    case Op::concat: {
      int la = nodes_[n.a].len;
      for (int i = 0; i < la; ++i) out[i] = va[i];
      for (int i = 0; i < nodes_[n.b].len; ++i) out[la + i] = vb[i];
      break;
    }
    case Op::recip:
      for (int i = 0; i < n.len; ++i) out[i] = 1.0 / va[i];
      break;
    case Op::clamp_min:
      for (int i = 0; i < n.len; ++i) out[i] = va[i] < n.daux ? n.daux : va[i];
      break;
  }
}

void Tape::check_finite(NodeId id) const {
  const Node& n = nodes_[id];
  const double* v = values_.data() + n.off;
  for (int i = 0; i < n.len; ++i) {
    if (!std::isfinite(v[i]))
      throw NumericalError(std::string("non-finite value in op '") + op_name(n.op) +
                           "' at node " + std::to_string(id));
  }
}

void Tape::forward() {
  for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
    if (nodes_[id].op == Op::leaf) continue;
    eval(id);
    check_finite(id);
  }
}

std::span<const double> Tape::value(NodeId id) const {
  const Node& n = nodes_[id];
  return {values_.data() + n.off, static_cast<size_t>(n.len)};
}

std::span<double> Tape::leaf_value(NodeId id) {
  Node& n = nodes_[id];
  if (n.op != Op::leaf) throw std::invalid_argument("leaf_value: node is not a leaf");
  return {values_.data() + n.off, static_cast<size_t>(n.len)};
}

std::span<const double> Tape::grad(NodeId id) const {
  const Node& n = nodes_[id];
  return {grads_.data() + n.off, static_cast<size_t>(n.len)};
}

Tensor Tape::value_tensor(NodeId id) const {
  const Node& n = nodes_[id];
  std::vector<int> shape = n.cols > 0 ? std::vector<int>{n.rows, n.cols}
                                      : std::vector<int>{n.len};
  auto v = value(id);
  return Tensor(shape, std::vector<double>(v.begin(), v.end()));
}

Tensor Tape::grad_tensor(NodeId id) const {
  const Node& n = nodes_[id];
  std::vector<int> shape = n.cols > 0 ? std::vector<int>{n.rows, n.cols}
                                      : std::vector<int>{n.len};
  auto g = grad(id);
  return Tensor(shape, std::vector<double>(g.begin(), g.end()));
}

void Tape::backward(NodeId output) {
  backward(output, std::vector<double>(static_cast<size_t>(nodes_[output].len), 1.0));
}

void Tape::backward(NodeId output, std::span<const double> seed) {
  if (output < 0 || output >= static_cast<NodeId>(nodes_.size()))
    throw std::out_of_range("backward: unknown node id " + std::to_string(output));
  if (static_cast<int>(seed.size()) != nodes_[output].len)
    throw std::invalid_argument("backward: seed length " + std::to_string(seed.size()) +
                                " does not match output length " +
                                std::to_string(nodes_[output].len));
  grads_.assign(values_.size(), 0.0);
  std::copy(seed.begin(), seed.end(), grads_.begin() + nodes_[output].off);

  for (NodeId id = output; id >= 0; --id) {
    const Node& n = nodes_[id];
    if (n.op == Op::leaf) continue;
    const double* g = grads_.data() + n.off;
    double* ga = n.a >= 0 ? grads_.data() + nodes_[n.a].off : nullptr;
    double* gb = n.b >= 0 ? grads_.data() + nodes_[n.b].off : nullptr;
    const double* va = n.a >= 0 ? values_.data() + nodes_[n.a].off : nullptr;
    const double* vb = n.b >= 0 ? values_.data() + nodes_[n.b].off : nullptr;
    const double* vout = values_.data() + n.off;
    switch (n.op) {
      case Op::leaf:
        break;
      case Op::add:
        for (int i = 0; i < n.len; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      case Op::mul: {
        int la = nodes_[n.a].len, lb = nodes_[n.b].len;
        if (la == lb) {
          for (int i = 0; i < n.len; ++i) {
            ga[i] += g[i] * vb[i];
            gb[i] += g[i] * va[i];
          }
        } else if (la == 1) {
          for (int i = 0; i < n.len; ++i) {
            ga[0] += g[i] * vb[i];
            gb[i] += g[i] * va[0];
          }
        } else {
          for (int i = 0; i < n.len; ++i) {
            ga[i] += g[i] * vb[0];
            gb[0] += g[i] * va[i];
          }
        }
        break;
      }
      case Op::matvec: {
        int rows = nodes_[n.a].rows, cols = nodes_[n.a].cols;
        for (int i = 0; i < rows; ++i) {
          double gi = g[i];
          double* warow = ga + static_cast<size_t>(i) * cols;
          const double* wrow = va + static_cast<size_t>(i) * cols;
          for (int j = 0; j < cols; ++j) {
            warow[j] += gi * vb[j];
            gb[j] += gi * wrow[j];
          }
        }
        break;
      }
      case Op::vtanh:
        for (int i = 0; i < n.len; ++i) ga[i] += g[i] * (1.0 - vout[i] * vout[i]);
        break;
      case Op::vsigmoid:
        for (int i = 0; i < n.len; ++i) ga[i] += g[i] * vout[i] * (1.0 - vout[i]);
        break;
      case Op::vsoftplus:
        for (int i = 0; i < n.len; ++i) ga[i] += g[i] * sigmoid_scalar(va[i]);
        break;
      case Op::vsum:
        for (int i = 0; i < nodes_[n.a].len; ++i) ga[i] += g[0];
        break;
      case Op::scale:
        for (int i = 0; i < n.len; ++i) ga[i] += n.daux * g[i];
        break;
      case Op::slice:
        for (int i = 0; i < n.len; ++i) ga[n.iaux + i] += g[i];
        break;
      case Op::concat: {
        int la = nodes_[n.a].len;
        for (int i = 0; i < la; ++i) ga[i] += g[i];
        for (int i = 0; i < nodes_[n.b].len; ++i) gb[i] += g[la + i];
        break;
      }
      case Op::recip:
        for (int i = 0; i < n.len; ++i) ga[i] -= g[i] * vout[i] * vout[i];
        break;
      case Op::clamp_min:
        for (int i = 0; i < n.len; ++i)
          if (va[i] > n.daux) ga[i] += g[i];
        break;
    }
  }
}

std::vector<std::pair<NodeId, Tensor>> reverse_grad(Tape& tape, NodeId output,
                                                    const Tensor& seed) {
  tape.backward(output, seed.data);
  std::vector<std::pair<NodeId, Tensor>> out;
  out.reserve(tape.leaves().size());
  for (NodeId id : tape.leaves()) out.emplace_back(id, tape.grad_tensor(id));
  return out;
}

}  // namespace epinode
