#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "epinode/finite_diff.hpp"
#include "epinode/mlp.hpp"
#include "epinode/rng.hpp"
#include "epinode/tape.hpp"
#include "epinode/weights_io.hpp"

using namespace epinode;

namespace {

// One differentiable scalar probe around a single primitive: the op output
// is dotted with fixed coefficients so every output coordinate matters.
struct PrimitiveCase {
  const char* name;
  std::vector<Tensor> leaf_shapes;  // prototypes; data overwritten per point
  std::function<NodeId(Tape&, const std::vector<NodeId>&)> build;
  double lo = -2.0, hi = 2.0;
  double keep_away_from_zero = 0.0;  // resample margin for recip / clamp kinks
};

Tensor pack(const std::vector<Tensor>& parts) {
  std::vector<double> flat;
  for (const auto& p : parts) flat.insert(flat.end(), p.data.begin(), p.data.end());
  return Tensor::vec(flat);
}

double eval_case(const PrimitiveCase& pc, const Tensor& packed,
                 const std::vector<double>& mix, Tensor* grad_out) {
  Tape tape;
  std::vector<NodeId> ids;
  size_t off = 0;
  for (const auto& proto : pc.leaf_shapes) {
    Tensor t = proto;
    for (size_t i = 0; i < t.size(); ++i) t.data[i] = packed.data[off + i];
    off += t.size();
    ids.push_back(tape.leaf(t, true));
  }
  NodeId out = pc.build(tape, ids);
  NodeId c = tape.constant(Tensor::vec(std::vector<double>(
      mix.begin(), mix.begin() + tape.length(out))));
  NodeId loss = tape.sum(tape.mul(out, c));
  if (grad_out) {
    tape.backward(loss);
    std::vector<double> g;
    for (NodeId id : ids) {
      auto gi = tape.grad(id);
      g.insert(g.end(), gi.begin(), gi.end());
    }
    *grad_out = Tensor::vec(g);
  }
  return tape.value(loss)[0];
}

void check_primitive(const PrimitiveCase& pc) {
  Rng rng(0x9E3779B97F4A7C15ull);
  std::vector<double> mix;
  for (int i = 0; i < 64; ++i) mix.push_back(rng.uniform(0.5, 1.5));
  size_t total = 0;
  for (const auto& p : pc.leaf_shapes) total += p.size();
  for (int trial = 0; trial < 20; ++trial) {
    Tensor point = Tensor::zeros({static_cast<int>(total)});
    for (auto& v : point.data) {
      do {
        v = rng.uniform(pc.lo, pc.hi);
      } while (std::abs(v) < pc.keep_away_from_zero);
    }
    auto f = [&](const Tensor& x) { return eval_case(pc, x, mix, nullptr); };
    auto g = [&](const Tensor& x) {
      Tensor grad;
      eval_case(pc, x, mix, &grad);
      return grad;
    };
    double disc = finite_diff_check(f, g, point, 1e-5);
    INFO("primitive " << pc.name << " trial " << trial);
    CHECK(disc <= 1e-6);
  }
}

}  // namespace

TEST_SUITE_BEGIN("diffcore");

TEST_CASE("mlp identity spec passes input through") {
  MlpSpec spec{{2, 2}, Activation::tanh_fn, Activation::identity};
  auto weights = identity_mlp_weights(spec);
  Tape tape;
  std::vector<NodeId> wids;
  for (const auto& w : weights) wids.push_back(tape.leaf(w, true));
  NodeId in = tape.leaf(Tensor::vec({0.3, -0.1}));
  NodeId out = mlp_apply(tape, spec, wids, in);
  CHECK(tape.value(out)[0] == doctest::Approx(0.3));
  CHECK(tape.value(out)[1] == doctest::Approx(-0.1));
}

TEST_CASE("single sigmoid neuron at zero gives one half") {
  MlpSpec spec{{1, 1}, Activation::tanh_fn, Activation::sigmoid_fn};
  Tape tape;
  std::vector<NodeId> wids{tape.leaf(Tensor({1, 1}, {1.0}), true),
                           tape.leaf(Tensor::vec({0.0}), true)};
  NodeId out = mlp_apply(tape, spec, wids, tape.leaf(Tensor::vec({0.0})));
  CHECK(tape.value(out)[0] == doctest::Approx(0.5));
}

TEST_CASE("2-3-1 tanh network matches scalar-by-scalar evaluation") {
  MlpSpec spec{{2, 3, 1}, Activation::tanh_fn, Activation::identity};
  Tensor w0({3, 2}, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6});
  Tensor b0({3}, {0.01, -0.02, 0.03});
  Tensor w1({1, 3}, {0.7, -0.8, 0.9});
  Tensor b1({1}, {0.05});

  Tape tape;
  std::vector<NodeId> wids{tape.leaf(w0, true), tape.leaf(b0, true),
                           tape.leaf(w1, true), tape.leaf(b1, true)};
  NodeId out = mlp_apply(tape, spec, wids, tape.leaf(Tensor::vec({1.0, 1.0})));

  double h0 = std::tanh(0.1 * 1.0 + -0.2 * 1.0 + 0.01);
  double h1 = std::tanh(0.3 * 1.0 + 0.4 * 1.0 + -0.02);
  double h2 = std::tanh(-0.5 * 1.0 + 0.6 * 1.0 + 0.03);
  double expected = 0.7 * h0 + -0.8 * h1 + 0.9 * h2 + 0.05;
  CHECK(tape.value(out)[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("mlp shape errors name the layer") {
  MlpSpec spec{{2, 3}, Activation::tanh_fn, Activation::identity};
  Tape tape;
  std::vector<NodeId> wids{tape.leaf(Tensor::zeros({3, 3}), true),  // wrong fan-in
                           tape.leaf(Tensor::zeros({3}), true)};
  NodeId in = tape.leaf(Tensor::vec({1.0, 2.0}));
  CHECK_THROWS_WITH_AS(mlp_apply(tape, spec, wids, in),
                       doctest::Contains("layer 0"), std::invalid_argument);
}

TEST_CASE("reverse_grad of linear map y = 3x") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::scalar(2.0), true);
  NodeId y = tape.scale(x, 3.0);
  tape.backward(y);
  CHECK(tape.grad(x)[0] == doctest::Approx(3.0));
}

TEST_CASE("reverse_grad of sigmoid at zero is one quarter") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::scalar(0.0), true);
  NodeId y = tape.sigmoid(x);
  tape.backward(y);
  CHECK(tape.grad(x)[0] == doctest::Approx(0.25));
}

TEST_CASE("unreachable leaves get zero gradient, every leaf is reported") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::scalar(1.5), true);
  NodeId orphan = tape.leaf(Tensor::vec({1.0, 2.0}), true);
  NodeId y = tape.mul(x, x);
  auto grads = reverse_grad(tape, y, Tensor::scalar(1.0));
  REQUIRE(grads.size() == 2);
  CHECK(grads[0].first == x);
  CHECK(grads[0].second.data[0] == doctest::Approx(3.0));
  CHECK(grads[1].first == orphan);
  CHECK(grads[1].second.data[0] == 0.0);
  CHECK(grads[1].second.data[1] == 0.0);
}

TEST_CASE("backward rejects unknown node ids and bad seeds") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::scalar(1.0), true);
  CHECK_THROWS_AS(tape.backward(999), std::out_of_range);
  std::vector<double> seed2{1.0, 1.0};
  CHECK_THROWS_AS(tape.backward(x, seed2), std::invalid_argument);
}

TEST_CASE("gradient is linear in the seed") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::vec({0.4, -0.7, 1.2}), true);
  NodeId y = tape.tanh(tape.scale(x, 1.3));
  std::vector<double> seed{0.3, -1.1, 0.5};
  tape.backward(y, seed);
  Tensor g1 = tape.grad_tensor(x);
  std::vector<double> seed7(seed);
  for (auto& s : seed7) s *= 7.0;
  tape.backward(y, seed7);
  Tensor g7 = tape.grad_tensor(x);
  for (size_t i = 0; i < g1.size(); ++i)
    CHECK(g7.data[i] == doctest::Approx(7.0 * g1.data[i]).epsilon(1e-13));
}

TEST_CASE("replay reproduces forward values bit-exactly") {
  Rng rng(77);
  MlpSpec spec{{4, 16, 3}, Activation::tanh_fn, Activation::sigmoid_fn};
  auto weights = init_mlp_weights(spec, rng);
  Tape tape;
  std::vector<NodeId> wids;
  for (const auto& w : weights) wids.push_back(tape.leaf(w, true));
  NodeId in = tape.leaf(Tensor::vec({0.1, -0.2, 0.3, 0.9}));
  NodeId out = mlp_apply(tape, spec, wids, in);
  std::vector<double> first(tape.value(out).begin(), tape.value(out).end());
  tape.forward();
  auto second = tape.value(out);
  for (size_t i = 0; i < first.size(); ++i) CHECK(first[i] == second[i]);
}

TEST_CASE("non-finite forward value aborts naming the operation") {
  Tape tape;
  NodeId x = tape.leaf(Tensor::vec({0.0}));
  CHECK_THROWS_WITH_AS(tape.recip(x), doctest::Contains("recip"), NumericalError);
  CHECK_THROWS_AS(tape.leaf(Tensor::vec({std::nan("")})), NumericalError);
}

TEST_CASE("finite_diff_check on x squared at 2") {
  auto f = [](const Tensor& x) { return x.data[0] * x.data[0]; };
  auto g = [](const Tensor& x) { return Tensor::vec({2.0 * x.data[0]}); };
  double disc = finite_diff_check(f, g, Tensor::scalar(2.0));
  CHECK(disc <= 1e-8);
}

TEST_CASE("finite_diff_check on a constant function is exactly zero") {
  auto f = [](const Tensor&) { return 4.25; };
  auto g = [](const Tensor& x) { return Tensor::zeros({static_cast<int>(x.size())}); };
  CHECK(finite_diff_check(f, g, Tensor::vec({1.0, -3.0})) == 0.0);
}

TEST_CASE("every primitive passes the finite-difference oracle at 1e-6") {
  std::vector<PrimitiveCase> cases;
  cases.push_back({"add",
                   {Tensor::zeros({4}), Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.add(v[0], v[1]); }});
  cases.push_back({"mul",
                   {Tensor::zeros({4}), Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.mul(v[0], v[1]); }});
  cases.push_back({"mul_broadcast",
                   {Tensor::zeros({1}), Tensor::zeros({5})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.mul(v[0], v[1]); }});
  cases.push_back({"matvec",
                   {Tensor::zeros({3, 4}), Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.matvec(v[0], v[1]); }});
  cases.push_back({"tanh",
                   {Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.tanh(v[0]); }});
  cases.push_back({"sigmoid",
                   {Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.sigmoid(v[0]); }});
  cases.push_back({"softplus",
                   {Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.softplus(v[0]); }});
  cases.push_back({"sum",
                   {Tensor::zeros({5})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.sum(v[0]); }});
  cases.push_back({"scale",
                   {Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.scale(v[0], -1.7); }});
  cases.push_back({"slice",
                   {Tensor::zeros({6})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.slice(v[0], 2, 3); }});
  cases.push_back({"concat",
                   {Tensor::zeros({3}), Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.concat(v[0], v[1]); }});
  PrimitiveCase rc{"recip",
                   {Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.recip(v[0]); }};
  rc.keep_away_from_zero = 0.4;
  cases.push_back(rc);
  PrimitiveCase cc{"clamp_min",
                   {Tensor::zeros({4})},
                   [](Tape& t, const std::vector<NodeId>& v) { return t.clamp_min(v[0], 0.0); }};
  cc.keep_away_from_zero = 0.3;
  cases.push_back(cc);

  for (const auto& pc : cases) check_primitive(pc);
}

TEST_CASE("weight collection JSON round trip is lossless") {
  Rng rng(123);
  std::vector<NamedTensor> ws;
  Tensor t = Tensor::zeros({3, 5});
  for (auto& v : t.data) v = rng.uniform(-1.0, 1.0) / 3.0;
  ws.push_back({"layer0.W", t});
  ws.push_back({"layer0.b", Tensor::vec({1e-17, -0.1, 0.30000000000000004})});
  auto text = weights_to_json(ws);
  auto back = weights_from_json(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "layer0.W");
  CHECK(back[0].value.shape == std::vector<int>{3, 5});
  for (size_t i = 0; i < t.size(); ++i) CHECK(back[0].value.data[i] == t.data[i]);
  for (size_t i = 0; i < 3; ++i) CHECK(back[1].value.data[i] == ws[1].value.data[i]);
}

TEST_SUITE_END();
