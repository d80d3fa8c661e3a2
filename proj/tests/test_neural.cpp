#include <doctest.h>

#include "gradcheck.hpp"
#include "hgam/env.hpp"
#include "hgam/errors.hpp"
#include "hgam/neural.hpp"

#include <cmath>
#include <numeric>

using namespace hgam;
using namespace hgam::nn;
using hgam::testing::check_input_gradients;
using hgam::testing::check_network;

namespace {

NetShape tiny_shape(int out, bool tanh_out, bool gat = true) {
  NetShape s;
  s.input_width = 5;
  s.embed_dim = 4;
  s.head_hidden = 6;
  s.output_dim = out;
  s.tanh_output = tanh_out;
  s.use_gat = gat;
  return s;
}

NetShape unit_shape() {
  NetShape s;
  s.input_width = 1;
  s.embed_dim = 1;
  s.head_hidden = 1;
  s.output_dim = 1;
  return s;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

HeteroGraph graph_with(UavKind ego_kind, const std::vector<std::pair<UavKind, Vector>>& nodes,
                       const Vector& ego) {
  HeteroGraph g;
  g.nodes.push_back({0, ego_kind, ego});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    g.nodes.push_back({static_cast<int>(i + 1), nodes[i].first, nodes[i].second});
    g.edges.emplace_back(static_cast<int>(i + 1), 0);
  }
  return g;
}

}  // namespace

TEST_SUITE("neural") {
  TEST_CASE("leaky relu branches") {
    DenseLayer layer{Matrix::Constant(1, 1, 2.0), Matrix::Zero(1, 1)};
    CHECK(leaky_relu(layer.forward(Matrix::Constant(1, 1, 3.0)), kHiddenSlope)(0, 0) == 6.0);
    CHECK(leaky_relu(layer.forward(Matrix::Constant(1, 1, -3.0)), kHiddenSlope)(0, 0) ==
          doctest::Approx(-0.06));
  }

  TEST_CASE("encoder") {
    auto p = GraphNetParams::zeros(tiny_shape(1, false));
    CHECK(encode(p, UavKind::Muav, Vector::Random(5)).isZero());
    auto u = GraphNetParams::zeros(unit_shape());
    u.encoder_in[0].weight(0, 0) = 2.0;
    u.encoder_out[0].weight(0, 0) = 1.0;
    CHECK(encode(u, UavKind::Muav, vec({3}))(0) == 6.0);
    CHECK_THROWS_AS(encode(u, UavKind::Muav, vec({1, 2})), ContractViolation);
  }

  TEST_CASE("attention coefficients") {
    auto p = GraphNetParams::zeros(unit_shape());
    p.gat_weight(0, 0) = 1.0;
    p.attention(0, 0) = 1.0;
    const Vector ego = vec({0.3});
    std::vector<Vector> one{vec({5})};
    CHECK(attention_coefficients(p, ego, one) == std::vector<double>{1.0});
    std::vector<Vector> same{vec({2}), vec({2})};
    const auto s = attention_coefficients(p, ego, same);
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[1] == doctest::Approx(0.5));
    std::vector<Vector> logits{vec({0}), vec({std::log(3.0)})};
    const auto l = attention_coefficients(p, ego, logits);
    CHECK(l[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(l[1] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(attention_coefficients(p, ego, std::vector<Vector>{}).empty());
  }

  TEST_CASE("aggregation") {
    NetShape s = tiny_shape(1, false);
    auto p = GraphNetParams::zeros(s);
    p.gat_weight = Matrix::Identity(4, 4);
    const Vector h = vec({1, -2, 3, 0.5});
    CHECK(gat_aggregate(p, h, std::vector<Vector>{}).isZero());
    CHECK(gat_aggregate(p, h, std::vector<Vector>{h}).isApprox(h));
    CHECK(gat_aggregate(p, h, std::vector<Vector>{h, h}).isApprox(h));
  }

  TEST_CASE("zero networks") {
    const auto s = tiny_shape(2, true);
    GraphNet actor{s, GraphNetParams::zeros(s)};
    Rng rng(1);
    const auto g = hgam::testing::random_graph(5, UavKind::Muav, rng);
    CHECK(actor_forward(actor, g) == Action{0, 0});
    const auto c = tiny_shape(1, false);
    GraphNet critic{c, GraphNetParams::zeros(c)};
    CHECK(critic_forward(critic, g) == 0.0);
  }

  TEST_CASE("actor outputs stay inside (-1, 1)") {
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
      const auto s = tiny_shape(2, true);
      GraphNet actor{s, GraphNetParams::random(s, rng)};
      actor.params.head_out.weight *= 50.0;
      const auto g = hgam::testing::random_graph(5, static_cast<UavKind>(i % 2), rng);
      const Action a = actor_forward(actor, g);
      CHECK(std::abs(a.ax) <= 1.0);
      CHECK(std::abs(a.ay) <= 1.0);
    }
  }

  TEST_CASE("critic is invariant to neighbour order") {
    Rng rng(3);
    const auto s = tiny_shape(1, false);
    GraphNet critic{s, GraphNetParams::random(s, rng)};
    const Vector ego = Vector::Random(5);
    const Vector a = Vector::Random(5);
    const Vector b = Vector::Random(5);
    const Vector c = Vector::Random(5);
    const double q1 = critic_forward(
        critic, graph_with(UavKind::Muav, {{UavKind::Muav, a}, {UavKind::Muav, b}, {UavKind::Cuav, c}}, ego));
    const double q2 = critic_forward(
        critic, graph_with(UavKind::Muav, {{UavKind::Cuav, c}, {UavKind::Muav, b}, {UavKind::Muav, a}}, ego));
    CHECK(q1 == doctest::Approx(q2).epsilon(1e-12));
  }

  TEST_CASE("duplicating identical neighbours keeps g") {
    Rng rng(4);
    const auto s = tiny_shape(1, false);
    GraphNet critic{s, GraphNetParams::random(s, rng)};
    const Vector ego = Vector::Random(5);
    const Vector a = Vector::Random(5);
    const double one = critic_forward(critic, graph_with(UavKind::Muav, {{UavKind::Muav, a}}, ego));
    const double two = critic_forward(
        critic, graph_with(UavKind::Muav, {{UavKind::Muav, a}, {UavKind::Muav, a}}, ego));
    CHECK(one == doctest::Approx(two).epsilon(1e-12));
  }

  TEST_CASE("no-GAT networks ignore neighbours") {
    Rng rng(5);
    const auto s = tiny_shape(1, false, false);
    GraphNet critic{s, GraphNetParams::random(s, rng)};
    const Vector ego = Vector::Random(5);
    const double alone = critic_forward(critic, graph_with(UavKind::Muav, {}, ego));
    const double crowded = critic_forward(
        critic, graph_with(UavKind::Muav, {{UavKind::Muav, Vector::Random(5)}}, ego));
    CHECK(alone == crowded);
  }

  TEST_CASE("batched forward equals per-graph forward") {
    Rng rng(6);
    const auto s = tiny_shape(2, true);
    GraphNet net{s, GraphNetParams::random(s, rng)};
    std::vector<HeteroGraph> graphs;
    for (int i = 0; i < 8; ++i) graphs.push_back(hgam::testing::random_graph(5, UavKind::Cuav, rng));
    const Matrix out = forward(net, batch_graphs(graphs));
    for (int i = 0; i < 8; ++i) {
      const Matrix single = forward(net, batch_graphs(graphs[i]));
      CHECK((out.col(i) - single.col(0)).norm() < 1e-12);
    }
  }

  TEST_CASE("batching rejects mixed egos") {
    Rng rng(7);
    std::vector<HeteroGraph> graphs{hgam::testing::random_graph(5, UavKind::Muav, rng),
                                    hgam::testing::random_graph(5, UavKind::Cuav, rng)};
    CHECK_THROWS_AS(batch_graphs(graphs), ContractViolation);
    CHECK_THROWS_AS(batch_graphs(std::span<const HeteroGraph>{}), ContractViolation);
  }

  TEST_CASE("single unit gradient") {
    // out = w2 * lrelu(w1 * x) with everything else zero; L = out^2
    auto s = unit_shape();
    s.use_gat = false;
    GraphNet net{s, GraphNetParams::zeros(s)};
    net.params.encoder_in[0].weight(0, 0) = 1.0;
    net.params.encoder_out[0].weight(0, 0) = 1.0;
    net.params.head_hidden.weight(0, 0) = 1.0;
    net.params.head_out.weight(0, 0) = 2.0;
    const auto g = graph_with(UavKind::Muav, {}, vec({1}));
    ForwardCache cache;
    const Matrix out = forward(net, batch_graphs(g), &cache);
    CHECK(out(0, 0) == 2.0);
    auto grads = GraphNetParams::zeros(s);
    backward(net, cache, 2 * out, &grads);
    CHECK(grads.head_out.weight(0, 0) == 4.0);
  }

  TEST_CASE("tanh passes slope 1 at zero") {
    auto s = unit_shape();
    s.tanh_output = true;
    GraphNet net{s, GraphNetParams::zeros(s)};
    const auto g = graph_with(UavKind::Muav, {}, vec({0}));
    ForwardCache cache;
    forward(net, batch_graphs(g), &cache);
    auto grads = GraphNetParams::zeros(s);
    backward(net, cache, Matrix::Ones(1, 1), &grads);
    CHECK(grads.head_out.bias(0, 0) == 1.0);
  }

  TEST_CASE("parameter gradients match finite differences") {
    Rng rng(11);
    for (int draw = 0; draw < 10; ++draw) {
      for (bool actor : {true, false}) {
        const auto shape = tiny_shape(actor ? 2 : 1, actor, draw % 5 != 4);
        const auto r = check_network(shape, rng, 4, [](const std::string&) { return true; });
        INFO(r.worst);
        CHECK(r.max_rel_error < 1e-4);
      }
    }
  }

  TEST_CASE("input gradients match finite differences") {
    Rng rng(12);
    for (int draw = 0; draw < 10; ++draw) {
      const auto r = check_input_gradients(tiny_shape(1, false), rng, 3);
      INFO(r.worst);
      CHECK(r.max_rel_error < 1e-4);
    }
  }

  TEST_CASE("backward rejects a wrongly shaped upstream gradient") {
    Rng rng(13);
    const auto s = tiny_shape(1, false);
    GraphNet net{s, GraphNetParams::random(s, rng)};
    ForwardCache cache;
    forward(net, hgam::testing::random_batch(5, 3, rng), &cache);
    auto grads = GraphNetParams::zeros(s);
    CHECK_THROWS_AS(backward(net, cache, Matrix::Ones(2, 3), &grads), ContractViolation);
  }

  TEST_CASE("adam") {
    const auto s = tiny_shape(1, false);
    Rng rng(14);
    auto p = GraphNetParams::random(s, rng);
    const auto before = p;
    auto state = make_adam_state(s);
    adam_step(p, GraphNetParams::zeros(s), state, 0.001);
    CHECK(p == before);

    auto ones = GraphNetParams::zeros(s);
    for (auto& [name, t] : ones.tensors()) t->setOnes();
    auto fresh = make_adam_state(s);
    auto q = before;
    adam_step(q, ones, fresh, 0.001);
    const auto tq = q.tensors();
    const auto tb = before.tensors();
    for (std::size_t i = 0; i < tq.size(); ++i) {
      const Matrix delta = *tq[i].second - *tb[i].second;
      CHECK(delta.maxCoeff() == doctest::Approx(-0.001).epsilon(1e-6));
      CHECK(delta.minCoeff() == doctest::Approx(-0.001).epsilon(1e-6));
    }
    CHECK(fresh.step == 1);
  }

  TEST_CASE("soft update") {
    const auto s = tiny_shape(1, false);
    Rng rng(15);
    const auto src = GraphNetParams::random(s, rng);
    auto tgt = GraphNetParams::random(s, rng);
    const auto orig = tgt;

    auto copy = tgt;
    soft_update(copy, src, 1.0);
    CHECK(copy == src);
    auto same = tgt;
    soft_update(same, src, 0.0);
    CHECK(same == orig);

    auto ones = GraphNetParams::zeros(s);
    for (auto& [n, t] : ones.tensors()) t->setOnes();
    auto zeros = GraphNetParams::zeros(s);
    soft_update(zeros, ones, 0.01);
    CHECK(zeros.gat_weight(0, 0) == doctest::Approx(0.01));

    auto twice = orig;
    soft_update(twice, src, 0.1);
    soft_update(twice, src, 0.1);
    auto once = orig;
    soft_update(once, src, 1 - 0.9 * 0.9);
    const auto a = twice.tensors();
    const auto b = once.tensors();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second->isApprox(*b[i].second, 1e-12));
  }

  TEST_CASE("param sets start with target equal to online") {
    Rng rng(16);
    const auto ps = ParamSet::create(tiny_shape(2, true), rng);
    CHECK(ps.net.params == ps.target.params);
    CHECK(ps.adam.step == 0);
  }

  TEST_CASE("random init respects the fan-in bound") {
    Rng rng(17);
    const auto s = tiny_shape(1, false);
    const auto p = GraphNetParams::random(s, rng);
    CHECK(p.encoder_in[0].weight.cwiseAbs().maxCoeff() <= 1 / std::sqrt(5.0));
    CHECK(p.head_hidden.weight.cwiseAbs().maxCoeff() <= 1 / std::sqrt(8.0));
  }

  TEST_CASE("world-sized shapes") {
    const WorldConfig c;
    CHECK(actor_shape(c).input_width == 51);
    CHECK(actor_shape(c).output_dim == 2);
    CHECK(critic_shape(c).input_width == 53);
    CHECK(critic_shape(c).output_dim == 1);
  }
}
