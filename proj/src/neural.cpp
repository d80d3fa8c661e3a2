#include "hgam/neural.hpp"

#include "hgam/errors.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace hgam::nn {

namespace {

DenseLayer zero_layer(int in, int out) {
  return {Matrix::Zero(out, in), Matrix::Zero(out, 1)};
}

Matrix encode_batch(const GraphNetParams& p, UavKind kind, const Matrix& x, EncoderCache* cache) {
  const int k = static_cast<int>(kind);
  if (x.rows() != p.encoder_in[k].in()) {
    throw ContractViolation("encoder input width " + std::to_string(x.rows()) + " != " +
                            std::to_string(p.encoder_in[k].in()));
  }
  Matrix z1 = p.encoder_in[k].forward(x);
  Matrix a1 = leaky_relu(z1, kHiddenSlope);
  Matrix z2 = p.encoder_out[k].forward(a1);
  Matrix h = leaky_relu(z2, kHiddenSlope);
  if (cache) {
    cache->x = x;
    cache->z1 = std::move(z1);
    cache->a1 = std::move(a1);
    cache->z2 = std::move(z2);
    cache->h = h;
  }
  return h;
}

void encode_backward(const GraphNetParams& p, UavKind kind, const EncoderCache& c,
                     const Matrix& d_h, GraphNetParams* grads, Matrix* d_x) {
  const int k = static_cast<int>(kind);
  const Matrix d_z2 = leaky_relu_backward(c.z2, d_h, kHiddenSlope);
  if (grads) {
    grads->encoder_out[k].weight.noalias() += d_z2 * c.a1.transpose();
    grads->encoder_out[k].bias += d_z2.rowwise().sum();
  }
  const Matrix d_a1 = p.encoder_out[k].weight.transpose() * d_z2;
  const Matrix d_z1 = leaky_relu_backward(c.z1, d_a1, kHiddenSlope);
  if (grads) {
    grads->encoder_in[k].weight.noalias() += d_z1 * c.x.transpose();
    grads->encoder_in[k].bias += d_z1.rowwise().sum();
  }
  if (d_x) *d_x = p.encoder_in[k].weight.transpose() * d_z1;
}

// Masked softmax of LeakyReLU(a_nb' Wh_v + a_ego' Wh_ego) over the slots,
// column by column. Columns without any present slot get all-zero weights.
void attend(const GraphNetParams& p, const Matrix& wh_ego, const std::vector<Matrix>& wh,
            const std::vector<RowVector>& masks, std::vector<RowVector>& scores,
            std::vector<RowVector>& alphas) {
  const Eigen::Index embed = wh_ego.rows();
  const Eigen::Index cols = wh_ego.cols();
  const RowVector ego_term = p.attention.bottomRows(embed).transpose() * wh_ego;
  const auto n = wh.size();
  scores.assign(n, RowVector());
  alphas.assign(n, RowVector());
  std::vector<RowVector> logits(n);
  RowVector peak = RowVector::Constant(cols, -std::numeric_limits<double>::infinity());
  for (std::size_t v = 0; v < n; ++v) {
    scores[v] = p.attention.topRows(embed).transpose() * wh[v] + ego_term;
    logits[v] = leaky_relu(scores[v], kAttentionSlope);
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (masks[v](j) > 0) peak(j) = std::max(peak(j), logits[v](j));
    }
  }
  RowVector total = RowVector::Zero(cols);
  for (std::size_t v = 0; v < n; ++v) {
    alphas[v] = RowVector::Zero(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (masks[v](j) > 0) alphas[v](j) = std::exp(logits[v](j) - peak(j));
    }
    total += alphas[v];
  }
  for (std::size_t v = 0; v < n; ++v) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (total(j) > 0) alphas[v](j) /= total(j);
    }
  }
}

template <typename F>
void for_each_pair(GraphNetParams& a, const GraphNetParams& b, F&& f) {
  auto ta = a.tensors();
  const auto tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) f(*ta[i].second, *tb[i].second);
}

}  // namespace

NetShape actor_shape(const WorldConfig& config) {
  NetShape s;
  s.input_width = local_feature_width(config);
  s.output_dim = 2;
  s.tanh_output = true;
  return s;
}

NetShape critic_shape(const WorldConfig& config) {
  NetShape s;
  s.input_width = global_feature_width(config);
  s.output_dim = 1;
  s.tanh_output = false;
  return s;
}

GraphNetParams GraphNetParams::zeros(const NetShape& shape) {
  GraphNetParams p;
  const int e = shape.embed_dim;
  for (int k = 0; k < kNumKinds; ++k) {
    p.encoder_in[k] = zero_layer(shape.input_width, e);
    p.encoder_out[k] = zero_layer(e, e);
  }
  p.gat_weight = Matrix::Zero(e, e);
  p.attention = Matrix::Zero(2 * e, 1);
  p.head_hidden = zero_layer(2 * e, shape.head_hidden);
  p.head_out = zero_layer(shape.head_hidden, shape.output_dim);
  return p;
}

GraphNetParams GraphNetParams::random(const NetShape& shape, Rng& rng) {
  GraphNetParams p = zeros(shape);
  const auto fill = [&rng](Matrix& m, Eigen::Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = uniform(rng, -bound, bound);
    }
  };
  const auto fill_layer = [&fill](DenseLayer& l) {
    fill(l.weight, l.in());
    fill(l.bias, l.in());
  };
  for (int k = 0; k < kNumKinds; ++k) {
    fill_layer(p.encoder_in[k]);
    fill_layer(p.encoder_out[k]);
  }
  fill(p.gat_weight, shape.embed_dim);
  fill(p.attention, 2 * shape.embed_dim);
  fill_layer(p.head_hidden);
  fill_layer(p.head_out);
  return p;
}

std::vector<std::pair<std::string, Matrix*>> GraphNetParams::tensors() {
  std::vector<std::pair<std::string, Matrix*>> out;
  for (int k = 0; k < kNumKinds; ++k) {
    const std::string kind = kind_name(static_cast<UavKind>(k));
    out.emplace_back("encoder_in." + kind + ".weight", &encoder_in[k].weight);
    out.emplace_back("encoder_in." + kind + ".bias", &encoder_in[k].bias);
    out.emplace_back("encoder_out." + kind + ".weight", &encoder_out[k].weight);
    out.emplace_back("encoder_out." + kind + ".bias", &encoder_out[k].bias);
  }
  out.emplace_back("gat.weight", &gat_weight);
  out.emplace_back("gat.attention", &attention);
  out.emplace_back("head_hidden.weight", &head_hidden.weight);
  out.emplace_back("head_hidden.bias", &head_hidden.bias);
  out.emplace_back("head_out.weight", &head_out.weight);
  out.emplace_back("head_out.bias", &head_out.bias);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> GraphNetParams::tensors() const {
  auto mutable_view = const_cast<GraphNetParams*>(this)->tensors();
  return {mutable_view.begin(), mutable_view.end()};
}

void GraphNetParams::set_zero() {
  for (auto& [name, t] : tensors()) t->setZero();
}

Eigen::Index GraphNetParams::num_values() const {
  Eigen::Index n = 0;
  for (const auto& [name, t] : tensors()) n += t->size();
  return n;
}

bool GraphNetParams::operator==(const GraphNetParams& o) const {
  const auto a = tensors();
  const auto b = o.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].second->rows() != b[i].second->rows() || a[i].second->cols() != b[i].second->cols() ||
        *a[i].second != *b[i].second) {
      return false;
    }
  }
  return true;
}

GraphBatch batch_graphs(std::span<const HeteroGraph> graphs) {
  if (graphs.empty()) throw ContractViolation("cannot batch zero graphs");
  const int width = graphs.front().feature_width();
  const UavKind ego_kind = graphs.front().nodes.at(graphs.front().ego).kind;
  const auto cols = static_cast<Eigen::Index>(graphs.size());

  // slot key: (kind, rank among same-kind neighbours)
  std::map<std::pair<int, int>, int> slot_of;
  std::vector<std::vector<std::pair<std::pair<int, int>, int>>> keyed(graphs.size());
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    const auto& g = graphs[b];
    if (g.nodes.at(g.ego).kind != ego_kind || g.feature_width() != width) {
      throw ContractViolation("graphs in a batch must share ego kind and feature width");
    }
    std::array<int, kNumKinds> rank{};
    for (int node : g.ego_neighbors()) {
      const int kind = static_cast<int>(g.nodes[node].kind);
      const std::pair<int, int> key{kind, rank[kind]++};
      slot_of.emplace(key, 0);
      keyed[b].emplace_back(key, node);
    }
  }

  GraphBatch batch;
  batch.ego_kind = ego_kind;
  batch.ego.resize(width, cols);
  int next = 0;
  for (auto& [key, index] : slot_of) {
    index = next++;
    GraphBatch::Slot slot;
    slot.kind = static_cast<UavKind>(key.first);
    slot.features = Matrix::Zero(width, cols);
    slot.mask = RowVector::Zero(cols);
    batch.neighbors.push_back(std::move(slot));
  }
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    const auto& g = graphs[b];
    const auto col = static_cast<Eigen::Index>(b);
    batch.ego.col(col) = g.nodes[g.ego].feature;
    for (const auto& [key, node] : keyed[b]) {
      auto& slot = batch.neighbors[slot_of.at(key)];
      if (g.nodes[node].feature.size() != width) {
        throw ContractViolation("graph nodes must share one feature width");
      }
      slot.features.col(col) = g.nodes[node].feature;
      slot.mask(col) = 1.0;
    }
  }
  return batch;
}

GraphBatch batch_graphs(const HeteroGraph& graph) {
  return batch_graphs(std::span<const HeteroGraph>(&graph, 1));
}

Matrix forward(const GraphNet& net, const GraphBatch& batch, ForwardCache* cache) {
  const auto& p = net.params;
  const int embed = net.shape.embed_dim;
  const Eigen::Index cols = batch.size();

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.ego_kind = batch.ego_kind;
  const Matrix h_ego = encode_batch(p, batch.ego_kind, batch.ego, &c.ego);

  c.g = Matrix::Zero(embed, cols);
  c.slots.clear();
  c.slot_kinds.clear();
  c.wh.clear();
  c.score.clear();
  c.alpha.clear();
  if (net.shape.use_gat && !batch.neighbors.empty()) {
    c.wh_ego = p.gat_weight * h_ego;
    std::vector<RowVector> masks;
    c.slots.resize(batch.neighbors.size());
    for (std::size_t v = 0; v < batch.neighbors.size(); ++v) {
      const auto& slot = batch.neighbors[v];
      const Matrix h = encode_batch(p, slot.kind, slot.features, &c.slots[v]);
      c.wh.push_back(p.gat_weight * h);
      c.slot_kinds.push_back(slot.kind);
      masks.push_back(slot.mask);
    }
    attend(p, c.wh_ego, c.wh, masks, c.score, c.alpha);
    for (std::size_t v = 0; v < c.wh.size(); ++v) {
      c.g.array() += c.wh[v].array().rowwise() * c.alpha[v].array();
    }
  }

  c.concat.resize(2 * embed, cols);
  c.concat.topRows(embed) = h_ego;
  c.concat.bottomRows(embed) = c.g;
  c.z_hidden = p.head_hidden.forward(c.concat);
  c.a_hidden = leaky_relu(c.z_hidden, kHiddenSlope);
  c.z_out = p.head_out.forward(c.a_hidden);
  c.out = net.shape.tanh_output ? Matrix(c.z_out.array().tanh().matrix()) : c.z_out;
  return c.out;
}

void backward(const GraphNet& net, const ForwardCache& c, const Matrix& d_out,
              GraphNetParams* grads, InputGradients* inputs) {
  const auto& p = net.params;
  const int embed = net.shape.embed_dim;
  if (d_out.rows() != c.out.rows() || d_out.cols() != c.out.cols()) {
    throw ContractViolation("backward: upstream gradient shape does not match output");
  }

  const Matrix d_z_out = net.shape.tanh_output
                             ? Matrix(d_out.array() * (1.0 - c.out.array().square()))
                             : d_out;
  if (grads) {
    grads->head_out.weight.noalias() += d_z_out * c.a_hidden.transpose();
    grads->head_out.bias += d_z_out.rowwise().sum();
  }
  const Matrix d_a_hidden = p.head_out.weight.transpose() * d_z_out;
  const Matrix d_z_hidden = leaky_relu_backward(c.z_hidden, d_a_hidden, kHiddenSlope);
  if (grads) {
    grads->head_hidden.weight.noalias() += d_z_hidden * c.concat.transpose();
    grads->head_hidden.bias += d_z_hidden.rowwise().sum();
  }
  const Matrix d_concat = p.head_hidden.weight.transpose() * d_z_hidden;
  Matrix d_h_ego = d_concat.topRows(embed);
  const Matrix d_g = d_concat.bottomRows(embed);

  if (inputs) inputs->slots.assign(c.slots.size(), Matrix());
  if (!c.wh.empty()) {
    const Eigen::Index cols = d_g.cols();
    const auto a_nb = p.attention.topRows(embed);
    const auto a_ego = p.attention.bottomRows(embed);
    std::vector<RowVector> d_alpha(c.wh.size());
    RowVector weighted = RowVector::Zero(cols);
    for (std::size_t v = 0; v < c.wh.size(); ++v) {
      d_alpha[v] = (d_g.array() * c.wh[v].array()).colwise().sum().matrix();
      weighted.array() += c.alpha[v].array() * d_alpha[v].array();
    }
    Matrix d_wh_ego = Matrix::Zero(embed, cols);
    for (std::size_t v = 0; v < c.wh.size(); ++v) {
      const RowVector d_logit = (c.alpha[v].array() * (d_alpha[v] - weighted).array()).matrix();
      const RowVector d_score = leaky_relu_backward(c.score[v], d_logit, kAttentionSlope);
      Matrix d_wh = (d_g.array().rowwise() * c.alpha[v].array()).matrix();
      d_wh.noalias() += a_nb * d_score;
      d_wh_ego.noalias() += a_ego * d_score;
      if (grads) {
        grads->attention.topRows(embed).noalias() += c.wh[v] * d_score.transpose();
        grads->attention.bottomRows(embed).noalias() += c.wh_ego * d_score.transpose();
        grads->gat_weight.noalias() += d_wh * c.slots[v].h.transpose();
      }
      const Matrix d_h = p.gat_weight.transpose() * d_wh;
      encode_backward(p, c.slot_kinds[v], c.slots[v], d_h, grads,
                      inputs ? &inputs->slots[v] : nullptr);
    }
    if (grads) grads->gat_weight.noalias() += d_wh_ego * c.ego.h.transpose();
    d_h_ego.noalias() += p.gat_weight.transpose() * d_wh_ego;
  }
  encode_backward(p, c.ego_kind, c.ego, d_h_ego, grads, inputs ? &inputs->ego : nullptr);
}

Vector encode(const GraphNetParams& params, UavKind kind, const Vector& feature) {
  return encode_batch(params, kind, feature, nullptr);
}

std::vector<double> attention_coefficients(const GraphNetParams& params, const Vector& h_ego,
                                           std::span<const Vector> neighbors) {
  if (neighbors.empty()) return {};
  const Matrix wh_ego = params.gat_weight * h_ego;
  std::vector<Matrix> wh;
  std::vector<RowVector> masks;
  for (const auto& h : neighbors) {
    wh.push_back(params.gat_weight * h);
    masks.push_back(RowVector::Ones(1));
  }
  std::vector<RowVector> scores, alphas;
  attend(params, wh_ego, wh, masks, scores, alphas);
  std::vector<double> out;
  for (const auto& a : alphas) out.push_back(a(0));
  return out;
}

Vector gat_aggregate(const GraphNetParams& params, const Vector& h_ego,
                     std::span<const Vector> neighbors) {
  Vector g = Vector::Zero(params.gat_weight.rows());
  const auto alpha = attention_coefficients(params, h_ego, neighbors);
  for (std::size_t v = 0; v < alpha.size(); ++v) g += alpha[v] * (params.gat_weight * neighbors[v]);
  return g;
}

Action actor_forward(const GraphNet& actor, const HeteroGraph& local_graph) {
  const Matrix out = forward(actor, batch_graphs(local_graph));
  return {out(0, 0), out(1, 0)};
}

double critic_forward(const GraphNet& critic, const HeteroGraph& global_view) {
  return forward(critic, batch_graphs(global_view))(0, 0);
}

AdamState make_adam_state(const NetShape& shape) {
  return {GraphNetParams::zeros(shape), GraphNetParams::zeros(shape), 0};
}

void adam_step(GraphNetParams& params, const GraphNetParams& grads, AdamState& state, double lr,
               const AdamOptions& o) {
  state.step += 1;
  const double correction1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].second->size() != g[i].second->size()) {
      throw ContractViolation("adam_step: gradient shape mismatch for " + p[i].first);
    }
    auto mi = m[i].second->array();
    auto vi = v[i].second->array();
    const auto gi = g[i].second->array();
    mi = o.beta1 * mi + (1.0 - o.beta1) * gi;
    vi = o.beta2 * vi + (1.0 - o.beta2) * gi.square();
    p[i].second->array() -= lr * (mi / correction1) / ((vi / correction2).sqrt() + o.epsilon);
  }
}

void soft_update(GraphNetParams& target, const GraphNetParams& source, double tau) {
  for_each_pair(target, source, [tau](Matrix& t, const Matrix& s) {
    t = tau * s + (1.0 - tau) * t;
  });
}

ParamSet ParamSet::create(const NetShape& shape, Rng& rng) {
  ParamSet ps;
  ps.net = {shape, GraphNetParams::random(shape, rng)};
  ps.target = ps.net;
  ps.adam = make_adam_state(shape);
  return ps;
}

}  // namespace hgam::nn
