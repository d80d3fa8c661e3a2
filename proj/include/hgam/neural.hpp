#pragma once

// Small graph-attention actor/critic networks with hand-written backprop.
//
// A network maps a batch of same-shaped graphs to one output column per
// graph:
//
//   h_x  = lrelu(E2[kind] lrelu(E1[kind] v_x + b1) + b2)      per node x
//   s_v  = a_1' W h_v + a_2' W h_ego                            per neighbour v
//   alpha_v = softmax_v(lrelu_0.2(s_v))                         over present neighbours
//   g    = sum_v alpha_v W h_v                                  (0 without neighbours)
//   out  = act(H2 lrelu(H1 [h_ego; g] + c1) + c2)               act = tanh | identity
//
// Everything is column-major Eigen with the batch along the columns.

#include "hgam/hetgraph.hpp"
#include "hgam/world.hpp"

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hgam::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kHiddenSlope = 0.01;
inline constexpr double kAttentionSlope = 0.2;

template <typename Derived>
typename Derived::PlainObject leaky_relu(const Eigen::MatrixBase<Derived>& x, double slope) {
  return (x.array() > 0).select(x.array(), slope * x.array()).matrix();
}

/// Chain rule through LeakyReLU: upstream where z > 0, slope * upstream elsewhere.
template <typename DerivedZ, typename DerivedG>
typename DerivedG::PlainObject leaky_relu_backward(const Eigen::MatrixBase<DerivedZ>& z,
                                                   const Eigen::MatrixBase<DerivedG>& upstream,
                                                   double slope) {
  return (z.array() > 0).select(upstream.array(), slope * upstream.array()).matrix();
}

struct DenseLayer {
  Matrix weight;  // out x in
  Matrix bias;    // out x 1

  int in() const { return static_cast<int>(weight.cols()); }
  int out() const { return static_cast<int>(weight.rows()); }

  template <typename Derived>
  Matrix forward(const Eigen::MatrixBase<Derived>& x) const {
    Matrix z = weight * x;
    z.colwise() += bias.col(0);
    return z;
  }
};

struct NetShape {
  int input_width = 0;
  int embed_dim = 64;
  int head_hidden = 128;
  int output_dim = 1;
  bool tanh_output = false;
  bool use_gat = true;

  bool operator==(const NetShape&) const = default;
};

NetShape actor_shape(const WorldConfig& config);
NetShape critic_shape(const WorldConfig& config);

/// All learnable tensors of one network; also reused for gradients and the
/// optimiser moments, which share its shapes.
struct GraphNetParams {
  std::array<DenseLayer, kNumKinds> encoder_in;
  std::array<DenseLayer, kNumKinds> encoder_out;
  Matrix gat_weight;  // embed x embed
  Matrix attention;   // 2*embed x 1, [a_neighbour; a_ego]
  DenseLayer head_hidden;
  DenseLayer head_out;

  static GraphNetParams zeros(const NetShape& shape);
  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static GraphNetParams random(const NetShape& shape, Rng& rng);

  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;
  void set_zero();
  Eigen::Index num_values() const;
  bool operator==(const GraphNetParams& o) const;
};

/// Batch of graphs with identical topology: one ego column per graph plus
/// neighbour slots whose mask marks the graphs that actually have them.
struct GraphBatch {
  struct Slot {
    UavKind kind = UavKind::Muav;
    Matrix features;  // width x B
    RowVector mask;   // 1 x B, entries 0 or 1
  };
  UavKind ego_kind = UavKind::Muav;
  Matrix ego;  // width x B
  std::vector<Slot> neighbors;

  int size() const { return static_cast<int>(ego.cols()); }
};

/// Groups the ego neighbours by (kind, rank among same-kind neighbours).
/// Throws ContractViolation when the egos differ in kind or width.
GraphBatch batch_graphs(std::span<const HeteroGraph> graphs);
GraphBatch batch_graphs(const HeteroGraph& graph);

struct EncoderCache {
  Matrix x, z1, a1, z2, h;
};

struct ForwardCache {
  UavKind ego_kind = UavKind::Muav;
  EncoderCache ego;
  std::vector<UavKind> slot_kinds;
  std::vector<EncoderCache> slots;
  Matrix wh_ego;
  std::vector<Matrix> wh;
  std::vector<RowVector> score;  // pre-activation attention scores
  std::vector<RowVector> alpha;
  Matrix g, concat, z_hidden, a_hidden, z_out, out;
};

struct InputGradients {
  Matrix ego;
  std::vector<Matrix> slots;
};

struct GraphNet {
  NetShape shape;
  GraphNetParams params;
};

/// Runs the network on a batch; fills `cache` when given (required before backward).
Matrix forward(const GraphNet& net, const GraphBatch& batch, ForwardCache* cache = nullptr);

/// Backpropagates d_out (output_dim x B) through a cached forward pass.
/// Parameter gradients are accumulated into `grads` and input gradients
/// written to `inputs`; either may be null.
void backward(const GraphNet& net, const ForwardCache& cache, const Matrix& d_out,
              GraphNetParams* grads, InputGradients* inputs = nullptr);

// Single-graph entry points.

Vector encode(const GraphNetParams& params, UavKind kind, const Vector& feature);
std::vector<double> attention_coefficients(const GraphNetParams& params, const Vector& h_ego,
                                           std::span<const Vector> neighbors);
Vector gat_aggregate(const GraphNetParams& params, const Vector& h_ego,
                     std::span<const Vector> neighbors);
Action actor_forward(const GraphNet& actor, const HeteroGraph& local_graph);
double critic_forward(const GraphNet& critic, const HeteroGraph& global_view);

struct AdamState {
  GraphNetParams m;
  GraphNetParams v;
  long step = 0;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const NetShape& shape);
void adam_step(GraphNetParams& params, const GraphNetParams& grads, AdamState& state, double lr,
               const AdamOptions& options = {});

/// target <- tau * source + (1 - tau) * target
void soft_update(GraphNetParams& target, const GraphNetParams& source, double tau);

/// A trainable network with its target copy and optimiser state.
struct ParamSet {
  GraphNet net;
  GraphNet target;
  AdamState adam;

  /// Random online weights, target cloned from them, fresh optimiser.
  static ParamSet create(const NetShape& shape, Rng& rng);
};

}  // namespace hgam::nn
