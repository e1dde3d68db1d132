#pragma once

#include <eagl/problems.hpp>
#include <eagl/rng.hpp>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace eagl {

// Message-passing classifier: per layer, each node combines its own state
// with the sum of its neighbors' states through two weight matrices and a
// ReLU; the mean over nodes feeds a linear head.
struct GnnParams {
  int num_layers = 0;
  int hidden = 0;
  int feat_dim = 0;
  int num_classes = 0;
  std::vector<Eigen::MatrixXd> w_self;  // layer 0: hidden x feat_dim, rest hidden x hidden
  std::vector<Eigen::MatrixXd> w_nbr;
  std::vector<Eigen::VectorXd> bias;    // hidden
  Eigen::MatrixXd w_out;                // num_classes x hidden
  Eigen::VectorXd b_out;                // num_classes
};

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
GnnParams init_gnn(int num_layers, int hidden, int feat_dim, int num_classes, RngStream& rng);

// Flat-vector view for the optimizer, finite differencing, and checksums.
// Order: per layer (w_self, w_nbr, bias) row-major, then w_out, b_out.
Eigen::VectorXd params_to_vector(const GnnParams& p);
void vector_to_params(const Eigen::VectorXd& v, GnnParams& p);

Eigen::VectorXd gnn_forward(const GnnParams& p, const Graph& g);

struct GnnBatchItem {
  Graph graph;
  int label = 0;
  bool augmented = false;
};

struct LossGrad {
  double loss = 0.0;
  GnnParams grad;
};

// Mean cross-entropy over original items plus aug_weight times the mean
// cross-entropy over augmented items, with hand-derived gradients.
// aug_weight = 0 ignores augmented items entirely.
LossGrad gnn_loss_and_grad(const GnnParams& p, const std::vector<GnnBatchItem>& batch,
                           double aug_weight);

struct GnnTrainConfig {
  double aug_weight = 0.0;  // weight on the augmented-sample loss term
  int warmup_epochs = 0;    // phase one: plain cross-entropy on originals
  int train_epochs = 0;     // phase two: fresh params, combined loss
  int copies = 0;           // augmented copies drawn per original
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int hidden = 20;
  int num_layers = 3;
};

// One perturbed copy of a training item, using the supplied stream.
using Augmenter = std::function<Graph(const TrainItem&, RngStream&)>;

struct EpochRow {
  int phase = 0;  // 1 = warmup, 2 = combined
  int epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;  // -1 when no test set supplied
};

// Two-phase schedule: warmup_epochs of plain cross-entropy on the originals;
// then, if train_epochs > 0, draw `copies` perturbations per original once,
// re-initialize the parameters, and run train_epochs on the combined loss.
// Full-batch Adam (0.9, 0.999, 1e-8) throughout; everything derives from
// cfg.seed, so identical inputs give bit-identical parameters.
GnnParams train_gnn(const TrainSet& data, const GnnTrainConfig& cfg, const Augmenter& augment,
                    const std::vector<LabeledGraph>* test = nullptr,
                    std::vector<EpochRow>* log = nullptr);

// Fraction of argmax-correct predictions; ties go to the lower class.
double gnn_accuracy(const GnnParams& p, const std::vector<LabeledGraph>& test);

nlohmann::json gnn_params_to_json(const GnnParams& p);
GnnParams gnn_params_from_json(const nlohmann::json& j);

}  // namespace eagl
