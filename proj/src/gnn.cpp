#include <eagl/gnn.hpp>

#include <eagl/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace eagl {

namespace {

Eigen::MatrixXd uniform_matrix(int rows, int cols, double scale, RngStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.real() - 1.0) * scale;
  return m;
}

// Node states as rows. The neighbor term sums rows in ascending node order.
Eigen::MatrixXd neighbor_sum(const Graph& g, const Eigen::MatrixXd& h) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(h.rows(), h.cols());
  for (const Edge& e : g.edges) {
    s.row(e.first) += h.row(e.second);
    s.row(e.second) += h.row(e.first);
  }
  return s;
}

Eigen::MatrixXd feature_matrix(const GnnParams& p, const Graph& g) {
  if (g.feat_dim != p.feat_dim)
    throw ShapeMismatch("graph features have dim " + std::to_string(g.feat_dim) +
                        ", parameters expect " + std::to_string(p.feat_dim));
  Eigen::MatrixXd h(g.node_count, p.feat_dim);
  for (int v = 0; v < g.node_count; ++v)
    for (int j = 0; j < p.feat_dim; ++j)
      h(v, j) = g.features[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)];
  return h;
}

struct ForwardTrace {
  std::vector<Eigen::MatrixXd> inputs;  // h^{l-1} per layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation per layer
  Eigen::VectorXd readout;
  Eigen::VectorXd logits;
};

ForwardTrace run_forward(const GnnParams& p, const Graph& g) {
  if (g.node_count == 0) throw BadGraph("empty graph has no readout");
  ForwardTrace t;
  Eigen::MatrixXd h = feature_matrix(p, g);
  for (int l = 0; l < p.num_layers; ++l) {
    t.inputs.push_back(h);
    Eigen::MatrixXd z = h * p.w_self[static_cast<std::size_t>(l)].transpose() +
                        neighbor_sum(g, h) * p.w_nbr[static_cast<std::size_t>(l)].transpose();
    z.rowwise() += p.bias[static_cast<std::size_t>(l)].transpose();
    t.pre.push_back(z);
    h = z.cwiseMax(0.0);
  }
  t.readout = h.colwise().mean();
  t.logits = p.w_out * t.readout + p.b_out;
  return t;
}

GnnParams zero_like(const GnnParams& p) {
  GnnParams z = p;
  for (auto& m : z.w_self) m.setZero();
  for (auto& m : z.w_nbr) m.setZero();
  for (auto& b : z.bias) b.setZero();
  z.w_out.setZero();
  z.b_out.setZero();
  return z;
}

// Cross-entropy of the sample and, scaled by weight, its contribution to
// every parameter gradient.
double backward_one(const GnnParams& p, const Graph& g, int label, double weight,
                    GnnParams& grad) {
  if (label < 0 || label >= p.num_classes) throw ShapeMismatch("label out of range");
  ForwardTrace t = run_forward(p, g);
  // Stable softmax cross-entropy.
  double mx = t.logits.maxCoeff();
  Eigen::VectorXd ex = (t.logits.array() - mx).exp();
  double zsum = ex.sum();
  Eigen::VectorXd probs = ex / zsum;
  double loss = -(t.logits(label) - mx - std::log(zsum));

  Eigen::VectorXd dlogits = probs * weight;
  dlogits(label) -= weight;
  grad.w_out += dlogits * t.readout.transpose();
  grad.b_out += dlogits;
  Eigen::VectorXd dreadout = p.w_out.transpose() * dlogits;
  // Mean readout spreads the gradient evenly over nodes.
  Eigen::MatrixXd dh = (Eigen::VectorXd::Ones(g.node_count) / static_cast<double>(g.node_count)) *
                       dreadout.transpose();
  for (int l = p.num_layers - 1; l >= 0; --l) {
    const std::size_t li = static_cast<std::size_t>(l);
    Eigen::MatrixXd dz =
        dh.cwiseProduct((t.pre[li].array() > 0.0).cast<double>().matrix());
    grad.w_self[li] += dz.transpose() * t.inputs[li];
    grad.w_nbr[li] += dz.transpose() * neighbor_sum(g, t.inputs[li]);
    grad.bias[li] += dz.colwise().sum().transpose();
    if (l > 0) dh = dz * p.w_self[li] + neighbor_sum(g, dz * p.w_nbr[li]);
  }
  return loss;
}

struct Adam {
  Eigen::VectorXd m, v;
  double lr;
  int step = 0;
  explicit Adam(int dim, double lr_in)
      : m(Eigen::VectorXd::Zero(dim)), v(Eigen::VectorXd::Zero(dim)), lr(lr_in) {}
  void update(Eigen::VectorXd& theta, const Eigen::VectorXd& g) {
    ++step;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g.cwiseProduct(g);
    double mc = 1.0 - std::pow(0.9, step);
    double vc = 1.0 - std::pow(0.999, step);
    theta -= (lr / mc) * m.cwiseQuotient(((v / vc).cwiseSqrt().array() + 1e-8).matrix());
  }
};

double epoch_accuracy(const GnnParams& p, const std::vector<GnnBatchItem>& batch) {
  int hits = 0, total = 0;
  for (const GnnBatchItem& item : batch) {
    if (item.augmented) continue;
    ++total;
    Eigen::VectorXd logits = gnn_forward(p, item.graph);
    int best = 0;
    for (int y = 1; y < static_cast<int>(logits.size()); ++y)
      if (logits(y) > logits(best)) best = y;
    if (best == item.label) ++hits;
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

GnnParams init_gnn(int num_layers, int hidden, int feat_dim, int num_classes, RngStream& rng) {
  if (num_layers < 1 || hidden < 1 || feat_dim < 1 || num_classes < 2)
    throw InvalidSize("layer count, width, feature dim, and classes must be positive");
  GnnParams p;
  p.num_layers = num_layers;
  p.hidden = hidden;
  p.feat_dim = feat_dim;
  p.num_classes = num_classes;
  for (int l = 0; l < num_layers; ++l) {
    int in = l == 0 ? feat_dim : hidden;
    double scale = 1.0 / std::sqrt(static_cast<double>(in));
    p.w_self.push_back(uniform_matrix(hidden, in, scale, rng));
    p.w_nbr.push_back(uniform_matrix(hidden, in, scale, rng));
    p.bias.push_back(Eigen::VectorXd::Zero(hidden));
  }
  p.w_out = uniform_matrix(num_classes, hidden, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
  p.b_out = Eigen::VectorXd::Zero(num_classes);
  return p;
}

Eigen::VectorXd params_to_vector(const GnnParams& p) {
  std::vector<double> flat;
  auto push_matrix = [&](const Eigen::MatrixXd& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  };
  for (int l = 0; l < p.num_layers; ++l) {
    const std::size_t li = static_cast<std::size_t>(l);
    push_matrix(p.w_self[li]);
    push_matrix(p.w_nbr[li]);
    for (int i = 0; i < p.bias[li].size(); ++i) flat.push_back(p.bias[li](i));
  }
  push_matrix(p.w_out);
  for (int i = 0; i < p.b_out.size(); ++i) flat.push_back(p.b_out(i));
  return Eigen::Map<Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

void vector_to_params(const Eigen::VectorXd& v, GnnParams& p) {
  Eigen::Index at = 0;
  auto pull_matrix = [&](Eigen::MatrixXd& m) {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) m(i, j) = v(at++);
  };
  for (int l = 0; l < p.num_layers; ++l) {
    const std::size_t li = static_cast<std::size_t>(l);
    pull_matrix(p.w_self[li]);
    pull_matrix(p.w_nbr[li]);
    for (int i = 0; i < p.bias[li].size(); ++i) p.bias[li](i) = v(at++);
  }
  pull_matrix(p.w_out);
  for (int i = 0; i < p.b_out.size(); ++i) p.b_out(i) = v(at++);
  if (at != v.size()) throw ShapeMismatch("flat parameter vector has the wrong length");
}

Eigen::VectorXd gnn_forward(const GnnParams& p, const Graph& g) {
  return run_forward(p, g).logits;
}

LossGrad gnn_loss_and_grad(const GnnParams& p, const std::vector<GnnBatchItem>& batch,
                           double aug_weight) {
  if (batch.empty()) throw InvalidSize("empty batch");
  int originals = 0, augmented = 0;
  for (const GnnBatchItem& item : batch) (item.augmented ? augmented : originals)++;
  LossGrad out;
  out.grad = zero_like(p);
  for (const GnnBatchItem& item : batch) {
    if (item.augmented && (aug_weight == 0.0 || augmented == 0)) continue;
    double weight = item.augmented ? aug_weight / static_cast<double>(augmented)
                                   : 1.0 / static_cast<double>(std::max(originals, 1));
    out.loss += weight * backward_one(p, item.graph, item.label, weight, out.grad);
  }
  return out;
}

GnnParams train_gnn(const TrainSet& data, const GnnTrainConfig& cfg, const Augmenter& augment,
                    const std::vector<LabeledGraph>* test, std::vector<EpochRow>* log) {
  if (data.empty()) throw InvalidSize("no training data");
  if (cfg.warmup_epochs < 0 || cfg.train_epochs < 0 || cfg.copies < 0 || cfg.lr <= 0.0 ||
      cfg.aug_weight < 0.0)
    throw InvalidRange("bad training configuration");
  int feat_dim = data[0].graph.feat_dim;
  int num_classes = 2;
  for (const TrainItem& item : data) num_classes = std::max(num_classes, item.label + 1);

  std::vector<GnnBatchItem> originals;
  for (const TrainItem& item : data) originals.push_back({item.graph, item.label, false});

  auto record = [&](int phase, int epoch, double loss, const GnnParams& p,
                    const std::vector<GnnBatchItem>& batch) {
    if (!log) return;
    EpochRow row;
    row.phase = phase;
    row.epoch = epoch;
    row.loss = loss;
    row.train_acc = epoch_accuracy(p, batch);
    row.test_acc = test ? gnn_accuracy(p, *test) : -1.0;
    log->push_back(row);
  };

  RngStream init_rng = RngStream(mix_seed(cfg.seed, 1));
  GnnParams params = init_gnn(cfg.num_layers, cfg.hidden, feat_dim, num_classes, init_rng);
  Eigen::VectorXd theta = params_to_vector(params);
  Adam warm_opt(static_cast<int>(theta.size()), cfg.lr);
  for (int e = 1; e <= cfg.warmup_epochs; ++e) {
    LossGrad lg = gnn_loss_and_grad(params, originals, 0.0);
    warm_opt.update(theta, params_to_vector(lg.grad));
    vector_to_params(theta, params);
    record(1, e, lg.loss, params, originals);
  }

  if (cfg.train_epochs == 0) return params;

  std::vector<GnnBatchItem> combined = originals;
  RngStream aug_rng = RngStream(mix_seed(cfg.seed, 2));
  for (const TrainItem& item : data)
    for (int c = 0; c < cfg.copies; ++c)
      combined.push_back({augment(item, aug_rng), item.label, true});

  // Fresh start for the combined objective.
  RngStream retrain_rng = RngStream(mix_seed(cfg.seed, 3));
  params = init_gnn(cfg.num_layers, cfg.hidden, feat_dim, num_classes, retrain_rng);
  theta = params_to_vector(params);
  Adam main_opt(static_cast<int>(theta.size()), cfg.lr);
  for (int e = 1; e <= cfg.train_epochs; ++e) {
    LossGrad lg = gnn_loss_and_grad(params, combined, cfg.aug_weight);
    main_opt.update(theta, params_to_vector(lg.grad));
    vector_to_params(theta, params);
    record(2, e, lg.loss, params, combined);
  }
  return params;
}

double gnn_accuracy(const GnnParams& p, const std::vector<LabeledGraph>& test) {
  if (test.empty()) throw InvalidSize("empty test set");
  int hits = 0;
  for (const LabeledGraph& item : test) {
    Eigen::VectorXd logits = gnn_forward(p, item.graph);
    int best = 0;
    for (int y = 1; y < static_cast<int>(logits.size()); ++y)
      if (logits(y) > logits(best)) best = y;
    if (best == item.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

nlohmann::json gnn_params_to_json(const GnnParams& p) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  auto vector = [](const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
  };
  nlohmann::json j;
  j["num_layers"] = p.num_layers;
  j["hidden"] = p.hidden;
  j["feat_dim"] = p.feat_dim;
  j["num_classes"] = p.num_classes;
  j["layers"] = nlohmann::json::array();
  for (int l = 0; l < p.num_layers; ++l) {
    const std::size_t li = static_cast<std::size_t>(l);
    j["layers"].push_back({{"w_self", matrix(p.w_self[li])},
                           {"w_nbr", matrix(p.w_nbr[li])},
                           {"bias", vector(p.bias[li])}});
  }
  j["w_out"] = matrix(p.w_out);
  j["b_out"] = vector(p.b_out);
  return j;
}

GnnParams gnn_params_from_json(const nlohmann::json& j) {
  try {
    GnnParams p;
    p.num_layers = j.at("num_layers").get<int>();
    p.hidden = j.at("hidden").get<int>();
    p.feat_dim = j.at("feat_dim").get<int>();
    p.num_classes = j.at("num_classes").get<int>();
    auto matrix = [](const nlohmann::json& rows) {
      Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j2 = 0; j2 < m.cols(); ++j2)
          m(i, j2) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j2)].get<double>();
      return m;
    };
    auto vector = [](const nlohmann::json& vals) {
      Eigen::VectorXd v(vals.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = vals[static_cast<std::size_t>(i)].get<double>();
      return v;
    };
    for (const auto& layer : j.at("layers")) {
      p.w_self.push_back(matrix(layer.at("w_self")));
      p.w_nbr.push_back(matrix(layer.at("w_nbr")));
      p.bias.push_back(vector(layer.at("bias")));
    }
    if (static_cast<int>(p.w_self.size()) != p.num_layers)
      throw ShapeMismatch("layer count mismatch");
    p.w_out = matrix(j.at("w_out"));
    p.b_out = vector(j.at("b_out"));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("gnn params json: ") + e.what());
  }
}

}  // namespace eagl
