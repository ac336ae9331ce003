#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ckg/num/matrix.hpp"

namespace ckg::ag {

// A named trainable tensor. Gradients accumulate across Graph::backward calls
// until zero_grad(); the optimizer consumes them.
struct Parameter {
  std::string name;
  num::Matrix value;
  num::Matrix grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, num::Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }
};

using NodeId = int;

// Dynamic reverse-mode autodiff over Matrix-valued nodes. A Graph is built
// per example (or per batch) and discarded; Parameters live outside it.
class Graph {
 public:
  NodeId constant(num::Matrix v);
  NodeId param(Parameter& p);

  NodeId add(NodeId a, NodeId b);
  // Adds a 1xC row vector to every row of a RxC matrix.
  NodeId add_row_broadcast(NodeId a, NodeId row);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId scale(NodeId a, double s);
  NodeId matmul(NodeId a, NodeId b);
  NodeId matmul_nt(NodeId a, NodeId b);  // a * b^T

  NodeId tanh(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId relu(NodeId a);
  NodeId gelu(NodeId a);
  NodeId softmax_rows(NodeId a);
  NodeId layer_norm_rows(NodeId a, NodeId gamma, NodeId beta, double eps = 1e-12);
  NodeId dropout(NodeId a, double p, std::mt19937_64& rng, bool training);

  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId slice_rows(NodeId a, std::size_t r0, std::size_t r1);
  NodeId reverse_rows(NodeId a);
  NodeId slice_cols(NodeId a, std::size_t c0, std::size_t c1);
  // Gathers rows of `table` by index; repeated ids accumulate gradient.
  NodeId gather_rows(NodeId table, const std::vector<int>& ids);
  // Sliding windows of k rows flattened into rows of width k*cols.
  NodeId unfold_rows(NodeId a, std::size_t k);

  NodeId sum_all(NodeId a);    // 1x1
  NodeId mean_all(NodeId a);   // 1x1
  NodeId max_over_rows(NodeId a);  // column-wise max, 1xC
  NodeId squared_frobenius(NodeId a);  // 1x1

  // -w * log softmax(logits)[target]; logits is 1xK.
  NodeId softmax_cross_entropy(NodeId logits, std::size_t target, double weight = 1.0);
  // Mean over K units of binary cross-entropy on sigmoid(logits); logits 1xK.
  NodeId sigmoid_binary_cross_entropy(NodeId logits, const std::vector<double>& targets);
  // Linear-chain CRF negative log-likelihood with virtual start/stop states.
  // emissions: n x L, transitions: (L+2) x (L+2), tags: n valid label indices.
  NodeId crf_negative_log_likelihood(NodeId emissions, NodeId transitions,
                                     const std::vector<int>& tags);

  void backward(NodeId loss);

  const num::Matrix& value(NodeId id) const { return nodes_[id].value; }
  const num::Matrix& grad(NodeId id) const { return nodes_[id].grad; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    num::Matrix value;
    num::Matrix grad;
    bool needs_grad = false;
    std::vector<NodeId> parents;
    std::function<void(Graph&, NodeId)> backprop;  // empty for leaves
    Parameter* bound = nullptr;
  };

  NodeId emplace(num::Matrix value, std::vector<NodeId> parents,
                 std::function<void(Graph&, NodeId)> backprop);
  bool any_needs_grad(const std::vector<NodeId>& ids) const;
  num::Matrix& grad_ref(NodeId id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

}  // namespace ckg::ag
