#pragma once

#include <random>
#include <string>
#include <vector>

#include "ckg/ag/graph.hpp"
#include "ckg/nn/param_store.hpp"

namespace ckg::nn {

// y = x W + b
class Linear {
 public:
  Linear(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
         std::mt19937_64& rng);
  ag::NodeId forward(ag::Graph& g, ag::NodeId x) const;
  std::size_t out_dim() const { return weight_->value.cols(); }

 private:
  ag::Parameter* weight_;
  ag::Parameter* bias_;
};

// Linear stack with ReLU + dropout between layers and a plain linear output.
class MlpHead {
 public:
  MlpHead(ParamStore& store, const std::string& prefix, std::size_t in,
          const std::vector<std::size_t>& hidden_sizes, std::size_t out, double dropout,
          std::mt19937_64& rng);
  ag::NodeId forward(ag::Graph& g, ag::NodeId x, bool training, std::mt19937_64& rng) const;

 private:
  std::vector<Linear> layers_;
  double dropout_;
};

// Single-direction LSTM.
class Lstm {
 public:
  Lstm(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
       std::mt19937_64& rng);

  struct Out {
    ag::NodeId sequence;  // n x hidden
    ag::NodeId last;      // 1 x hidden
  };
  Out forward(ag::Graph& g, ag::NodeId x) const;
  std::size_t hidden() const { return hidden_; }

 private:
  std::size_t hidden_;
  ag::Parameter* w_input_;   // in x 4h
  ag::Parameter* w_hidden_;  // h x 4h
  ag::Parameter* bias_;      // 1 x 4h
};

// Stack of bidirectional LSTM layers; per-layer output is the concatenation
// of both directions.
class BiLstmStack {
 public:
  BiLstmStack(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
              std::size_t layers, double dropout, std::mt19937_64& rng);

  struct Out {
    ag::NodeId sequence;  // n x 2*hidden
    ag::NodeId pooled;    // 1 x 2*hidden: forward last state + backward first-position state
  };
  Out forward(ag::Graph& g, ag::NodeId x, bool training, std::mt19937_64& rng) const;
  std::size_t out_dim() const { return 2 * hidden_; }

 private:
  std::size_t hidden_;
  double dropout_;
  std::vector<Lstm> forward_, backward_;
};

// Max-over-time convolutional head: one conv per kernel size, ReLU,
// max pooling, concatenated. Input shorter than the kernel is zero-padded.
class ConvPoolHead {
 public:
  ConvPoolHead(ParamStore& store, const std::string& prefix, std::size_t in,
               const std::vector<std::size_t>& kernel_sizes, std::size_t filters,
               std::mt19937_64& rng);
  ag::NodeId forward(ag::Graph& g, ag::NodeId x) const;  // 1 x (filters * |kernels|)
  std::size_t out_dim() const { return kernel_sizes_.size() * filters_; }

 private:
  std::size_t in_, filters_;
  std::vector<std::size_t> kernel_sizes_;
  std::vector<Linear> convs_;
};

class AdamW {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
  };
  AdamW(std::vector<ag::Parameter*> params, Options opt);
  void step();
  void zero_grads();

 private:
  std::vector<ag::Parameter*> params_;
  Options opt_;
  std::vector<num::Matrix> m_, v_;
  long step_count_ = 0;
};

}  // namespace ckg::nn
