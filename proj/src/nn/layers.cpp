#include "ckg/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace ckg::nn {

namespace {
// Glorot-style scale keeps activations in range for both tiny and full dims.
double glorot_std(std::size_t in, std::size_t out) {
  return std::sqrt(2.0 / static_cast<double>(in + out));
}
}  // namespace

Linear::Linear(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
               std::mt19937_64& rng) {
  weight_ = &store.get_or_create(prefix + ".weight", in, out, normal_init(rng, glorot_std(in, out)));
  bias_ = &store.get_or_create(prefix + ".bias", 1, out, zeros_init());
}

ag::NodeId Linear::forward(ag::Graph& g, ag::NodeId x) const {
  return g.add_row_broadcast(g.matmul(x, g.param(*weight_)), g.param(*bias_));
}

MlpHead::MlpHead(ParamStore& store, const std::string& prefix, std::size_t in,
                 const std::vector<std::size_t>& hidden_sizes, std::size_t out, double dropout,
                 std::mt19937_64& rng)
    : dropout_(dropout) {
  std::size_t cur = in;
  for (std::size_t i = 0; i < hidden_sizes.size(); ++i) {
    layers_.emplace_back(store, prefix + ".fc" + std::to_string(i), cur, hidden_sizes[i], rng);
    cur = hidden_sizes[i];
  }
  layers_.emplace_back(store, prefix + ".out", cur, out, rng);
}

ag::NodeId MlpHead::forward(ag::Graph& g, ag::NodeId x, bool training,
                            std::mt19937_64& rng) const {
  ag::NodeId h = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    h = g.relu(layers_[i].forward(g, h));
    h = g.dropout(h, dropout_, rng, training);
  }
  return layers_.back().forward(g, h);
}

Lstm::Lstm(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t hidden,
           std::mt19937_64& rng)
    : hidden_(hidden) {
  w_input_ = &store.get_or_create(prefix + ".w_input", in, 4 * hidden,
                                  normal_init(rng, glorot_std(in, hidden)));
  w_hidden_ = &store.get_or_create(prefix + ".w_hidden", hidden, 4 * hidden,
                                   normal_init(rng, glorot_std(hidden, hidden)));
  bias_ = &store.get_or_create(prefix + ".bias", 1, 4 * hidden, zeros_init());
}

Lstm::Out Lstm::forward(ag::Graph& g, ag::NodeId x) const {
  const std::size_t n = g.value(x).rows();
  if (n == 0) throw std::invalid_argument("Lstm: empty input sequence");
  const std::size_t h = hidden_;
  ag::NodeId wx = g.param(*w_input_);
  ag::NodeId wh = g.param(*w_hidden_);
  ag::NodeId b = g.param(*bias_);
  // All input projections at once: n x 4h.
  ag::NodeId proj = g.add_row_broadcast(g.matmul(x, wx), b);

  ag::NodeId hprev = g.constant(num::Matrix(1, h));
  ag::NodeId cprev = g.constant(num::Matrix(1, h));
  std::vector<ag::NodeId> rows;
  rows.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    ag::NodeId pre = g.add(g.slice_rows(proj, t, t + 1), g.matmul(hprev, wh));
    ag::NodeId in_gate = g.sigmoid(g.slice_cols(pre, 0, h));
    ag::NodeId forget_gate = g.sigmoid(g.slice_cols(pre, h, 2 * h));
    ag::NodeId cell_cand = g.tanh(g.slice_cols(pre, 2 * h, 3 * h));
    ag::NodeId out_gate = g.sigmoid(g.slice_cols(pre, 3 * h, 4 * h));
    ag::NodeId c = g.add(g.mul(forget_gate, cprev), g.mul(in_gate, cell_cand));
    ag::NodeId hcur = g.mul(out_gate, g.tanh(c));
    rows.push_back(hcur);
    hprev = hcur;
    cprev = c;
  }
  return {g.concat_rows(rows), hprev};
}

BiLstmStack::BiLstmStack(ParamStore& store, const std::string& prefix, std::size_t in,
                         std::size_t hidden, std::size_t layers, double dropout,
                         std::mt19937_64& rng)
    : hidden_(hidden), dropout_(dropout) {
  std::size_t cur = in;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string lp = prefix + ".layer" + std::to_string(l);
    forward_.emplace_back(store, lp + ".fwd", cur, hidden, rng);
    backward_.emplace_back(store, lp + ".bwd", cur, hidden, rng);
    cur = 2 * hidden;
  }
}

BiLstmStack::Out BiLstmStack::forward(ag::Graph& g, ag::NodeId x, bool training,
                                      std::mt19937_64& rng) const {
  ag::NodeId cur = x;
  ag::NodeId fwd_last = 0, bwd_last = 0;
  for (std::size_t l = 0; l < forward_.size(); ++l) {
    Lstm::Out f = forward_[l].forward(g, cur);
    Lstm::Out b = backward_[l].forward(g, g.reverse_rows(cur));
    ag::NodeId merged = g.concat_cols({f.sequence, g.reverse_rows(b.sequence)});
    if (l + 1 < forward_.size()) merged = g.dropout(merged, dropout_, rng, training);
    cur = merged;
    fwd_last = f.last;
    bwd_last = b.last;
  }
  return {cur, g.concat_cols({fwd_last, bwd_last})};
}

ConvPoolHead::ConvPoolHead(ParamStore& store, const std::string& prefix, std::size_t in,
                           const std::vector<std::size_t>& kernel_sizes, std::size_t filters,
                           std::mt19937_64& rng)
    : in_(in), filters_(filters), kernel_sizes_(kernel_sizes) {
  for (std::size_t k : kernel_sizes_)
    convs_.emplace_back(store, prefix + ".conv" + std::to_string(k), k * in, filters, rng);
}

ag::NodeId ConvPoolHead::forward(ag::Graph& g, ag::NodeId x) const {
  std::size_t max_k = 1;
  for (std::size_t k : kernel_sizes_) max_k = std::max(max_k, k);
  ag::NodeId padded = x;
  if (g.value(x).rows() < max_k) {
    ag::NodeId pad = g.constant(num::Matrix(max_k - g.value(x).rows(), in_));
    padded = g.concat_rows({x, pad});
  }
  std::vector<ag::NodeId> pooled;
  for (std::size_t i = 0; i < kernel_sizes_.size(); ++i) {
    ag::NodeId windows = g.unfold_rows(padded, kernel_sizes_[i]);
    ag::NodeId conv = g.relu(convs_[i].forward(g, windows));
    pooled.push_back(g.max_over_rows(conv));
  }
  return g.concat_cols(pooled);
}

AdamW::AdamW(std::vector<ag::Parameter*> params, Options opt)
    : params_(std::move(params)), opt_(opt) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto* p : params_) {
    m_.emplace_back(p->value.rows(), p->value.cols());
    v_.emplace_back(p->value.rows(), p->value.cols());
  }
}

void AdamW::step() {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, step_count_);
  const double bc2 = 1.0 - std::pow(opt_.beta2, step_count_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ag::Parameter& p = *params_[i];
    if (!p.trainable) continue;
    auto& val = p.value.flat();
    auto& grd = p.grad.flat();
    auto& m = m_[i].flat();
    auto& v = v_[i].flat();
    for (std::size_t j = 0; j < val.size(); ++j) {
      m[j] = opt_.beta1 * m[j] + (1.0 - opt_.beta1) * grd[j];
      v[j] = opt_.beta2 * v[j] + (1.0 - opt_.beta2) * grd[j] * grd[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      val[j] -= opt_.learning_rate * (mhat / (std::sqrt(vhat) + opt_.eps) +
                                      opt_.weight_decay * val[j]);
    }
  }
}

void AdamW::zero_grads() {
  for (auto* p : params_) p->zero_grad();
}

}  // namespace ckg::nn
