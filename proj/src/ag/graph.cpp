#include "ckg/ag/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ckg/crf/linear_chain.hpp"
#include "ckg/num/kernels.hpp"

namespace ckg::ag {

namespace {

void acc_into(num::Matrix& dst, const num::Matrix& src) {
  if (dst.empty()) dst = num::Matrix(src.rows(), src.cols());
  for (std::size_t i = 0; i < src.size(); ++i) dst.flat()[i] += src.flat()[i];
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

NodeId Graph::emplace(num::Matrix value, std::vector<NodeId> parents,
                      std::function<void(Graph&, NodeId)> backprop) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.needs_grad = any_needs_grad(n.parents);
  if (n.needs_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

bool Graph::any_needs_grad(const std::vector<NodeId>& ids) const {
  return std::any_of(ids.begin(), ids.end(), [&](NodeId i) { return nodes_[i].needs_grad; });
}

NodeId Graph::constant(num::Matrix v) {
  Node n;
  n.value = std::move(v);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.needs_grad = p.trainable;
  n.bound = &p;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::add(NodeId a, NodeId b) {
  require(nodes_[a].value.same_shape(nodes_[b].value), "add: shape mismatch");
  num::Matrix v = nodes_[a].value;
  const auto& bv = nodes_[b].value;
  for (std::size_t i = 0; i < v.size(); ++i) v.flat()[i] += bv.flat()[i];
  return emplace(std::move(v), {a, b}, [a, b](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    if (g.nodes_[a].needs_grad) acc_into(g.grad_ref(a), d);
    if (g.nodes_[b].needs_grad) acc_into(g.grad_ref(b), d);
  });
}

NodeId Graph::add_row_broadcast(NodeId a, NodeId row) {
  const auto& av = nodes_[a].value;
  const auto& rv = nodes_[row].value;
  require(rv.rows() == 1 && rv.cols() == av.cols(), "add_row_broadcast: row must be 1 x cols(a)");
  num::Matrix v = av;
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) += rv(0, c);
  return emplace(std::move(v), {a, row}, [a, row](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    if (g.nodes_[a].needs_grad) acc_into(g.grad_ref(a), d);
    if (g.nodes_[row].needs_grad) {
      num::Matrix& rg = g.grad_ref(row);
      if (rg.empty()) rg = num::Matrix(1, d.cols());
      for (std::size_t r = 0; r < d.rows(); ++r)
        for (std::size_t c = 0; c < d.cols(); ++c) rg(0, c) += d(r, c);
    }
  });
}

NodeId Graph::sub(NodeId a, NodeId b) {
  require(nodes_[a].value.same_shape(nodes_[b].value), "sub: shape mismatch");
  num::Matrix v = nodes_[a].value;
  const auto& bv = nodes_[b].value;
  for (std::size_t i = 0; i < v.size(); ++i) v.flat()[i] -= bv.flat()[i];
  return emplace(std::move(v), {a, b}, [a, b](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    if (g.nodes_[a].needs_grad) acc_into(g.grad_ref(a), d);
    if (g.nodes_[b].needs_grad) {
      num::Matrix& bg = g.grad_ref(b);
      if (bg.empty()) bg = num::Matrix(d.rows(), d.cols());
      for (std::size_t i = 0; i < d.size(); ++i) bg.flat()[i] -= d.flat()[i];
    }
  });
}

NodeId Graph::mul(NodeId a, NodeId b) {
  require(nodes_[a].value.same_shape(nodes_[b].value), "mul: shape mismatch");
  num::Matrix v = nodes_[a].value;
  const auto& bv = nodes_[b].value;
  for (std::size_t i = 0; i < v.size(); ++i) v.flat()[i] *= bv.flat()[i];
  return emplace(std::move(v), {a, b}, [a, b](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    const auto& av = g.nodes_[a].value;
    const auto& bv2 = g.nodes_[b].value;
    if (g.nodes_[a].needs_grad) {
      num::Matrix& ag = g.grad_ref(a);
      if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
      for (std::size_t i = 0; i < d.size(); ++i) ag.flat()[i] += d.flat()[i] * bv2.flat()[i];
    }
    if (g.nodes_[b].needs_grad) {
      num::Matrix& bg = g.grad_ref(b);
      if (bg.empty()) bg = num::Matrix(d.rows(), d.cols());
      for (std::size_t i = 0; i < d.size(); ++i) bg.flat()[i] += d.flat()[i] * av.flat()[i];
    }
  });
}

NodeId Graph::scale(NodeId a, double s) {
  num::Matrix v = nodes_[a].value;
  for (double& x : v.flat()) x *= s;
  return emplace(std::move(v), {a}, [a, s](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    if (!g.nodes_[a].needs_grad) return;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.size(); ++i) ag.flat()[i] += d.flat()[i] * s;
  });
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  num::Matrix v = num::matmul(nodes_[a].value, nodes_[b].value);
  return emplace(std::move(v), {a, b}, [a, b](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    if (g.nodes_[a].needs_grad) {
      num::Matrix& ag = g.grad_ref(a);
      if (ag.empty()) ag = num::Matrix(g.nodes_[a].value.rows(), g.nodes_[a].value.cols());
      num::Matrix da = num::matmul_nt(d, g.nodes_[b].value);  // d * b^T
      acc_into(ag, da);
    }
    if (g.nodes_[b].needs_grad) {
      num::Matrix& bg = g.grad_ref(b);
      if (bg.empty()) bg = num::Matrix(g.nodes_[b].value.rows(), g.nodes_[b].value.cols());
      num::matmul_tn_acc(g.nodes_[a].value, d, bg);  // a^T * d
    }
  });
}

NodeId Graph::matmul_nt(NodeId a, NodeId b) {
  num::Matrix v = num::matmul_nt(nodes_[a].value, nodes_[b].value);
  return emplace(std::move(v), {a, b}, [a, b](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    if (g.nodes_[a].needs_grad) {
      num::Matrix& ag = g.grad_ref(a);
      if (ag.empty()) ag = num::Matrix(g.nodes_[a].value.rows(), g.nodes_[a].value.cols());
      num::matmul_acc(d, g.nodes_[b].value, ag);  // d * b
    }
    if (g.nodes_[b].needs_grad) {
      num::Matrix& bg = g.grad_ref(b);
      if (bg.empty()) bg = num::Matrix(g.nodes_[b].value.rows(), g.nodes_[b].value.cols());
      num::matmul_tn_acc(d, g.nodes_[a].value, bg);  // d^T * a
    }
  });
}

NodeId Graph::tanh(NodeId a) {
  num::Matrix v = nodes_[a].value;
  for (double& x : v.flat()) x = std::tanh(x);
  num::Matrix saved = v;
  return emplace(std::move(v), {a}, [a, saved](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = saved.flat()[i];
      ag.flat()[i] += d.flat()[i] * (1.0 - y * y);
    }
  });
}

NodeId Graph::sigmoid(NodeId a) {
  num::Matrix v = nodes_[a].value;
  for (double& x : v.flat()) x = 1.0 / (1.0 + std::exp(-x));
  num::Matrix saved = v;
  return emplace(std::move(v), {a}, [a, saved](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double y = saved.flat()[i];
      ag.flat()[i] += d.flat()[i] * y * (1.0 - y);
    }
  });
}

NodeId Graph::relu(NodeId a) {
  num::Matrix v = nodes_[a].value;
  for (double& x : v.flat()) x = x > 0.0 ? x : 0.0;
  num::Matrix in = nodes_[a].value;
  return emplace(std::move(v), {a}, [a, in](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.size(); ++i)
      if (in.flat()[i] > 0.0) ag.flat()[i] += d.flat()[i];
  });
}

NodeId Graph::gelu(NodeId a) {
  static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
  static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);
  num::Matrix v = nodes_[a].value;
  for (double& x : v.flat()) x = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  num::Matrix in = nodes_[a].value;
  return emplace(std::move(v), {a}, [a, in](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double x = in.flat()[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ag.flat()[i] += d.flat()[i] * (cdf + x * pdf);
    }
  });
}

NodeId Graph::softmax_rows(NodeId a) {
  num::Matrix v = nodes_[a].value;
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double m = v(r, 0);
    for (std::size_t c = 1; c < v.cols(); ++c) m = std::max(m, v(r, c));
    double s = 0.0;
    for (std::size_t c = 0; c < v.cols(); ++c) s += std::exp(v(r, c) - m);
    for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) = std::exp(v(r, c) - m) / s;
  }
  num::Matrix saved = v;
  return emplace(std::move(v), {a}, [a, saved](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
    for (std::size_t r = 0; r < d.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < d.cols(); ++c) dot += d(r, c) * saved(r, c);
      for (std::size_t c = 0; c < d.cols(); ++c)
        ag(r, c) += saved(r, c) * (d(r, c) - dot);
    }
  });
}

NodeId Graph::layer_norm_rows(NodeId a, NodeId gamma, NodeId beta, double eps) {
  const auto& av = nodes_[a].value;
  const auto& gv = nodes_[gamma].value;
  const auto& bv = nodes_[beta].value;
  require(gv.rows() == 1 && gv.cols() == av.cols(), "layer_norm: gamma must be 1 x cols");
  require(bv.rows() == 1 && bv.cols() == av.cols(), "layer_norm: beta must be 1 x cols");
  const std::size_t n = av.rows(), c = av.cols();
  num::Matrix xhat(n, c), v(n, c);
  std::vector<double> inv_std(n);
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += av(r, j);
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double dlt = av(r, j) - mean;
      var += dlt * dlt;
    }
    var /= static_cast<double>(c);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat(r, j) = (av(r, j) - mean) * inv_std[r];
      v(r, j) = xhat(r, j) * gv(0, j) + bv(0, j);
    }
  }
  return emplace(std::move(v), {a, gamma, beta},
                 [a, gamma, beta, xhat, inv_std](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    const auto& gv2 = g.nodes_[gamma].value;
    const std::size_t n = d.rows(), c = d.cols();
    if (g.nodes_[gamma].needs_grad) {
      num::Matrix& gg = g.grad_ref(gamma);
      if (gg.empty()) gg = num::Matrix(1, c);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < c; ++j) gg(0, j) += d(r, j) * xhat(r, j);
    }
    if (g.nodes_[beta].needs_grad) {
      num::Matrix& bg = g.grad_ref(beta);
      if (bg.empty()) bg = num::Matrix(1, c);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < c; ++j) bg(0, j) += d(r, j);
    }
    if (g.nodes_[a].needs_grad) {
      num::Matrix& ag = g.grad_ref(a);
      if (ag.empty()) ag = num::Matrix(n, c);
      for (std::size_t r = 0; r < n; ++r) {
        double mean_dy = 0.0, mean_dy_xhat = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
          const double dy = d(r, j) * gv2(0, j);
          mean_dy += dy;
          mean_dy_xhat += dy * xhat(r, j);
        }
        mean_dy /= static_cast<double>(c);
        mean_dy_xhat /= static_cast<double>(c);
        for (std::size_t j = 0; j < c; ++j) {
          const double dy = d(r, j) * gv2(0, j);
          ag(r, j) += (dy - mean_dy - xhat(r, j) * mean_dy_xhat) * inv_std[r];
        }
      }
    }
  });
}

NodeId Graph::dropout(NodeId a, double p, std::mt19937_64& rng, bool training) {
  if (!training || p <= 0.0) return a;
  require(p < 1.0, "dropout: p must be < 1");
  const double keep = 1.0 - p;
  std::bernoulli_distribution dist(keep);
  num::Matrix mask(nodes_[a].value.rows(), nodes_[a].value.cols());
  for (double& m : mask.flat()) m = dist(rng) ? 1.0 / keep : 0.0;
  num::Matrix v = nodes_[a].value;
  for (std::size_t i = 0; i < v.size(); ++i) v.flat()[i] *= mask.flat()[i];
  return emplace(std::move(v), {a}, [a, mask](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.size(); ++i) ag.flat()[i] += d.flat()[i] * mask.flat()[i];
  });
}

NodeId Graph::concat_rows(const std::vector<NodeId>& parts) {
  require(!parts.empty(), "concat_rows: no parts");
  const std::size_t c = nodes_[parts[0]].value.cols();
  std::size_t total = 0;
  for (NodeId p : parts) {
    require(nodes_[p].value.cols() == c, "concat_rows: column mismatch");
    total += nodes_[p].value.rows();
  }
  num::Matrix v(total, c);
  std::size_t r = 0;
  for (NodeId p : parts) {
    const auto& pv = nodes_[p].value;
    for (std::size_t i = 0; i < pv.rows(); ++i, ++r)
      std::copy(pv.row_ptr(i), pv.row_ptr(i) + c, v.row_ptr(r));
  }
  return emplace(std::move(v), parts, [parts](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    std::size_t r = 0;
    for (NodeId p : parts) {
      const std::size_t pr = g.nodes_[p].value.rows();
      if (g.nodes_[p].needs_grad) {
        num::Matrix& pg = g.grad_ref(p);
        if (pg.empty()) pg = num::Matrix(pr, d.cols());
        for (std::size_t i = 0; i < pr; ++i)
          for (std::size_t j = 0; j < d.cols(); ++j) pg(i, j) += d(r + i, j);
      }
      r += pr;
    }
  });
}

NodeId Graph::concat_cols(const std::vector<NodeId>& parts) {
  require(!parts.empty(), "concat_cols: no parts");
  const std::size_t r = nodes_[parts[0]].value.rows();
  std::size_t total = 0;
  for (NodeId p : parts) {
    require(nodes_[p].value.rows() == r, "concat_cols: row mismatch");
    total += nodes_[p].value.cols();
  }
  num::Matrix v(r, total);
  std::size_t off = 0;
  for (NodeId p : parts) {
    const auto& pv = nodes_[p].value;
    for (std::size_t i = 0; i < r; ++i)
      std::copy(pv.row_ptr(i), pv.row_ptr(i) + pv.cols(), v.row_ptr(i) + off);
    off += pv.cols();
  }
  return emplace(std::move(v), parts, [parts](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    std::size_t off = 0;
    for (NodeId p : parts) {
      const std::size_t pc = g.nodes_[p].value.cols();
      if (g.nodes_[p].needs_grad) {
        num::Matrix& pg = g.grad_ref(p);
        if (pg.empty()) pg = num::Matrix(d.rows(), pc);
        for (std::size_t i = 0; i < d.rows(); ++i)
          for (std::size_t j = 0; j < pc; ++j) pg(i, j) += d(i, off + j);
      }
      off += pc;
    }
  });
}

NodeId Graph::slice_rows(NodeId a, std::size_t r0, std::size_t r1) {
  const auto& av = nodes_[a].value;
  require(r0 < r1 && r1 <= av.rows(), "slice_rows: bad range");
  num::Matrix v(r1 - r0, av.cols());
  for (std::size_t i = r0; i < r1; ++i)
    std::copy(av.row_ptr(i), av.row_ptr(i) + av.cols(), v.row_ptr(i - r0));
  return emplace(std::move(v), {a}, [a, r0](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(g.nodes_[a].value.rows(), g.nodes_[a].value.cols());
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j) ag(r0 + i, j) += d(i, j);
  });
}

NodeId Graph::reverse_rows(NodeId a) {
  const auto& av = nodes_[a].value;
  num::Matrix v(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    std::copy(av.row_ptr(i), av.row_ptr(i) + av.cols(), v.row_ptr(av.rows() - 1 - i));
  return emplace(std::move(v), {a}, [a](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(d.rows(), d.cols());
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j) ag(d.rows() - 1 - i, j) += d(i, j);
  });
}

NodeId Graph::slice_cols(NodeId a, std::size_t c0, std::size_t c1) {
  const auto& av = nodes_[a].value;
  require(c0 < c1 && c1 <= av.cols(), "slice_cols: bad range");
  num::Matrix v(av.rows(), c1 - c0);
  for (std::size_t i = 0; i < av.rows(); ++i)
    std::copy(av.row_ptr(i) + c0, av.row_ptr(i) + c1, v.row_ptr(i));
  return emplace(std::move(v), {a}, [a, c0](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(g.nodes_[a].value.rows(), g.nodes_[a].value.cols());
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j) ag(i, c0 + j) += d(i, j);
  });
}

NodeId Graph::gather_rows(NodeId table, const std::vector<int>& ids) {
  const auto& tv = nodes_[table].value;
  num::Matrix v(ids.size(), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < tv.rows(),
            "gather_rows: id out of range");
    std::copy(tv.row_ptr(ids[i]), tv.row_ptr(ids[i]) + tv.cols(), v.row_ptr(i));
  }
  return emplace(std::move(v), {table}, [table, ids](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& tg = g.grad_ref(table);
    if (tg.empty())
      tg = num::Matrix(g.nodes_[table].value.rows(), g.nodes_[table].value.cols());
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j) tg(ids[i], j) += d(i, j);
  });
}

NodeId Graph::unfold_rows(NodeId a, std::size_t k) {
  const auto& av = nodes_[a].value;
  require(k >= 1 && av.rows() >= k, "unfold_rows: need at least k rows");
  const std::size_t n = av.rows() - k + 1, c = av.cols();
  num::Matrix v(n, k * c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t w = 0; w < k; ++w)
      std::copy(av.row_ptr(i + w), av.row_ptr(i + w) + c, v.row_ptr(i) + w * c);
  return emplace(std::move(v), {a}, [a, k](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    const std::size_t c = g.nodes_[a].value.cols();
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(g.nodes_[a].value.rows(), c);
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t w = 0; w < k; ++w)
        for (std::size_t j = 0; j < c; ++j) ag(i + w, j) += d(i, w * c + j);
  });
}

NodeId Graph::sum_all(NodeId a) {
  double s = 0.0;
  for (double x : nodes_[a].value.flat()) s += x;
  num::Matrix v(1, 1);
  v(0, 0) = s;
  return emplace(std::move(v), {a}, [a](Graph& g, NodeId self) {
    const double d = g.nodes_[self].grad(0, 0);
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(g.nodes_[a].value.rows(), g.nodes_[a].value.cols());
    for (double& x : ag.flat()) x += d;
  });
}

NodeId Graph::mean_all(NodeId a) {
  const double inv = 1.0 / static_cast<double>(nodes_[a].value.size());
  return scale(sum_all(a), inv);
}

NodeId Graph::max_over_rows(NodeId a) {
  const auto& av = nodes_[a].value;
  require(av.rows() >= 1, "max_over_rows: empty");
  num::Matrix v(1, av.cols());
  std::vector<std::size_t> arg(av.cols(), 0);
  for (std::size_t j = 0; j < av.cols(); ++j) {
    double best = av(0, j);
    for (std::size_t i = 1; i < av.rows(); ++i)
      if (av(i, j) > best) {
        best = av(i, j);
        arg[j] = i;
      }
    v(0, j) = best;
  }
  return emplace(std::move(v), {a}, [a, arg](Graph& g, NodeId self) {
    const auto& d = g.nodes_[self].grad;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(g.nodes_[a].value.rows(), g.nodes_[a].value.cols());
    for (std::size_t j = 0; j < d.cols(); ++j) ag(arg[j], j) += d(0, j);
  });
}

NodeId Graph::squared_frobenius(NodeId a) {
  double s = 0.0;
  for (double x : nodes_[a].value.flat()) s += x * x;
  num::Matrix v(1, 1);
  v(0, 0) = s;
  return emplace(std::move(v), {a}, [a](Graph& g, NodeId self) {
    const double d = g.nodes_[self].grad(0, 0);
    const auto& av = g.nodes_[a].value;
    num::Matrix& ag = g.grad_ref(a);
    if (ag.empty()) ag = num::Matrix(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) ag.flat()[i] += 2.0 * av.flat()[i] * d;
  });
}

NodeId Graph::softmax_cross_entropy(NodeId logits, std::size_t target, double weight) {
  const auto& z = nodes_[logits].value;
  require(z.rows() == 1, "softmax_cross_entropy: logits must be a row vector");
  require(target < z.cols(), "softmax_cross_entropy: target out of range");
  double m = z(0, 0);
  for (std::size_t c = 1; c < z.cols(); ++c) m = std::max(m, z(0, c));
  double s = 0.0;
  for (std::size_t c = 0; c < z.cols(); ++c) s += std::exp(z(0, c) - m);
  const double lse = m + std::log(s);
  num::Matrix probs(1, z.cols());
  for (std::size_t c = 0; c < z.cols(); ++c) probs(0, c) = std::exp(z(0, c) - m) / s;
  num::Matrix v(1, 1);
  v(0, 0) = weight * (lse - z(0, target));
  return emplace(std::move(v), {logits}, [logits, target, weight, probs](Graph& g, NodeId self) {
    const double d = g.nodes_[self].grad(0, 0);
    num::Matrix& lg = g.grad_ref(logits);
    if (lg.empty()) lg = num::Matrix(1, probs.cols());
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      double p = probs(0, c);
      if (c == target) p -= 1.0;
      lg(0, c) += d * weight * p;
    }
  });
}

NodeId Graph::sigmoid_binary_cross_entropy(NodeId logits, const std::vector<double>& targets) {
  const auto& z = nodes_[logits].value;
  require(z.rows() == 1 && z.cols() == targets.size(),
          "sigmoid_bce: logits must be 1 x |targets|");
  const std::size_t k = targets.size();
  double loss = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double x = z(0, c), t = targets[c];
    loss += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  }
  loss /= static_cast<double>(k);
  num::Matrix v(1, 1);
  v(0, 0) = loss;
  return emplace(std::move(v), {logits}, [logits, targets](Graph& g, NodeId self) {
    const double d = g.nodes_[self].grad(0, 0);
    const auto& z2 = g.nodes_[logits].value;
    const std::size_t k = targets.size();
    num::Matrix& lg = g.grad_ref(logits);
    if (lg.empty()) lg = num::Matrix(1, k);
    for (std::size_t c = 0; c < k; ++c) {
      const double sig = 1.0 / (1.0 + std::exp(-z2(0, c)));
      lg(0, c) += d * (sig - targets[c]) / static_cast<double>(k);
    }
  });
}

NodeId Graph::crf_negative_log_likelihood(NodeId emissions, NodeId transitions,
                                          const std::vector<int>& tags) {
  const auto& z = nodes_[emissions].value;
  const auto& t = nodes_[transitions].value;
  num::Matrix dz, dt;
  const double nll = crf::nll_with_grads(z, t, tags, dz, dt);
  num::Matrix v(1, 1);
  v(0, 0) = nll;
  return emplace(std::move(v), {emissions, transitions},
                 [emissions, transitions, dz, dt](Graph& g, NodeId self) {
    const double d = g.nodes_[self].grad(0, 0);
    if (g.nodes_[emissions].needs_grad) {
      num::Matrix& eg = g.grad_ref(emissions);
      if (eg.empty()) eg = num::Matrix(dz.rows(), dz.cols());
      for (std::size_t i = 0; i < dz.size(); ++i) eg.flat()[i] += d * dz.flat()[i];
    }
    if (g.nodes_[transitions].needs_grad) {
      num::Matrix& tg = g.grad_ref(transitions);
      if (tg.empty()) tg = num::Matrix(dt.rows(), dt.cols());
      for (std::size_t i = 0; i < dt.size(); ++i) tg.flat()[i] += d * dt.flat()[i];
    }
  });
}

void Graph::backward(NodeId loss) {
  require(loss >= 0 && static_cast<std::size_t>(loss) < nodes_.size(), "backward: bad node");
  require(nodes_[loss].value.rows() == 1 && nodes_[loss].value.cols() == 1,
          "backward: loss must be scalar");
  if (!nodes_[loss].needs_grad) return;
  nodes_[loss].grad = num::Matrix(1, 1);
  nodes_[loss].grad(0, 0) = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.backprop) n.backprop(*this, id);
    if (n.bound && n.bound->trainable) acc_into(n.bound->grad, n.grad);
  }
}

}  // namespace ckg::ag
