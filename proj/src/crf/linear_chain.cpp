#include "ckg/crf/linear_chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ckg::crf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

void check_dims(const num::Matrix& emissions, const num::Matrix& transitions) {
  if (emissions.rows() == 0) throw std::invalid_argument("crf: empty emission matrix");
  const std::size_t labels = emissions.cols();
  if (transitions.rows() != labels + 2 || transitions.cols() != labels + 2)
    throw std::invalid_argument("crf: transition matrix must be (L+2)x(L+2), got " +
                                transitions.shape_str() + " for L=" + std::to_string(labels));
}

double sequence_score(const num::Matrix& emissions, const num::Matrix& transitions,
                      const std::vector<int>& tags) {
  check_dims(emissions, transitions);
  if (tags.size() != emissions.rows())
    throw std::invalid_argument("crf: tag sequence length does not match emission rows");
  const std::size_t labels = emissions.cols();
  for (int t : tags)
    if (t < 0 || static_cast<std::size_t>(t) >= labels)
      throw std::invalid_argument("crf: tag index out of range");

  double score = transitions(start_state(labels), tags[0]);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    score += emissions(i, tags[i]);
    if (i + 1 < tags.size()) score += transitions(tags[i], tags[i + 1]);
  }
  score += transitions(tags.back(), stop_state(labels));
  return score;
}

double log_partition(const num::Matrix& emissions, const num::Matrix& transitions) {
  check_dims(emissions, transitions);
  const std::size_t n = emissions.rows(), l = emissions.cols();
  std::vector<double> alpha(l), next(l), buf(l);
  for (std::size_t j = 0; j < l; ++j)
    alpha[j] = transitions(start_state(l), j) + emissions(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < l; ++j) {
      for (std::size_t i = 0; i < l; ++i) buf[i] = alpha[i] + transitions(i, j);
      next[j] = log_sum_exp(buf) + emissions(t, j);
    }
    alpha.swap(next);
  }
  for (std::size_t j = 0; j < l; ++j) buf[j] = alpha[j] + transitions(j, stop_state(l));
  return log_sum_exp(buf);
}

double log_partition_with_grads(const num::Matrix& emissions, const num::Matrix& transitions,
                                num::Matrix& d_emissions, num::Matrix& d_transitions) {
  check_dims(emissions, transitions);
  const std::size_t n = emissions.rows(), l = emissions.cols();

  // alpha[t][j]: log-sum over paths ending at t with label j (emissions included).
  num::Matrix alpha(n, l), beta(n, l);
  std::vector<double> buf(l);
  for (std::size_t j = 0; j < l; ++j)
    alpha(0, j) = transitions(start_state(l), j) + emissions(0, j);
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t j = 0; j < l; ++j) {
      for (std::size_t i = 0; i < l; ++i) buf[i] = alpha(t - 1, i) + transitions(i, j);
      alpha(t, j) = log_sum_exp(buf) + emissions(t, j);
    }

  // beta[t][i]: log-sum over path suffixes after position t given label i
  // (emissions of positions > t included, stop transition included).
  for (std::size_t i = 0; i < l; ++i) beta(n - 1, i) = transitions(i, stop_state(l));
  for (std::size_t t = n - 1; t-- > 0;)
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = 0; j < l; ++j)
        buf[j] = transitions(i, j) + emissions(t + 1, j) + beta(t + 1, j);
      beta(t, i) = log_sum_exp(buf);
    }

  for (std::size_t j = 0; j < l; ++j) buf[j] = alpha(n - 1, j) + transitions(j, stop_state(l));
  const double log_z = log_sum_exp(buf);

  d_emissions = num::Matrix(n, l);
  d_transitions = num::Matrix(l + 2, l + 2);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t j = 0; j < l; ++j)
      d_emissions(t, j) = std::exp(alpha(t, j) + beta(t, j) - log_z);

  for (std::size_t j = 0; j < l; ++j) {
    // start -> j marginal equals the unary marginal at t=0.
    d_transitions(start_state(l), j) = d_emissions(0, j);
    d_transitions(j, stop_state(l)) = d_emissions(n - 1, j);
  }
  for (std::size_t t = 0; t + 1 < n; ++t)
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j)
        d_transitions(i, j) += std::exp(alpha(t, i) + transitions(i, j) + emissions(t + 1, j) +
                                        beta(t + 1, j) - log_z);
  return log_z;
}

double log_prob(const num::Matrix& emissions, const num::Matrix& transitions,
                const std::vector<int>& tags) {
  return sequence_score(emissions, transitions, tags) - log_partition(emissions, transitions);
}

double nll_with_grads(const num::Matrix& emissions, const num::Matrix& transitions,
                      const std::vector<int>& tags, num::Matrix& d_emissions,
                      num::Matrix& d_transitions) {
  const double score = sequence_score(emissions, transitions, tags);
  const double log_z = log_partition_with_grads(emissions, transitions, d_emissions, d_transitions);
  const std::size_t n = emissions.rows(), l = emissions.cols();
  // d(-log P)/dZ = posterior - empirical counts.
  for (std::size_t t = 0; t < n; ++t) d_emissions(t, tags[t]) -= 1.0;
  d_transitions(start_state(l), tags[0]) -= 1.0;
  for (std::size_t t = 0; t + 1 < n; ++t) d_transitions(tags[t], tags[t + 1]) -= 1.0;
  d_transitions(tags[n - 1], stop_state(l)) -= 1.0;
  return log_z - score;
}

std::vector<int> viterbi(const num::Matrix& emissions, const num::Matrix& transitions) {
  check_dims(emissions, transitions);
  const std::size_t n = emissions.rows(), l = emissions.cols();
  num::Matrix score(n, l);
  std::vector<std::vector<int>> back(n, std::vector<int>(l, 0));

  for (std::size_t j = 0; j < l; ++j)
    score(0, j) = transitions(start_state(l), j) + emissions(0, j);
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t j = 0; j < l; ++j) {
      double best = kNegInf;
      int best_i = 0;
      for (std::size_t i = 0; i < l; ++i) {
        const double s = score(t - 1, i) + transitions(i, j);
        if (s > best) {  // strict: first (lowest index) maximum wins
          best = s;
          best_i = static_cast<int>(i);
        }
      }
      score(t, j) = best + emissions(t, j);
      back[t][j] = best_i;
    }

  double best = kNegInf;
  int last = 0;
  for (std::size_t j = 0; j < l; ++j) {
    const double s = score(n - 1, j) + transitions(j, stop_state(l));
    if (s > best) {
      best = s;
      last = static_cast<int>(j);
    }
  }

  std::vector<int> tags(n);
  tags[n - 1] = last;
  for (std::size_t t = n - 1; t-- > 0;) tags[t] = back[t + 1][tags[t + 1]];
  return tags;
}

}  // namespace ckg::crf
