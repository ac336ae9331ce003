#pragma once

#include <vector>

#include "ckg/num/matrix.hpp"

namespace ckg::crf {

// Linear-chain CRF over L real labels plus two virtual states appended at
// indices L (start) and L+1 (stop). Transition matrices are (L+2)x(L+2);
// only rows/cols touching real labels, the start row and the stop column are
// ever read. Emissions are n x L.

inline std::size_t start_state(std::size_t num_labels) { return num_labels; }
inline std::size_t stop_state(std::size_t num_labels) { return num_labels + 1; }

// Sum of emission and transition scores along one path, including
// start->y_1 and y_n->stop.
double sequence_score(const num::Matrix& emissions, const num::Matrix& transitions,
                      const std::vector<int>& tags);

// log sum_y exp(score(y)) by the forward recursion in log space.
double log_partition(const num::Matrix& emissions, const num::Matrix& transitions);

// Same, also returning d logZ / d emissions (posterior unary marginals) and
// d logZ / d transitions (posterior pairwise marginals, start/stop included).
double log_partition_with_grads(const num::Matrix& emissions, const num::Matrix& transitions,
                                num::Matrix& d_emissions, num::Matrix& d_transitions);

// score(tags) - logZ
double log_prob(const num::Matrix& emissions, const num::Matrix& transitions,
                const std::vector<int>& tags);

// -log_prob plus gradients w.r.t. emissions and transitions (accumulated into
// the given matrices, which must be pre-sized or empty).
double nll_with_grads(const num::Matrix& emissions, const num::Matrix& transitions,
                      const std::vector<int>& tags, num::Matrix& d_emissions,
                      num::Matrix& d_transitions);

// argmax_y score(y); ties broken toward the lowest label index.
std::vector<int> viterbi(const num::Matrix& emissions, const num::Matrix& transitions);

void check_dims(const num::Matrix& emissions, const num::Matrix& transitions);

}  // namespace ckg::crf
