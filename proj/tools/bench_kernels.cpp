// Compares the OpenMP kernels against their serial references: dense
// matmul at model-relevant shapes and batched Viterbi decoding.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include <omp.h>

#include "ckg/num/kernels.hpp"
#include "ckg/phrasecrf/model.hpp"

using ckg::num::Matrix;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(r, c);
  for (double& x : m.flat()) x = dist(rng);
  return m;
}

template <typename F>
double time_ms(F&& fn, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(end - start).count() / repeats;
}

}  // namespace

int main() {
  std::mt19937_64 rng(42);
  std::printf("threads: %d\n\n", omp_get_max_threads());

  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");
  const std::vector<std::array<std::size_t, 3>> shapes = {
      {64, 768, 768}, {128, 768, 3072}, {512, 512, 512}, {100, 400, 800}};
  for (const auto& [n, k, m] : shapes) {
    Matrix a = random_matrix(n, k, rng), b = random_matrix(k, m, rng), c;
    const int repeats = 5;
    const double serial = time_ms([&] { ckg::num::matmul_serial(a, b, c); }, repeats);
    Matrix c_ref = c;
    const double parallel = time_ms([&] { ckg::num::matmul_parallel(a, b, c); }, repeats);
    const bool same = c == c_ref;
    char label[32];
    std::snprintf(label, sizeof label, "matmul %zux%zux%zu%s", n, k, m, same ? "" : " !!");
    std::printf("%-28s %12.2f %12.2f %8.2fx\n", label, serial, parallel, serial / parallel);
  }

  // Batched Viterbi over a synthetic corpus of sentences.
  const std::size_t sentences = 2000;
  std::vector<Matrix> emissions;
  emissions.reserve(sentences);
  std::uniform_int_distribution<std::size_t> len(5, 60);
  for (std::size_t i = 0; i < sentences; ++i)
    emissions.push_back(random_matrix(len(rng), ckg::phrasecrf::kTagCount, rng));
  ckg::phrasecrf::CrfParams params;
  params.transitions = random_matrix(ckg::phrasecrf::kTagCount + 2,
                                     ckg::phrasecrf::kTagCount + 2, rng);

  std::vector<ckg::phrasecrf::TagSequence> serial_tags, parallel_tags;
  const double serial =
      time_ms([&] { serial_tags = viterbi_decode_batch_serial(emissions, params); }, 3);
  const double parallel =
      time_ms([&] { parallel_tags = viterbi_decode_batch(emissions, params); }, 3);
  char label[32];
  std::snprintf(label, sizeof label, "viterbi batch (%zu)%s", sentences,
                serial_tags == parallel_tags ? "" : " !!");
  std::printf("%-28s %12.2f %12.2f %8.2fx\n", label, serial, parallel, serial / parallel);
  return 0;
}
