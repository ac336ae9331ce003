#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace ckg::nn {

// Per-epoch training record, written as line-delimited JSON.
struct TrainLog {
  struct Epoch {
    int epoch = 0;
    double loss = 0.0;
  };
  std::vector<Epoch> epochs;
  std::size_t dropped_gold_spans = 0;  // phrase extractor only

  void save_jsonl(const std::filesystem::path& file) const {
    std::ofstream os(file);
    for (const Epoch& e : epochs)
      os << "{\"epoch\": " << e.epoch << ", \"loss\": " << e.loss << "}\n";
    if (dropped_gold_spans > 0)
      os << "{\"dropped_gold_spans\": " << dropped_gold_spans << "}\n";
  }
};

}  // namespace ckg::nn
