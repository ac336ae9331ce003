#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ckg/ag/graph.hpp"

namespace ckg::nn {

// Owns a model's parameters keyed by name. Modules bind by name so that a
// store loaded from disk reconnects to the same layout.
class ParamStore {
 public:
  using Init = std::function<void(num::Matrix&)>;

  ag::Parameter& get_or_create(const std::string& name, std::size_t rows, std::size_t cols,
                               const Init& init);
  ag::Parameter* find(const std::string& name);
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  // Name-sorted; stable across runs.
  std::vector<ag::Parameter*> all();
  std::vector<ag::Parameter*> trainable();

  void zero_grads();
  std::size_t parameter_count() const;

  void save(const std::filesystem::path& file) const;
  void load(const std::filesystem::path& file);

 private:
  std::map<std::string, std::unique_ptr<ag::Parameter>> params_;
};

// Initializers.
ParamStore::Init zeros_init();
ParamStore::Init const_init(double v);
ParamStore::Init normal_init(std::mt19937_64& rng, double stddev);

// Raw tensor container used for every on-disk checkpoint.
void save_tensors(const std::filesystem::path& file,
                  const std::map<std::string, const num::Matrix*>& tensors);
std::map<std::string, num::Matrix> load_tensors(const std::filesystem::path& file);

}  // namespace ckg::nn
