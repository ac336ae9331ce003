#include "ckg/nn/param_store.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace ckg::nn {

namespace {
constexpr char kMagic[5] = {'C', 'K', 'G', 'T', '\x01'};
}

ag::Parameter& ParamStore::get_or_create(const std::string& name, std::size_t rows,
                                         std::size_t cols, const Init& init) {
  auto it = params_.find(name);
  if (it != params_.end()) {
    auto& p = *it->second;
    if (p.value.rows() != rows || p.value.cols() != cols)
      throw std::runtime_error("parameter '" + name + "' has shape " + p.value.shape_str() +
                               ", expected (" + std::to_string(rows) + "x" +
                               std::to_string(cols) + ")");
    return p;
  }
  num::Matrix v(rows, cols);
  init(v);
  auto p = std::make_unique<ag::Parameter>(name, std::move(v));
  auto& ref = *p;
  params_.emplace(name, std::move(p));
  return ref;
}

ag::Parameter* ParamStore::find(const std::string& name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second.get();
}

std::vector<ag::Parameter*> ParamStore::all() {
  std::vector<ag::Parameter*> out;
  out.reserve(params_.size());
  for (auto& [_, p] : params_) out.push_back(p.get());
  return out;
}

std::vector<ag::Parameter*> ParamStore::trainable() {
  std::vector<ag::Parameter*> out;
  for (auto& [_, p] : params_)
    if (p->trainable) out.push_back(p.get());
  return out;
}

void ParamStore::zero_grads() {
  for (auto& [_, p] : params_) p->zero_grad();
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p->value.size();
  return n;
}

void ParamStore::save(const std::filesystem::path& file) const {
  std::map<std::string, const num::Matrix*> tensors;
  for (const auto& [name, p] : params_) tensors.emplace(name, &p->value);
  save_tensors(file, tensors);
}

void ParamStore::load(const std::filesystem::path& file) {
  for (auto& [name, m] : load_tensors(file)) {
    auto it = params_.find(name);
    if (it != params_.end()) {
      if (!it->second->value.same_shape(m))
        throw std::runtime_error("loaded tensor '" + name + "' has shape " + m.shape_str() +
                                 ", expected " + it->second->value.shape_str());
      it->second->value = std::move(m);
    } else {
      auto p = std::make_unique<ag::Parameter>(name, std::move(m));
      params_.emplace(name, std::move(p));
    }
  }
}

ParamStore::Init zeros_init() {
  return [](num::Matrix&) {};
}

ParamStore::Init const_init(double v) {
  return [v](num::Matrix& m) { m.fill(v); };
}

ParamStore::Init normal_init(std::mt19937_64& rng, double stddev) {
  return [&rng, stddev](num::Matrix& m) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& x : m.flat()) x = dist(rng);
  };
}

void save_tensors(const std::filesystem::path& file,
                  const std::map<std::string, const num::Matrix*>& tensors) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os.write(kMagic, sizeof(kMagic));
  const std::uint64_t count = tensors.size();
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& [name, m] : tensors) {
    const std::uint32_t len = static_cast<std::uint32_t>(name.size());
    os.write(reinterpret_cast<const char*>(&len), sizeof(len));
    os.write(name.data(), len);
    const std::uint64_t rows = m->rows(), cols = m->cols();
    os.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    os.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    os.write(reinterpret_cast<const char*>(m->data()),
             static_cast<std::streamsize>(m->size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("write failed: " + file.string());
}

std::map<std::string, num::Matrix> load_tensors(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + sizeof(kMagic), kMagic))
    throw std::runtime_error("bad tensor file header: " + file.string());
  std::uint64_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  std::map<std::string, num::Matrix> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string name(len, '\0');
    is.read(name.data(), len);
    std::uint64_t rows = 0, cols = 0;
    is.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    is.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    num::Matrix m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated tensor file: " + file.string());
    out.emplace(std::move(name), std::move(m));
  }
  return out;
}

}  // namespace ckg::nn
