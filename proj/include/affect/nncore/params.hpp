#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace affect::nn {

enum class LayerKind : std::uint8_t {
  embedding = 0,
  linear = 1,
  layer_norm = 2,
  multi_head_attention = 3,
  feed_forward_gelu = 4,
  softmax_head = 5,
};

std::string_view to_string(LayerKind kind);

/// Declarative description of one layer's parameters.
///
/// dims by kind:
///   embedding            {vocab, dim}
///   linear               {in, out}
///   layer_norm           {dim}
///   multi_head_attention {model_dim, heads}
///   feed_forward_gelu    {model_dim, ff_dim}
///   softmax_head         {in, classes}
struct LayerSpec {
  LayerKind kind{};
  std::string name;
  std::vector<int> dims;

  static LayerSpec embedding(std::string name, int vocab, int dim);
  static LayerSpec linear(std::string name, int in, int out);
  static LayerSpec layer_norm(std::string name, int dim);
  static LayerSpec attention(std::string name, int model_dim, int heads);
  static LayerSpec feed_forward(std::string name, int model_dim, int ff_dim);
  static LayerSpec softmax_head(std::string name, int in, int classes);

  bool operator==(const LayerSpec&) const = default;
};

/// Throws ConfigError naming the spec when its dims are inconsistent.
void validate(const LayerSpec& spec);

struct ParamEntry {
  std::string name;
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grads;
};

/// Named, shaped trainable arrays with paired gradient slots. Entries keep
/// insertion order; their value buffers never move after creation.
class ParameterStore {
 public:
  ParameterStore() = default;

  std::size_t add(std::string name, std::vector<int> shape);

  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const;

  ParamEntry& entry(std::size_t i) { return entries_[i]; }
  const ParamEntry& entry(std::size_t i) const { return entries_[i]; }
  std::span<ParamEntry> entries() { return entries_; }
  std::span<const ParamEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t total_values() const;

  void zero_grads();
  double grad_norm() const;
  /// Rescales all gradients so their global L2 norm is at most max_norm.
  /// Returns the norm before clipping.
  double clip_grad_norm(double max_norm);

  std::vector<double> flat_values() const;
  void set_flat_values(std::span<const double> flat);

  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t step_count() const { return step_count_; }
  void increment_step() { ++step_count_; }
  void set_step_count(std::uint64_t n) { step_count_ = n; }

  bool operator==(const ParameterStore& other) const;

 private:
  friend ParameterStore init_params(std::span<const LayerSpec>, std::uint64_t);

  std::vector<ParamEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<LayerSpec> specs_;
  std::uint64_t seed_ = 0;
  std::uint64_t step_count_ = 0;
};

/// Builds a store from layer specs. Weight matrices are Glorot-uniform in
/// (-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases and layer-norm shifts
/// are zero, layer-norm gains one. softmax_head weights start at zero so the
/// initial predictive distribution is exactly uniform.
ParameterStore init_params(std::span<const LayerSpec> specs, std::uint64_t seed);

}  // namespace affect::nn
