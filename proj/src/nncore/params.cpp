#include "affect/nncore/params.hpp"

#include <cmath>

#include "affect/common.hpp"

namespace affect::nn {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::embedding: return "embedding";
    case LayerKind::linear: return "linear";
    case LayerKind::layer_norm: return "layer_norm";
    case LayerKind::multi_head_attention: return "multi_head_attention";
    case LayerKind::feed_forward_gelu: return "feed_forward_gelu";
    case LayerKind::softmax_head: return "softmax_head";
  }
  return "unknown";
}

LayerSpec LayerSpec::embedding(std::string name, int vocab, int dim) {
  return {LayerKind::embedding, std::move(name), {vocab, dim}};
}
LayerSpec LayerSpec::linear(std::string name, int in, int out) {
  return {LayerKind::linear, std::move(name), {in, out}};
}
LayerSpec LayerSpec::layer_norm(std::string name, int dim) {
  return {LayerKind::layer_norm, std::move(name), {dim}};
}
LayerSpec LayerSpec::attention(std::string name, int model_dim, int heads) {
  return {LayerKind::multi_head_attention, std::move(name), {model_dim, heads}};
}
LayerSpec LayerSpec::feed_forward(std::string name, int model_dim, int ff_dim) {
  return {LayerKind::feed_forward_gelu, std::move(name), {model_dim, ff_dim}};
}
LayerSpec LayerSpec::softmax_head(std::string name, int in, int classes) {
  return {LayerKind::softmax_head, std::move(name), {in, classes}};
}

void validate(const LayerSpec& spec) {
  const std::string where = std::string(to_string(spec.kind)) + " '" + spec.name + "'";
  const std::size_t expected = spec.kind == LayerKind::layer_norm ? 1 : 2;
  if (spec.dims.size() != expected) {
    throw ConfigError(where + ": expected " + std::to_string(expected) + " dims, got " +
                      std::to_string(spec.dims.size()));
  }
  for (int d : spec.dims) {
    if (d <= 0) {
      throw ConfigError(where + ": dims must be positive");
    }
  }
  if (spec.kind == LayerKind::multi_head_attention && spec.dims[0] % spec.dims[1] != 0) {
    throw ConfigError(where + ": model_dim not divisible by heads (" + std::to_string(spec.dims[0]) +
                      " % " + std::to_string(spec.dims[1]) + ")");
  }
}

std::size_t ParameterStore::add(std::string name, std::vector<int> shape) {
  if (by_name_.count(name) != 0) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
  std::size_t n = 1;
  for (int d : shape) {
    n *= static_cast<std::size_t>(d);
  }
  by_name_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(shape), std::vector<double>(n, 0.0),
                      std::vector<double>(n, 0.0)});
  return entries_.size() - 1;
}

std::size_t ParameterStore::index(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) {
    throw ArgumentError("no parameter named '" + std::string(name) + "'");
  }
  return it->second;
}

bool ParameterStore::contains(std::string_view name) const {
  return by_name_.count(std::string(name)) != 0;
}

std::size_t ParameterStore::total_values() const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    n += e.values.size();
  }
  return n;
}

void ParameterStore::zero_grads() {
  for (auto& e : entries_) {
    std::fill(e.grads.begin(), e.grads.end(), 0.0);
  }
}

double ParameterStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& e : entries_) {
    for (double g : e.grads) {
      sq += g * g;
    }
  }
  return std::sqrt(sq);
}

double ParameterStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& e : entries_) {
      for (double& g : e.grads) {
        g *= scale;
      }
    }
  }
  return norm;
}

std::vector<double> ParameterStore::flat_values() const {
  std::vector<double> out;
  out.reserve(total_values());
  for (const auto& e : entries_) {
    out.insert(out.end(), e.values.begin(), e.values.end());
  }
  return out;
}

void ParameterStore::set_flat_values(std::span<const double> flat) {
  if (flat.size() != total_values()) {
    throw ArgumentError("set_flat_values: expected " + std::to_string(total_values()) +
                        " values, got " + std::to_string(flat.size()));
  }
  std::size_t off = 0;
  for (auto& e : entries_) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + e.values.size()), e.values.begin());
    off += e.values.size();
  }
}

bool ParameterStore::operator==(const ParameterStore& other) const {
  if (seed_ != other.seed_ || step_count_ != other.step_count_ || specs_ != other.specs_ ||
      entries_.size() != other.entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.shape != b.shape || a.values != b.values) {
      return false;
    }
  }
  return true;
}

namespace {

void glorot(ParamEntry& e, int fan_in, int fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : e.values) {
    v = rng.uniform(-a, a);
  }
}

void fill(ParamEntry& e, double value) { std::fill(e.values.begin(), e.values.end(), value); }

}  // namespace

ParameterStore init_params(std::span<const LayerSpec> specs, std::uint64_t seed) {
  if (specs.empty()) {
    throw ConfigError("init_params: no layer specs");
  }
  ParameterStore store;
  store.seed_ = seed;
  Rng rng(seed);
  for (const auto& spec : specs) {
    validate(spec);
    const std::string& p = spec.name;
    const auto& d = spec.dims;
    switch (spec.kind) {
      case LayerKind::embedding: {
        auto w = store.add(p + ".weight", {d[0], d[1]});
        glorot(store.entry(w), d[0], d[1], rng);
        break;
      }
      case LayerKind::linear: {
        auto w = store.add(p + ".weight", {d[0], d[1]});
        store.add(p + ".bias", {d[1]});
        glorot(store.entry(w), d[0], d[1], rng);
        break;
      }
      case LayerKind::softmax_head: {
        store.add(p + ".weight", {d[0], d[1]});
        store.add(p + ".bias", {d[1]});
        break;
      }
      case LayerKind::layer_norm: {
        auto g = store.add(p + ".gain", {d[0]});
        store.add(p + ".shift", {d[0]});
        fill(store.entry(g), 1.0);
        break;
      }
      case LayerKind::multi_head_attention: {
        // The key projection has no bias: softmax cancels it exactly.
        for (const char* proj : {"q", "k", "v", "o"}) {
          auto w = store.add(p + "." + proj + ".weight", {d[0], d[0]});
          if (std::string_view(proj) != "k") {
            store.add(p + "." + proj + ".bias", {d[0]});
          }
          glorot(store.entry(w), d[0], d[0], rng);
        }
        break;
      }
      case LayerKind::feed_forward_gelu: {
        auto w1 = store.add(p + ".in.weight", {d[0], d[1]});
        store.add(p + ".in.bias", {d[1]});
        glorot(store.entry(w1), d[0], d[1], rng);
        auto w2 = store.add(p + ".out.weight", {d[1], d[0]});
        store.add(p + ".out.bias", {d[0]});
        glorot(store.entry(w2), d[1], d[0], rng);
        break;
      }
    }
    store.specs_.push_back(spec);
  }
  return store;
}

}  // namespace affect::nn
