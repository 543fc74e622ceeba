#include "affect/nncore/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "affect/common.hpp"

namespace affect::nn {

namespace {

constexpr char kMagic[4] = {'A', 'F', 'P', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  std::uint8_t bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw DataError("parameter container truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_store(std::ostream& out, const ParameterStore& store) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, store.seed());
  put<std::uint64_t>(out, store.step_count());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.specs().size()));
  for (const auto& spec : store.specs()) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(spec.kind));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.name.size()));
    out.write(spec.name.data(), static_cast<std::streamsize>(spec.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.dims.size()));
    for (int d : spec.dims) {
      put<std::int32_t>(out, d);
    }
  }
  put<std::uint64_t>(out, store.total_values());
  for (const auto& e : store.entries()) {
    for (double v : e.values) {
      put<double>(out, v);
    }
  }
}

ParameterStore read_store(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a parameter container (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw DataError("unsupported parameter container version " + std::to_string(version));
  }
  const auto seed = get<std::uint64_t>(in);
  const auto steps = get<std::uint64_t>(in);
  const auto n_specs = get<std::uint32_t>(in);
  std::vector<LayerSpec> specs;
  for (std::uint32_t i = 0; i < n_specs; ++i) {
    LayerSpec spec;
    const auto kind = get<std::uint8_t>(in);
    if (kind > static_cast<std::uint8_t>(LayerKind::softmax_head)) {
      throw DataError("unknown layer kind " + std::to_string(kind));
    }
    spec.kind = static_cast<LayerKind>(kind);
    const auto name_len = get<std::uint32_t>(in);
    spec.name.resize(name_len);
    if (!in.read(spec.name.data(), name_len)) {
      throw DataError("parameter container truncated");
    }
    const auto n_dims = get<std::uint32_t>(in);
    for (std::uint32_t d = 0; d < n_dims; ++d) {
      spec.dims.push_back(get<std::int32_t>(in));
    }
    specs.push_back(std::move(spec));
  }
  ParameterStore store = init_params(specs, seed);
  const auto n_values = get<std::uint64_t>(in);
  if (n_values != store.total_values()) {
    throw DataError("parameter container holds " + std::to_string(n_values) +
                    " values, specs imply " + std::to_string(store.total_values()));
  }
  std::vector<double> flat(n_values);
  for (auto& v : flat) {
    v = get<double>(in);
  }
  store.set_flat_values(flat);
  store.set_step_count(steps);
  return store;
}

void save_store(const std::filesystem::path& path, const ParameterStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  write_store(out, store);
}

ParameterStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot read " + path.string());
  }
  return read_store(in);
}

}  // namespace affect::nn
