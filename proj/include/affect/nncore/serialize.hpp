#pragma once

#include <filesystem>
#include <iosfwd>

#include "affect/nncore/params.hpp"

namespace affect::nn {

/// Binary parameter container, all integers and floats little-endian:
///
///   "AFPS"                 4-byte magic
///   u32 version            currently 1
///   u64 seed
///   u64 step_count
///   u32 spec_count
///   spec_count x { u8 kind, u32 name_len, name bytes, u32 dim_count, i32 dims[] }
///   u64 value_count        must equal the total size implied by the specs
///   f64 values[]           entry order, row-major within each entry
///
/// Loading rebuilds the entries from (specs, seed) and overwrites the values,
/// so a round trip is exact.
void write_store(std::ostream& out, const ParameterStore& store);
ParameterStore read_store(std::istream& in);

void save_store(const std::filesystem::path& path, const ParameterStore& store);
ParameterStore load_store(const std::filesystem::path& path);

}  // namespace affect::nn
