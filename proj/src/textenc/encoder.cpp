#include "affect/textenc/encoder.hpp"

#include <fstream>
#include <map>

#include "affect/common.hpp"
#include "affect/nncore/serialize.hpp"

namespace affect::text {

EncoderModel EncoderModel::create(Vocab vocab, const TransformerDims& dims, std::uint64_t seed,
                                  const std::vector<nn::LayerSpec>& head_specs) {
  dims.validate();
  std::vector<nn::LayerSpec> specs;
  specs.push_back(nn::LayerSpec::embedding(kEmbedName, vocab.size(), dims.model_dim));
  for (auto& s : encoder_specs(kStackName, dims)) {
    specs.push_back(std::move(s));
  }
  specs.insert(specs.end(), head_specs.begin(), head_specs.end());
  auto params = nn::init_params(specs, seed);
  return EncoderModel(std::move(vocab), std::move(params), dims);
}

EncoderModel::EncoderModel(Vocab vocab, nn::ParameterStore params, const TransformerDims& dims)
    : vocab_(std::move(vocab)),
      dims_(dims),
      params_(std::move(params)),
      stack_(params_, kEmbedName, kStackName, dims_) {
  if (params_.entry(params_.index(std::string(kEmbedName) + ".weight")).shape[0] != vocab_.size()) {
    throw ConfigError("encoder embedding rows do not match vocabulary size");
  }
}

void EncoderModel::check(const TokenSeq& seq) const {
  if (static_cast<int>(seq.ids.size()) != dims_.max_len || seq.true_length < 1 ||
      seq.true_length > dims_.max_len) {
    throw ArgumentError("token sequence does not match encoder max_len " +
                        std::to_string(dims_.max_len));
  }
}

nn::RowVector EncoderModel::pooled_forward(const TokenSeq& seq, EncoderStack::Cache* cache) const {
  check(seq);
  Matrix h = stack_.forward(params_, seq.real_ids(), cache);
  return h.row(0);
}

std::vector<double> EncoderModel::encode_pooled(const TokenSeq& seq) const {
  nn::RowVector v = pooled_forward(seq, nullptr);
  return {v.data(), v.data() + v.size()};
}

void EncoderModel::pooled_backward(const EncoderStack::Cache& cache, const nn::RowVector& dpooled) {
  Matrix dout = Matrix::Zero(static_cast<Eigen::Index>(cache.ids.size()), dims_.model_dim);
  dout.row(0) = dpooled;
  stack_.backward(params_, cache, dout);
}

void EncoderModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nn::save_store(dir / "params.bin", params_);
  vocab_.save(dir / "vocab.txt");
  save_dims(dir / "dims.cfg", dims_);
}

EncoderModel EncoderModel::load(const std::filesystem::path& dir) {
  return EncoderModel(Vocab::load(dir / "vocab.txt"), nn::load_store(dir / "params.bin"),
                      load_dims(dir / "dims.cfg"));
}

void save_dims(const std::filesystem::path& path, const TransformerDims& dims) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << "layers = " << dims.layers << '\n'
      << "model_dim = " << dims.model_dim << '\n'
      << "heads = " << dims.heads << '\n'
      << "ff_dim = " << dims.ff_dim << '\n'
      << "max_len = " << dims.max_len << '\n';
}

TransformerDims load_dims(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot read " + path.string());
  }
  std::map<std::string, int*> fields;
  TransformerDims dims;
  fields["layers"] = &dims.layers;
  fields["model_dim"] = &dims.model_dim;
  fields["heads"] = &dims.heads;
  fields["ff_dim"] = &dims.ff_dim;
  fields["max_len"] = &dims.max_len;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      continue;
    }
    auto key = trim(std::string_view(line).substr(0, eq));
    auto it = fields.find(key);
    if (it == fields.end()) {
      throw DataError(path.string() + ": unknown key '" + key + "'");
    }
    *it->second = std::stoi(trim(std::string_view(line).substr(eq + 1)));
  }
  dims.validate();
  return dims;
}

}  // namespace affect::text
