#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "affect/common.hpp"
#include "affect/labels.hpp"
#include "affect/nncore/grad_check.hpp"
#include "affect/nncore/ops.hpp"
#include "affect/nncore/optim.hpp"
#include "affect/textenc/encoder.hpp"
#include "affect/textenc/seq2seq.hpp"
#include "affect/textenc/vocab.hpp"

namespace affect::text {
namespace {

TransformerDims tiny_dims() {
  TransformerDims d;
  d.layers = 2;
  d.model_dim = 8;
  d.heads = 2;
  d.ff_dim = 16;
  d.max_len = 16;
  return d;
}

void jitter(nn::ParameterStore& store, std::uint64_t seed, double scale) {
  Rng rng(seed);
  for (auto& e : store.entries()) {
    for (double& v : e.values) v += rng.uniform(-scale, scale);
  }
}

TEST(BuildVocab, OrdersByFrequencyThenToken) {
  std::vector<std::string> texts{"a b", "a c"};
  auto v = build_vocab(texts, 1, 100);
  EXPECT_EQ(v.id("a"), kFirstWordId);
  EXPECT_EQ(v.id("b"), kFirstWordId + 1);
  EXPECT_EQ(v.id("c"), kFirstWordId + 2);
  EXPECT_EQ(v.size(), kFirstWordId + 3);
  EXPECT_TRUE(v == build_vocab(texts, 1, 100));
}

TEST(BuildVocab, MinFreqAndMaxSize) {
  std::vector<std::string> texts{"a b", "a c"};
  auto v = build_vocab(texts, 2, 100);
  EXPECT_EQ(v.id("a"), kFirstWordId);
  EXPECT_EQ(v.id("b"), kUnkId);
  EXPECT_EQ(v.id("c"), kUnkId);

  auto capped = build_vocab(texts, 1, kFirstWordId + 1);
  EXPECT_EQ(capped.size(), kFirstWordId + 1);
  EXPECT_EQ(capped.id("b"), kUnkId);

  EXPECT_THROW(build_vocab(texts, 1, kFirstWordId - 1), ConfigError);
  EXPECT_THROW(build_vocab(std::vector<std::string>{}, 1, 100), ArgumentError);
}

TEST(BuildVocab, SpecialAndLabelBlockIsFixed) {
  Vocab v;
  EXPECT_EQ(v.id("<pad>"), kPadId);
  EXPECT_EQ(v.id("<unk>"), kUnkId);
  EXPECT_EQ(v.id("<cls>"), kClsId);
  EXPECT_EQ(v.id("<eos>"), kEosId);
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    EXPECT_EQ(v.id(kEmotionLabels[i]), kFirstLabelId + static_cast<int>(i));
    EXPECT_TRUE(Vocab::is_label_id(kFirstLabelId + static_cast<int>(i)));
  }
  EXPECT_FALSE(Vocab::is_label_id(kEosId));
  EXPECT_FALSE(Vocab::is_label_id(kFirstWordId));
  // A label word in text reuses the label id rather than getting a new one.
  auto w = build_vocab(std::vector<std::string>{"joy joy x"}, 1, 100);
  EXPECT_EQ(w.id("joy"), kFirstLabelId + 6);
  EXPECT_EQ(w.size(), kFirstWordId + 1);
}

TEST(SplitWords, LowercasesAndStripsPunctuation) {
  auto w = split_words("Hello, WORLD!  \"quoted\" don't ...");
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w[0], "hello");
  EXPECT_EQ(w[1], "world");
  EXPECT_EQ(w[2], "quoted");
  EXPECT_EQ(w[3], "don't");
}

TEST(SplitWords, UnicodeWhitespace) {
  auto w = split_words("one\xc2\xa0two\xe2\x80\x83three\xe3\x80\x80" "four\tfive\nsix");
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w[1], "two");
  EXPECT_EQ(w[3], "four");
}

TEST(Tokenize, OovAndPadding) {
  auto v = build_vocab(std::vector<std::string>{"hello"}, 1, 100);
  auto seq = tokenize("Hello WORLD", v, 6);
  ASSERT_EQ(seq.ids.size(), 6u);
  EXPECT_EQ(seq.ids[0], kClsId);
  EXPECT_EQ(seq.ids[1], v.id("hello"));
  EXPECT_EQ(seq.ids[2], kUnkId);
  EXPECT_EQ(seq.ids[3], kPadId);
  EXPECT_EQ(seq.true_length, 3);
  EXPECT_EQ(seq.attention_mask, (std::vector<bool>{true, true, true, false, false, false}));
}

TEST(Tokenize, TruncatesAndHandlesEmpty) {
  Vocab v;
  std::string essay;
  for (int i = 0; i < 1000; ++i) essay += "word ";
  auto seq = tokenize(essay, v, 128);
  EXPECT_EQ(seq.true_length, 128);
  EXPECT_EQ(seq.ids.size(), 128u);

  auto empty = tokenize("", v, 8);
  EXPECT_EQ(empty.true_length, 1);
  EXPECT_EQ(empty.ids[0], kClsId);
  for (std::size_t i = 1; i < empty.ids.size(); ++i) EXPECT_EQ(empty.ids[i], kPadId);
  EXPECT_THROW(tokenize("x", v, 1), ArgumentError);
}

TEST(VocabFile, RoundTrip) {
  auto v = build_vocab(std::vector<std::string>{"the cat sat on the mat", "a dog"}, 1, 100);
  auto path = std::filesystem::temp_directory_path() / "affect_vocab_test.txt";
  v.save(path);
  EXPECT_TRUE(Vocab::load(path) == v);
  std::filesystem::remove(path);
}

Vocab small_vocab() {
  return build_vocab(std::vector<std::string>{"the cat sat on the mat", "a dog ran far away"}, 1, 100);
}

TEST(EncoderModel, PooledShapeDeterminismAndPadding) {
  auto model = EncoderModel::create(small_vocab(), tiny_dims(), 3);
  auto seq = model.tokenize("the cat sat");
  auto a = model.encode_pooled(seq);
  EXPECT_EQ(a.size(), 8u);
  EXPECT_EQ(a, model.encode_pooled(seq));

  // Garbage in the pad region must not change anything.
  auto noisy = seq;
  for (std::size_t i = static_cast<std::size_t>(seq.true_length); i < noisy.ids.size(); ++i) {
    noisy.ids[i] = model.vocab().id("dog");
  }
  EXPECT_EQ(a, model.encode_pooled(noisy));

  auto other = model.encode_pooled(model.tokenize("a dog ran"));
  EXPECT_NE(a, other);

  TokenSeq wrong = tokenize("the cat", model.vocab(), 4);
  EXPECT_THROW(model.encode_pooled(wrong), ArgumentError);
}

TEST(EncoderModel, SaveLoadRoundTrip) {
  auto model = EncoderModel::create(small_vocab(), tiny_dims(), 3);
  auto dir = std::filesystem::temp_directory_path() / "affect_encoder_test";
  model.save(dir);
  auto loaded = EncoderModel::load(dir);
  auto seq = model.tokenize("the mat");
  EXPECT_EQ(model.encode_pooled(seq), loaded.encode_pooled(seq));
  EXPECT_TRUE(loaded.params() == model.params());
  std::filesystem::remove_all(dir);
}

TEST(ConstrainedArgmax, MasksNonLabelTokens) {
  Vocab v = build_vocab(std::vector<std::string>{"the"}, 1, 100);
  std::vector<double> logits(static_cast<std::size_t>(v.size()), 0.0);
  logits[static_cast<std::size_t>(v.id("the"))] = 10.0;
  logits[static_cast<std::size_t>(v.id("joy"))] = 3.0;
  logits[static_cast<std::size_t>(v.id("anger"))] = 2.5;
  logits[kEosId] = 5.0;
  // Brute force: scan the label ids and keep the max.
  int expected = -1;
  for (int id = 0; id < v.size(); ++id) {
    if (Vocab::is_label_id(id) && (expected < 0 || logits[id] > logits[expected])) expected = id;
  }
  EXPECT_EQ(expected, v.id("joy"));
  EXPECT_EQ(constrained_argmax(logits), v.id("joy"));

  std::vector<double> tie(static_cast<std::size_t>(v.size()), -1.0);
  tie[static_cast<std::size_t>(v.id("fear"))] = 4.0;
  tie[static_cast<std::size_t>(v.id("disgust"))] = 4.0;
  EXPECT_EQ(constrained_argmax(tie), v.id("fear"));
}

TEST(Seq2Seq, DistributionIsNormalized) {
  auto model = Seq2SeqModel::create(small_vocab(), tiny_dims(), 5);
  jitter(model.params(), 9, 0.3);
  auto seq = model.tokenize("the dog sat");
  const int start[1] = {kClsId};
  auto probs = nn::softmax(model.next_logits(seq, start));
  double label_mass = 0.0;
  double other_mass = 0.0;
  for (int id = 0; id < model.vocab().size(); ++id) {
    (Vocab::is_label_id(id) ? label_mass : other_mass) += probs[static_cast<std::size_t>(id)];
  }
  EXPECT_NEAR(label_mass + other_mass, 1.0, 1e-9);

  auto lp = model.logprob(seq, label_target("fear"));
  EXPECT_LE(lp.label, 0.0);
  EXPECT_LE(lp.eos, 0.0);
  EXPECT_GT(std::exp(lp.label), 0.0);
  EXPECT_NEAR(std::exp(lp.label), probs[static_cast<std::size_t>(model.vocab().id("fear"))], 1e-12);
}

TEST(Seq2Seq, UntrainedIsNearUniform) {
  auto model = Seq2SeqModel::create(small_vocab(), tiny_dims(), 5);
  auto seq = model.tokenize("the cat");
  const double uniform = 1.0 / model.vocab().size();
  for (auto label : kEmotionLabels) {
    const double p = std::exp(model.logprob(seq, label_target(label)).label);
    EXPECT_LT(p, 10.0 * uniform);
    EXPECT_GT(p, uniform / 10.0);
  }
}

TEST(Seq2Seq, RejectsNonLabelTarget) {
  auto model = Seq2SeqModel::create(small_vocab(), tiny_dims(), 5);
  auto seq = model.tokenize("the cat");
  EXPECT_THROW(model.logprob(seq, LabelTokenPair{kFirstWordId, kEosId}), ArgumentError);
  EXPECT_THROW(label_target("happiness"), DataError);
}

TEST(Seq2Seq, TeacherForcedLossMatchesNll) {
  auto model = Seq2SeqModel::create(small_vocab(), tiny_dims(), 5);
  jitter(model.params(), 2, 0.2);
  auto seq = model.tokenize("a dog ran far");
  auto target = label_target("surprise");
  auto lp = model.logprob(seq, target);
  const std::vector<double> parts{lp.label, lp.eos};
  const double loss = model.accumulate_nll(seq, target, 1.0);
  EXPECT_NEAR(loss, nn::nll_loss(parts), 1e-12);
  model.params().zero_grads();
}

TEST(Seq2Seq, DecodeAlwaysEmitsALabel) {
  auto model = Seq2SeqModel::create(small_vocab(), tiny_dims(), 5);
  jitter(model.params(), 4, 0.5);
  std::set<std::string> labels(kEmotionLabels.begin(), kEmotionLabels.end());
  for (const char* text : {"", "the cat", "zzz unknown words here", "a dog ran far away"}) {
    auto seq = model.tokenize(text);
    auto r = model.decode_constrained(seq);
    EXPECT_TRUE(labels.count(r.label)) << r.label;
    EXPECT_LE(r.log_prob, 0.0);
    auto again = model.decode_constrained(seq);
    EXPECT_EQ(r.label, again.label);
    EXPECT_EQ(r.log_prob, again.log_prob);
    EXPECT_NEAR(r.log_prob, model.logprob(seq, label_target(r.label)).total(), 1e-9);
  }
}

TEST(Seq2Seq, PaddingDoesNotChangeLogits) {
  auto model = Seq2SeqModel::create(small_vocab(), tiny_dims(), 5);
  jitter(model.params(), 4, 0.5);
  auto seq = model.tokenize("the cat sat");
  auto noisy = seq;
  for (std::size_t i = static_cast<std::size_t>(seq.true_length); i < noisy.ids.size(); ++i) {
    noisy.ids[i] = model.vocab().id("mat");
  }
  const int prefix[2] = {kClsId, kFirstLabelId};
  EXPECT_EQ(model.next_logits(seq, prefix), model.next_logits(noisy, prefix));
}

TEST(Seq2Seq, GradientCheckTwoExamples) {
  auto model = Seq2SeqModel::create(small_vocab(), tiny_dims(), 5);
  jitter(model.params(), 8, 0.3);
  std::vector<TokenSeq> seqs{model.tokenize("the cat sat on the mat"), model.tokenize("a dog ran")};
  std::vector<LabelTokenPair> targets{label_target("joy"), label_target("anger")};
  nn::LossFn fn = [&](nn::ParameterStore&, bool with_grad) {
    double total = 0.0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      if (with_grad) {
        total += model.accumulate_nll(seqs[i], targets[i], 1.0);
      } else {
        total -= model.logprob(seqs[i], targets[i]).total();
      }
    }
    return total;
  };
  auto r = nn::grad_check(fn, model.params(), 1e-5, 6);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param << "[" << r.worst_index << "] a=" << r.worst_analytic
                                   << " n=" << r.worst_numeric;
}

TEST(Seq2Seq, OverfitsSingleExample) {
  auto model = Seq2SeqModel::create(small_vocab(), tiny_dims(), 5);
  auto seq = model.tokenize("the cat sat on the mat");
  auto target = label_target("disgust");
  auto state = nn::AdamState::for_store(model.params(), 1e-2);
  for (int step = 0; step < 300; ++step) {
    model.accumulate_nll(seq, target, 1.0);
    model.params().clip_grad_norm(1.0);
    nn::adam_step(model.params(), state);
  }
  EXPECT_GT(model.logprob(seq, target).total(), std::log(0.99));
  EXPECT_EQ(model.decode_constrained(seq).label, "disgust");
}

}  // namespace
}  // namespace affect::text
