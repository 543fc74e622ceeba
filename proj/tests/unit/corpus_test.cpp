#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "affect/common.hpp"
#include "affect/corpus/scaler.hpp"
#include "affect/corpus/split.hpp"
#include "affect/corpus/synth.hpp"
#include "affect/corpus/tsv.hpp"
#include "affect/labels.hpp"

namespace affect::corpus {
namespace {

const std::filesystem::path kFixtures = AFFECT_FIXTURE_DIR;

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

std::map<std::string, int> label_counts(const Dataset& d) {
  std::map<std::string, int> counts;
  for (const auto& r : d.records) {
    if (r.emotion) ++counts[*r.emotion];
  }
  return counts;
}

TEST(LoadTsv, DevFixtureHasTableCounts) {
  auto d = load_tsv(kFixtures / "dev270.tsv");
  EXPECT_EQ(d.size(), 270u);
  auto counts = label_counts(d);
  EXPECT_EQ(counts["sadness"], 96);
  EXPECT_EQ(counts["anger"], 76);
  EXPECT_EQ(counts["neutral"], 31);
  EXPECT_EQ(counts["fear"], 25);
  EXPECT_EQ(counts["surprise"], 14);
  EXPECT_EQ(counts["disgust"], 14);
  EXPECT_EQ(counts["joy"], 12);
}

TEST(LoadTsv, NormalizesLabelsAndUnescapes) {
  auto d = load_tsv(kFixtures / "wassa_like.tsv", Schema::load(AFFECT_CONFIG_DIR "/wassa2021.schema"));
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.records[0].emotion, "sadness");
  EXPECT_EQ(d.records[2].emotion, "anger");
  EXPECT_EQ(d.records[0].id, "R_1");
  EXPECT_NE(d.records[0].essay.find("flood.\nSo"), std::string::npos);
  EXPECT_NE(d.records[2].essay.find("was\tpreventable"), std::string::npos);
  EXPECT_EQ(d.records[0].ethnicity, "1");
  EXPECT_EQ(d.records[0].personality.at("openness"), 5.5);
  EXPECT_EQ(d.records[1].income, std::nullopt);
  EXPECT_EQ(d.records[1].age, 27.0);
}

TEST(LoadTsv, BadNumbersAreReportedTogether) {
  auto p = temp_file("affect_bad.tsv",
                     "essay\tempathy\tdistress\n"
                     "fine text\t3\t4\n"
                     "bad one\tabc\t4\n"
                     "bad two\t2\t4x\n");
  try {
    load_tsv(p);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    ASSERT_EQ(e.details().size(), 2u);
    EXPECT_NE(e.details()[0].find("line 3"), std::string::npos);
    EXPECT_NE(e.details()[0].find("'empathy'"), std::string::npos);
    EXPECT_NE(e.details()[1].find("line 4"), std::string::npos);
    EXPECT_NE(e.details()[1].find("'distress'"), std::string::npos);
  }
  std::filesystem::remove(p);
}

TEST(LoadTsv, UnknownLabelAndEmptyEssayFail) {
  auto p = temp_file("affect_bad2.tsv", "essay\temotion\nsome text\thappiness\n \tjoy\n");
  try {
    load_tsv(p);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.details().size(), 2u);
  }
  std::filesystem::remove(p);
}

TEST(LoadTsv, MissingMappedColumnIsSchemaError) {
  auto p = temp_file("affect_schema.tsv", "text\tscore\nhello\t3\n");
  EXPECT_THROW(load_tsv(p), SchemaError);
  auto s = temp_file("affect_schema.cfg", "essay = text\nempathy = empathy_score\n");
  EXPECT_THROW(load_tsv(p, Schema::load(s)), SchemaError);
  auto s2 = temp_file("affect_schema2.cfg", "essay = text\nempathy = score\n");
  auto d = load_tsv(p, Schema::load(s2));
  EXPECT_EQ(d.records[0].empathy, 3.0);
  auto s3 = temp_file("affect_schema3.cfg", "essay = text\nmood = score\n");
  EXPECT_THROW(Schema::load(s3), ConfigError);
  for (const auto& f : {p, s, s2, s3}) std::filesystem::remove(f);
}

TEST(LoadTsv, OutOfRangeScoresWarn) {
  auto p = temp_file("affect_range.tsv", "essay\tempathy\nhello\t9.5\n");
  auto d = load_tsv(p);
  EXPECT_EQ(d.records[0].empathy, 9.5);
  EXPECT_EQ(d.warnings.size(), 1u);
  std::filesystem::remove(p);
}

TEST(Tsv, EscapeRoundTrip) {
  for (std::string s : {"plain", "tab\there", "line\nbreak", "back\\slash", "cr\r", "\\t literal", ""}) {
    EXPECT_EQ(unescape_field(escape_field(s)), s);
    EXPECT_EQ(escape_field(s).find('\t'), std::string::npos);
  }
}

TEST(Tsv, WriteLoadRoundTrip) {
  auto out = std::filesystem::temp_directory_path() / "affect_rt.tsv";
  for (const auto& name : {"dev270.tsv", "track1_40.tsv"}) {
    auto d = load_tsv(kFixtures / name);
    write_tsv(out, d);
    EXPECT_EQ(load_tsv(out).records, d.records) << name;
  }
  auto synth = synthesize_corpus(30, 5, SynthTask::track1);
  synth.records[0].essay = "a\ttab\nand \\ backslash";
  write_tsv(out, synth);
  EXPECT_EQ(load_tsv(out).records, synth.records);
  std::filesystem::remove(out);
}

Dataset numbered(int n) {
  Dataset d;
  d.provenance = "test";
  for (int i = 0; i < n; ++i) {
    EssayRecord r;
    r.id = std::to_string(i);
    r.essay = "essay " + std::to_string(i);
    d.records.push_back(r);
  }
  return d;
}

TEST(Split, SizesFollowFloor) {
  auto s = split_dataset(numbered(1860), 0.8, 1);
  EXPECT_EQ(s.train.size(), 1488u);
  EXPECT_EQ(s.valid.size(), 372u);
  auto two = split_dataset(numbered(2), 0.5, 9);
  EXPECT_EQ(two.train.size(), 1u);
  EXPECT_EQ(two.valid.size(), 1u);
}

TEST(Split, DeterministicPartition) {
  auto d = numbered(101);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto a = split_dataset(d, 0.7, seed);
    auto b = split_dataset(d, 0.7, seed);
    EXPECT_EQ(a.train.records, b.train.records);
    EXPECT_EQ(a.valid.records, b.valid.records);
    std::set<std::string> ids;
    for (const auto& r : a.train.records) ids.insert(r.id);
    for (const auto& r : a.valid.records) EXPECT_TRUE(ids.insert(r.id).second);
    EXPECT_EQ(ids.size(), d.size());
  }
  EXPECT_NE(split_dataset(d, 0.7, 1).train.records, split_dataset(d, 0.7, 2).train.records);
}

TEST(Split, RejectsBadArguments) {
  EXPECT_THROW(split_dataset(numbered(10), 0.0, 1), ArgumentError);
  EXPECT_THROW(split_dataset(numbered(10), 1.0, 1), ArgumentError);
  EXPECT_THROW(split_dataset(numbered(10), -0.5, 1), ArgumentError);
  EXPECT_THROW(split_dataset(numbered(1), 0.5, 1), ArgumentError);
}

TEST(Scaler, ZScoreExamples) {
  auto d = numbered(2);
  d.records[0].age = 20.0;
  d.records[1].age = 40.0;
  auto s = fit_scaler(d, {{"age"}, {}});
  EXPECT_EQ(s.numeric()[0].mean, 30.0);
  EXPECT_EQ(s.numeric()[0].std, 10.0);
  EssayRecord r;
  r.age = 40.0;
  EXPECT_EQ(s.transform(r)[0], 1.0);
  r.age = 30.0;
  EXPECT_EQ(s.transform(r)[0], 0.0);
  r.age.reset();
  EXPECT_EQ(s.transform(r)[0], 0.0);
}

TEST(Scaler, OneHotWithUnseenSlot) {
  auto d = numbered(3);
  d.records[0].gender = "male";
  d.records[1].gender = "female";
  auto s = fit_scaler(d, {{}, {"gender"}});
  ASSERT_EQ(s.output_dim(), 3u);
  EXPECT_EQ(s.feature_names(), (std::vector<std::string>{"gender=female", "gender=male", "gender=<unseen>"}));
  EssayRecord r;
  r.gender = "male";
  EXPECT_EQ(s.transform(r), (std::vector<double>{0, 1, 0}));
  r.gender = "other";
  EXPECT_EQ(s.transform(r), (std::vector<double>{0, 0, 1}));
  r.gender.reset();
  EXPECT_EQ(s.transform(r), (std::vector<double>{0, 0, 0}));
}

TEST(Scaler, ZeroSpreadAndUnfitted) {
  auto d = numbered(3);
  for (auto& r : d.records) r.income = 5.0;
  auto s = fit_scaler(d, {{"income"}, {}});
  EXPECT_EQ(s.transform(d.records[0])[0], 0.0);
  FeatureScaler unfitted;
  EXPECT_THROW(unfitted.transform(d.records[0]), StateError);
  EXPECT_THROW(fit_scaler(d, {{"gender"}, {}}), ConfigError);
}

TEST(Scaler, TransformedTrainingColumnsAreStandardized) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = synthesize_corpus(5 + static_cast<int>(rng.below(60)), rng.next_u64(), SynthTask::track1);
    auto config = ScalerConfig::defaults_for(d);
    auto s = fit_scaler(d, config);
    EXPECT_EQ(s.output_dim(), s.feature_names().size());
    for (std::size_t c = 0; c < config.numeric.size(); ++c) {
      double sum = 0.0;
      double sq = 0.0;
      for (const auto& r : d.records) sum += s.transform(r)[c];
      const double mean = sum / static_cast<double>(d.size());
      for (const auto& r : d.records) sq += std::pow(s.transform(r)[c] - mean, 2);
      EXPECT_NEAR(mean, 0.0, 1e-9);
      if (s.numeric()[c].std > 0.0) {
        EXPECT_NEAR(std::sqrt(sq / static_cast<double>(d.size())), 1.0, 1e-9);
      }
    }
  }
}

TEST(Scaler, JsonRoundTrip) {
  auto d = load_tsv(kFixtures / "track1_40.tsv");
  auto s = fit_scaler(d, ScalerConfig::defaults_for(d));
  auto back = FeatureScaler::from_json(s.to_json());
  EXPECT_TRUE(back == s);
  EXPECT_EQ(back.transform(d.records[3]), s.transform(d.records[3]));
}

TEST(Synth, Track2IsBalancedAndDeterministic) {
  auto d = synthesize_corpus(700, 11, SynthTask::track2);
  ASSERT_EQ(d.size(), 700u);
  for (auto label : kEmotionLabels) EXPECT_EQ(label_counts(d)[std::string(label)], 100);
  EXPECT_EQ(d.records, synthesize_corpus(700, 11, SynthTask::track2).records);
  EXPECT_NE(d.records, synthesize_corpus(700, 12, SynthTask::track2).records);
  EXPECT_THROW(synthesize_corpus(6, 1, SynthTask::track2), ArgumentError);
  EXPECT_NO_THROW(validate_records(d));
}

TEST(Synth, Track2EssaysCarryOwnKeywords) {
  const auto& fams = emotion_keyword_families();
  auto d = synthesize_corpus(140, 3, SynthTask::track2);
  for (const auto& r : d.records) {
    const auto label = *emotion_index(*r.emotion);
    std::multiset<std::string> words;
    std::string word;
    for (char c : to_lower(r.essay) + " ") {
      if (c == ' ' || c == '.') {
        if (!word.empty()) words.insert(word);
        word.clear();
      } else {
        word += c;
      }
    }
    std::size_t own = 0;
    for (const auto& fam : fams[label]) {
      for (const auto& w : fam) own += words.count(w);
    }
    EXPECT_GE(own, 2u) << r.essay;
  }
}

TEST(Synth, Track1TargetsAreCorrelatedAndInRange) {
  auto d = synthesize_corpus(70, 11, SynthTask::track1);
  ASSERT_EQ(d.size(), 70u);
  std::vector<double> e;
  std::vector<double> s;
  for (const auto& r : d.records) {
    ASSERT_TRUE(r.empathy && r.distress);
    EXPECT_GE(*r.empathy, 1.0);
    EXPECT_LE(*r.empathy, 7.0);
    EXPECT_GE(*r.distress, 1.0);
    EXPECT_LE(*r.distress, 7.0);
    e.push_back(*r.empathy);
    s.push_back(*r.distress);
  }
  double me = 0;
  double ms = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    me += e[i] / 70.0;
    ms += s[i] / 70.0;
  }
  double num = 0;
  double de = 0;
  double ds = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    num += (e[i] - me) * (s[i] - ms);
    de += (e[i] - me) * (e[i] - me);
    ds += (s[i] - ms) * (s[i] - ms);
  }
  EXPECT_GT(num / std::sqrt(de * ds), 0.3);
  EXPECT_NE(d.provenance.find("0.7*shared"), std::string::npos);
  EXPECT_EQ(d.records, synthesize_corpus(70, 11, SynthTask::track1).records);
  EXPECT_THROW(synthesize_corpus(1, 1, SynthTask::track1), ArgumentError);
}

}  // namespace
}  // namespace affect::corpus
