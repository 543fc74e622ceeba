#include "affect/corpus/synth.hpp"

#include <cmath>
#include <sstream>

#include "affect/common.hpp"

namespace affect::corpus {

namespace {

using Family = std::vector<std::string>;

const std::vector<std::string> kFiller = {
    "the",     "article", "about",   "people",  "news",     "story",   "read",    "today",
    "this",    "that",    "was",     "it",      "of",      "and",     "in",      "to",
    "a",       "they",    "their",   "city",    "report",  "week",    "family",  "local",
    "many",    "some",    "after",   "before",  "said",    "think",   "really",  "just",
    "government", "world", "country", "money",  "time",    "years",   "home",    "children",
    "school",  "street",  "community", "online", "again",   "still",   "would",   "could"};

// A small pool keeps the word-level design identifiable from ~70 essays.
const std::vector<std::string> kTrack1Filler(kFiller.begin(), kFiller.begin() + 12);

const std::array<std::array<Family, 3>, kNumEmotions> kFamilies = {{
    // sadness
    {{{"tears", "grief", "mourning", "sorrow"},
      {"lonely", "heartbroken", "gloomy", "miserable"},
      {"cried", "weeping", "funeral", "lost"}}},
    // anger
    {{{"furious", "outraged", "rage", "livid"},
      {"unfair", "injustice", "corrupt", "disgraceful"},
      {"yelled", "blame", "fury", "infuriating"}}},
    // neutral
    {{{"factual", "overview", "summary", "statistics"},
      {"ordinary", "routine", "typical", "standard"},
      {"informative", "noted", "mentioned", "described"}}},
    // fear
    {{{"terrified", "scared", "frightened", "panic"},
      {"danger", "threat", "unsafe", "risk"},
      {"trembling", "nightmare", "dread", "alarming"}}},
    // surprise
    {{{"shocked", "unexpected", "astonished", "stunned"},
      {"sudden", "surprising", "unbelievable", "wow"},
      {"amazed", "startled", "unforeseen", "twist"}}},
    // disgust
    {{{"disgusting", "gross", "revolting", "vile"},
      {"repulsive", "nauseating", "filthy", "sickening"},
      {"appalling", "rotten", "foul", "repugnant"}}},
    // joy
    {{{"happy", "delighted", "wonderful", "cheerful"},
      {"celebrate", "smile", "laughter", "grateful"},
      {"hopeful", "uplifting", "joyful", "blessed"}}},
}};

const Family kSharedFamily = {"suffering", "victims"};
const Family kEmpathyFamily = {"compassion", "sympathy"};
const Family kDistressFamily = {"anxious", "worried"};

constexpr double kAgeMean = 46.5;
constexpr double kAgeSd = 16.74;
constexpr double kIncomeMean = 65000.0;
constexpr double kIncomeSd = 31754.0;

const std::string& pick(const std::vector<std::string>& v, Rng& rng) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

std::string join_essay(std::vector<std::string> words, Rng& rng) {
  rng.shuffle(words);
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  if (!out.empty()) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    out += '.';
  }
  return out;
}

std::string track2_essay(std::size_t label, Rng& rng) {
  const auto& fams = kFamilies[label];
  std::vector<std::string> words;
  const int n_fams = 1 + static_cast<int>(rng.below(2));
  const auto first = static_cast<std::size_t>(rng.below(3));
  const int n_keywords = 2 + static_cast<int>(rng.below(2));
  for (int k = 0; k < n_keywords; ++k) {
    const auto fam = (first + static_cast<std::size_t>(k % n_fams)) % 3;
    words.push_back(pick(fams[fam], rng));
  }
  if (rng.uniform() < 0.3) {
    auto other = static_cast<std::size_t>(rng.below(kNumEmotions - 1));
    if (other >= label) ++other;
    words.push_back(pick(kFamilies[other][static_cast<std::size_t>(rng.below(3))], rng));
  }
  const int n_filler = 8 + static_cast<int>(rng.below(7));
  for (int k = 0; k < n_filler; ++k) words.push_back(pick(kFiller, rng));
  return join_essay(std::move(words), rng);
}

std::string truth_description() {
  const auto& t = track1_truth();
  std::ostringstream os;
  os << "empathy = " << format_shortest(t.intercept) << " + " << format_shortest(t.shared)
     << "*shared + " << format_shortest(t.specific) << "*empathy_words + "
     << format_shortest(t.demographic) << "*z(age) + " << format_shortest(t.categorical)
     << "*[gender=female]; distress = " << format_shortest(t.intercept) << " + "
     << format_shortest(t.shared) << "*shared + " << format_shortest(t.specific)
     << "*distress_words + " << format_shortest(t.demographic) << "*z(income) + "
     << format_shortest(t.categorical) << "*[education=high_school]; noise sd "
     << format_shortest(t.noise_sd) << "; clipped to [1,7]";
  return os.str();
}

Dataset track1_corpus(int n, std::uint64_t seed) {
  const auto& t = track1_truth();
  Rng rng(seed);
  Dataset d;
  d.provenance = "synthetic(track1,n=" + std::to_string(n) + ",seed=" + std::to_string(seed) +
                 "): " + truth_description();
  static const std::vector<std::string> genders = {"female", "male", "female", "male", "other"};
  static const std::vector<std::string> ethnicities = {"asian", "black", "hispanic", "white", "other"};
  static const std::vector<std::string> educations = {"high_school", "some_college", "bachelor",
                                                      "graduate"};
  static const std::vector<std::string> traits = {"agreeableness", "conscientiousness",
                                                  "extraversion", "openness", "stability"};
  for (int i = 0; i < n; ++i) {
    EssayRecord r;
    r.id = "t1-" + std::to_string(i);
    const int s = static_cast<int>(rng.below(4));
    const int a = static_cast<int>(rng.below(4));
    const int b = static_cast<int>(rng.below(4));
    std::vector<std::string> words;
    for (int k = 0; k < s; ++k) words.push_back(pick(kSharedFamily, rng));
    for (int k = 0; k < a; ++k) words.push_back(pick(kEmpathyFamily, rng));
    for (int k = 0; k < b; ++k) words.push_back(pick(kDistressFamily, rng));
    while (static_cast<int>(words.size()) < t.essay_words) words.push_back(pick(kTrack1Filler, rng));
    r.essay = join_essay(std::move(words), rng);

    r.age = static_cast<double>(18 + rng.below(58));
    r.income = 1000.0 * static_cast<double>(10 + rng.below(111));
    r.gender = pick(genders, rng);
    r.ethnicity = pick(ethnicities, rng);
    r.education = pick(educations, rng);
    for (const auto& trait : traits) r.personality[trait] = std::round(rng.uniform(1.0, 7.0) * 100.0) / 100.0;

    const double emp = t.intercept + t.shared * s + t.specific * a +
                       t.demographic * (*r.age - kAgeMean) / kAgeSd +
                       (*r.gender == "female" ? t.categorical : 0.0) + t.noise_sd * rng.normal();
    const double dis = t.intercept + t.shared * s + t.specific * b +
                       t.demographic * (*r.income - kIncomeMean) / kIncomeSd +
                       (*r.education == "high_school" ? t.categorical : 0.0) +
                       t.noise_sd * rng.normal();
    // Four decimals, like averaged survey scores; keeps TSV cells short.
    r.empathy = std::round(ScoreRange{}.clamp(emp) * 1e4) / 1e4;
    r.distress = std::round(ScoreRange{}.clamp(dis) * 1e4) / 1e4;
    d.records.push_back(std::move(r));
  }
  return d;
}

}  // namespace

const Track1Truth& track1_truth() {
  static const Track1Truth t;
  return t;
}

const std::array<std::array<std::vector<std::string>, 3>, kNumEmotions>& emotion_keyword_families() {
  return kFamilies;
}

SynthTask parse_synth_task(std::string_view s) {
  if (s == "track1") return SynthTask::track1;
  if (s == "track2") return SynthTask::track2;
  throw ConfigError("unknown task '" + std::string(s) + "' (expected track1 or track2)");
}

Dataset synthesize_track2(const std::array<int, kNumEmotions>& counts, std::uint64_t seed) {
  std::vector<std::size_t> labels;
  for (std::size_t l = 0; l < kNumEmotions; ++l) {
    if (counts[l] < 0) throw ArgumentError("negative label count");
    labels.insert(labels.end(), static_cast<std::size_t>(counts[l]), l);
  }
  Rng rng(seed);
  rng.shuffle(labels);
  Dataset d;
  d.provenance = "synthetic(track2,n=" + std::to_string(labels.size()) + ",seed=" +
                 std::to_string(seed) + ")";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    EssayRecord r;
    r.id = "t2-" + std::to_string(i);
    r.essay = track2_essay(labels[i], rng);
    r.emotion = std::string(kEmotionLabels[labels[i]]);
    d.records.push_back(std::move(r));
  }
  return d;
}

Dataset synthesize_corpus(int n, std::uint64_t seed, SynthTask task) {
  if (task == SynthTask::track2) {
    if (n < static_cast<int>(kNumEmotions)) {
      throw ArgumentError("track2 corpus needs n >= 7 (one essay per label), got " + std::to_string(n));
    }
    std::array<int, kNumEmotions> counts{};
    for (std::size_t l = 0; l < kNumEmotions; ++l) {
      counts[l] = n / static_cast<int>(kNumEmotions) + (static_cast<int>(l) < n % 7 ? 1 : 0);
    }
    return synthesize_track2(counts, seed);
  }
  if (n < 2) throw ArgumentError("track1 corpus needs n >= 2, got " + std::to_string(n));
  return track1_corpus(n, seed);
}

TransferBenchmark synthesize_transfer(int aux_n, int main_n, int heldout_n, std::uint64_t seed) {
  auto part = [&](int n, std::uint64_t stream, const std::string& prefix) {
    Dataset d = n == 0 ? Dataset{} : synthesize_corpus(n, derive_seed(seed, stream), SynthTask::track2);
    for (auto& r : d.records) r.id = prefix + "-" + r.id.substr(3);
    d.provenance = "synthetic(" + prefix + ",n=" + std::to_string(n) + ",seed=" + std::to_string(seed) + ")";
    return d;
  };
  if (aux_n != 0 && aux_n < static_cast<int>(kNumEmotions)) throw ArgumentError("aux corpus needs 0 or >= 7 records");
  return {part(aux_n, 1, "aux"), part(main_n, 2, "main"), part(heldout_n, 3, "heldout")};
}

}  // namespace affect::corpus
