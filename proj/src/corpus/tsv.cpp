#include "affect/corpus/tsv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "affect/common.hpp"
#include "affect/labels.hpp"

namespace affect::corpus {

namespace {

const std::vector<std::string> kFixedColumns = {"id",     "essay",     "empathy",   "distress",
                                                "emotion", "age",      "gender",    "ethnicity",
                                                "income", "education"};

bool is_logical_column(const std::string& key) {
  for (const auto& c : kFixedColumns) {
    if (c == key) return true;
  }
  return key.starts_with("personality_") && key.size() > 12;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

Schema Schema::defaults() {
  Schema s;
  for (const auto& c : kFixedColumns) {
    s.columns[c] = c;
    s.required[c] = c == "essay";
  }
  s.auto_personality = true;
  return s;
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read schema file " + path.string());
  Schema s;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto key = trim(t.substr(0, eq));
    auto value = trim(t.substr(eq + 1));
    if (key == "score_min" || key == "score_max") {
      auto v = parse_real(value);
      if (!v) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number");
      (key == "score_min" ? s.score_range.lo : s.score_range.hi) = *v;
    } else if (is_logical_column(key)) {
      s.columns[key] = value;
      s.required[key] = true;
    } else {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!s.columns.count("essay")) throw ConfigError(path.string() + ": schema must map 'essay'");
  if (s.score_range.lo >= s.score_range.hi) {
    throw ConfigError(path.string() + ": score_min must be below score_max");
  }
  return s;
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    switch (s[++i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default:
        out += '\\';
        out += s[i];
    }
  }
  return out;
}

Dataset load_tsv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_tabs(line);

  // logical column -> cell index
  std::map<std::string, std::size_t> index;
  for (const auto& [logical, name] : schema.columns) {
    std::size_t found = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) {
        found = i;
        break;
      }
    }
    if (found == header.size()) {
      auto req = schema.required.find(logical);
      if (req != schema.required.end() && req->second) {
        throw SchemaError(path.string() + ": column '" + name + "' (mapped from " + logical +
                          ") not in header");
      }
      continue;
    }
    index[logical] = found;
  }
  if (schema.auto_personality) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i].starts_with("personality_") && header[i].size() > 12 && !index.count(header[i])) {
        index[header[i]] = i;
      }
    }
  }
  if (!index.count("essay")) throw SchemaError(path.string() + ": no essay column");

  Dataset d;
  d.provenance = path.string();
  std::vector<std::string> errors;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    const std::string where = path.filename().string() + " line " + std::to_string(line_no);
    if (cells.size() != header.size()) {
      errors.push_back(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
      continue;
    }
    auto cell = [&](const std::string& logical) -> std::optional<std::string> {
      auto it = index.find(logical);
      if (it == index.end()) return std::nullopt;
      auto v = unescape_field(cells[it->second]);
      if (trim(v).empty()) return std::nullopt;
      return v;
    };
    auto real = [&](const std::string& logical) -> std::optional<double> {
      auto raw = cell(logical);
      if (!raw) return std::nullopt;
      auto v = parse_real(trim(*raw));
      if (!v) errors.push_back(where + ", column '" + logical + "': not a number: '" + *raw + "'");
      return v;
    };
    auto category = [&](const std::string& logical) -> std::optional<std::string> {
      auto raw = cell(logical);
      if (!raw) return std::nullopt;
      return trim(*raw);
    };

    EssayRecord r;
    r.id = cell("id").value_or("row" + std::to_string(line_no - 1));
    auto essay = cell("essay");
    if (!essay) {
      errors.push_back(where + ", column 'essay': empty essay");
    } else {
      r.essay = *essay;
    }
    r.empathy = real("empathy");
    r.distress = real("distress");
    if (auto e = cell("emotion")) {
      auto label = to_lower(trim(*e));
      if (!emotion_index(label)) {
        errors.push_back(where + ", column 'emotion': unknown label '" + *e + "'");
      }
      r.emotion = label;
    }
    r.age = real("age");
    r.income = real("income");
    r.gender = category("gender");
    r.ethnicity = category("ethnicity");
    r.education = category("education");
    for (const auto& [logical, i] : index) {
      if (logical.starts_with("personality_")) {
        if (auto v = real(logical)) r.personality[logical.substr(12)] = *v;
      }
    }
    for (auto [score, name] : {std::pair{r.empathy, "empathy"}, std::pair{r.distress, "distress"}}) {
      if (score && !schema.score_range.contains(*score)) {
        d.warnings.push_back(where + ": " + name + " " + format_shortest(*score) +
                             " outside score range");
      }
    }
    d.records.push_back(std::move(r));
  }
  if (!errors.empty()) {
    throw DataError(path.string() + ": " + std::to_string(errors.size()) + " bad row(s)",
                    std::move(errors));
  }
  validate_records(d);
  return d;
}

void write_tsv(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const auto traits = d.personality_traits();
  auto num = [](const std::optional<double>& v) { return v ? format_shortest(*v) : std::string(); };
  auto str = [](const std::optional<std::string>& v) { return v ? escape_field(*v) : std::string(); };

  out << "id\tessay\tempathy\tdistress\temotion\tage\tgender\tethnicity\tincome\teducation";
  for (const auto& t : traits) out << "\tpersonality_" << t;
  out << '\n';
  for (const auto& r : d.records) {
    out << escape_field(r.id) << '\t' << escape_field(r.essay) << '\t' << num(r.empathy) << '\t'
        << num(r.distress) << '\t' << str(r.emotion) << '\t' << num(r.age) << '\t' << str(r.gender)
        << '\t' << str(r.ethnicity) << '\t' << num(r.income) << '\t' << str(r.education);
    for (const auto& t : traits) {
      auto it = r.personality.find(t);
      out << '\t' << (it == r.personality.end() ? std::string() : format_shortest(it->second));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace affect::corpus
