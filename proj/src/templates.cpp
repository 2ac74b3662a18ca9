#include "crftag/templates.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "crftag/error.hpp"
#include "crftag/text.hpp"

namespace crftag {

std::size_t FeatureTemplate::max_column() const {
  std::size_t m = 0;
  for (const auto& mc : macros) m = std::max(m, mc.column);
  return m;
}

namespace {

[[noreturn]] void syntax(std::size_t line, const std::string& msg) {
  fail(ErrorCode::SyntaxError, "template line " + std::to_string(line) + ": " + msg);
}

FeatureTemplate parse_line(std::string_view line, std::size_t line_no) {
  FeatureTemplate t;
  t.text = std::string(line);
  if (line.front() == 'U') t.kind = FeatureTemplate::Kind::Unigram;
  else if (line.front() == 'B') t.kind = FeatureTemplate::Kind::Bigram;
  else syntax(line_no, "template must start with 'U' or 'B': " + std::string(line));

  const auto colon = line.find(':');
  t.id = std::string(colon == std::string_view::npos ? line : line.substr(0, colon));
  if (t.id.find('%') != std::string::npos) syntax(line_no, "macro inside template id");

  std::string literal;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] != '%') {
      literal += line[i++];
      continue;
    }
    if (line.substr(i, 3) != "%x[") syntax(line_no, "expected %x[row,col]");
    i += 3;
    const auto close = line.find(']', i);
    if (close == std::string_view::npos) syntax(line_no, "unterminated macro");
    const auto body = line.substr(i, close - i);
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) syntax(line_no, "macro needs row,col");
    FeatureTemplate::Macro m;
    const auto row_s = text::trim(body.substr(0, comma));
    const auto col_s = text::trim(body.substr(comma + 1));
    auto r1 = std::from_chars(row_s.data(), row_s.data() + row_s.size(), m.row);
    if (row_s.empty() || r1.ec != std::errc() || r1.ptr != row_s.data() + row_s.size())
      syntax(line_no, "bad macro row '" + std::string(row_s) + "'");
    auto r2 = std::from_chars(col_s.data(), col_s.data() + col_s.size(), m.column);
    if (col_s.empty() || r2.ec != std::errc() || r2.ptr != col_s.data() + col_s.size())
      syntax(line_no, "bad macro column '" + std::string(col_s) + "'");
    t.literals.push_back(std::move(literal));
    literal.clear();
    t.macros.push_back(m);
    i = close + 1;
  }
  t.literals.push_back(std::move(literal));
  return t;
}

}  // namespace

std::vector<FeatureTemplate> parse_templates(std::string_view input) {
  std::vector<FeatureTemplate> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(input, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto t = parse_line(line, line_no);
    if (!ids.insert(t.id).second)
      fail(ErrorCode::DuplicateId,
           "template line " + std::to_string(line_no) + ": duplicate id '" + t.id + "'");
    out.push_back(std::move(t));
  }
  return out;
}

std::string format_templates(std::span<const FeatureTemplate> templates) {
  std::string out;
  for (const auto& t : templates) {
    out += t.text;
    out += '\n';
  }
  return out;
}

std::string default_template_text(std::size_t observation_columns) {
  std::string out;
  std::size_t n = 0;
  const auto next_id = [&] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "U%02zu", n++);
    return std::string(buf);
  };
  const auto macro = [](int row, std::size_t col) {
    return "%x[" + std::to_string(row) + "," + std::to_string(col) + "]";
  };
  for (std::size_t c = 0; c < observation_columns; ++c) {
    out += "# column " + std::to_string(c) + "\n";
    for (int r = -2; r <= 2; ++r) out += next_id() + ":" + macro(r, c) + "\n";
    out += next_id() + ":" + macro(-1, c) + "/" + macro(0, c) + "\n";
    out += next_id() + ":" + macro(0, c) + "/" + macro(1, c) + "\n";
  }
  out += "\nB\n";
  return out;
}

std::string expand(const FeatureTemplate& tmpl, const Sentence& sentence, std::size_t position) {
  std::string out = tmpl.literals.front();
  const auto length = static_cast<long>(sentence.size());
  for (std::size_t i = 0; i < tmpl.macros.size(); ++i) {
    const auto& m = tmpl.macros[i];
    const long row = static_cast<long>(position) + m.row;
    if (row < 0) {
      out += "_B" + std::to_string(row);
    } else if (row >= length) {
      out += "_B+" + std::to_string(row - length + 1);
    } else {
      const auto& cols = sentence.tokens[static_cast<std::size_t>(row)].columns;
      if (m.column >= cols.size())
        fail(ErrorCode::BadColumn, "template " + tmpl.id + " reads column " +
                                       std::to_string(m.column) + " of a " +
                                       std::to_string(cols.size()) + "-column sentence");
      out += cols[m.column];
    }
    out += tmpl.literals[i + 1];
  }
  return out;
}

std::size_t FeatureDictionary::add(std::string feature, FeatureTemplate::Kind kind,
                                   std::uint64_t frequency) {
  if (const auto it = index_.find(feature); it != index_.end())
    return entries_[it->second].base;
  const std::size_t base = weight_count_;
  weight_count_ += kind == FeatureTemplate::Kind::Unigram ? label_count_ : label_count_ * label_count_;
  index_.emplace(feature, entries_.size());
  entries_.push_back({std::move(feature), kind, base, frequency});
  return base;
}

std::optional<std::size_t> FeatureDictionary::base(std::string_view feature) const {
  const auto it = index_.find(std::string(feature));
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].base;
}

bool FeatureDictionary::operator==(const FeatureDictionary& o) const {
  if (label_count_ != o.label_count_ || weight_count_ != o.weight_count_ ||
      entries_.size() != o.entries_.size())
    return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = o.entries_[i];
    if (a.feature != b.feature || a.kind != b.kind || a.base != b.base) return false;
  }
  return true;
}

std::vector<std::string> label_alphabet(const Corpus& corpus, std::size_t label_column) {
  std::set<std::string> labels;
  for (const auto& s : corpus.sentences())
    for (const auto& t : s.tokens) labels.insert(t.columns.at(label_column));
  return {labels.begin(), labels.end()};
}

FeatureDictionary build_dictionary(const Corpus& observations,
                                   std::span<const FeatureTemplate> templates,
                                   std::size_t label_count, std::uint64_t cutoff) {
  struct Seen {
    FeatureTemplate::Kind kind;
    std::uint64_t count;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Seen> counts;
  for (const auto& s : observations.sentences()) {
    for (std::size_t pos = 0; pos < s.size(); ++pos) {
      for (const auto& t : templates) {
        // bigram features live on the transition into `pos`
        if (t.kind == FeatureTemplate::Kind::Bigram && pos == 0) continue;
        auto f = expand(t, s, pos);
        auto [it, inserted] = counts.try_emplace(f, Seen{t.kind, 0});
        if (inserted) order.push_back(std::move(f));
        ++it->second.count;
      }
    }
  }
  FeatureDictionary dict(label_count);
  for (auto& f : order) {
    const auto& seen = counts.at(f);
    if (cutoff == kInfiniteCutoff || seen.count < cutoff) continue;
    dict.add(std::move(f), seen.kind, seen.count);
  }
  return dict;
}

FeatureDictionary build_dictionary(const Corpus& corpus,
                                   std::span<const FeatureTemplate> templates,
                                   std::size_t label_column, std::uint64_t cutoff,
                                   std::vector<std::string>* labels_out) {
  auto labels = label_alphabet(corpus, label_column);
  const Corpus observations = drop_column(corpus, label_column);
  auto dict = build_dictionary(observations, templates, labels.size(), cutoff);
  if (labels_out) *labels_out = std::move(labels);
  return dict;
}

}  // namespace crftag
