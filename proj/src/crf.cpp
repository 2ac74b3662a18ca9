#include "crftag/crf.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <thread>

#include "crftag/error.hpp"
#include "crftag/lbfgs.hpp"
#include "crftag/text.hpp"

namespace crftag {

std::optional<std::size_t> LinearChainModel::label_index(std::string_view label) const {
  const auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

std::string LinearChainModel::template_hash() const {
  return text::fnv1a_hex(format_templates(templates));
}

namespace {

EncodedSentence encode(const LinearChainModel& model, const Sentence& sentence,
                       const std::vector<std::string>* gold) {
  EncodedSentence e;
  e.length = sentence.size();
  e.unigram_offsets.reserve(e.length + 1);
  e.bigram_offsets.reserve(e.length + 1);
  e.unigram_offsets.push_back(0);
  e.bigram_offsets.push_back(0);
  for (std::size_t t = 0; t < e.length; ++t) {
    if (sentence.tokens[t].columns.size() < model.observation_columns)
      fail(ErrorCode::ColumnMismatch, "token '" + sentence.tokens[t].form() + "' has " +
                                          std::to_string(sentence.tokens[t].columns.size()) +
                                          " columns, model expects " +
                                          std::to_string(model.observation_columns));
    for (const auto& tmpl : model.templates) {
      const bool bigram = tmpl.kind == FeatureTemplate::Kind::Bigram;
      if (bigram && t == 0) continue;
      const auto base = model.dictionary.base(expand(tmpl, sentence, t));
      if (!base) continue;
      (bigram ? e.bigram : e.unigram).push_back(static_cast<std::uint32_t>(*base));
    }
    e.unigram_offsets.push_back(static_cast<std::uint32_t>(e.unigram.size()));
    e.bigram_offsets.push_back(static_cast<std::uint32_t>(e.bigram.size()));
  }
  if (gold) {
    e.gold.reserve(e.length);
    for (const auto& label : *gold) {
      const auto idx = model.label_index(label);
      if (!idx) fail(ErrorCode::UnknownLabel, "label '" + label + "' is not in the model alphabet");
      e.gold.push_back(static_cast<std::uint32_t>(*idx));
    }
  }
  return e;
}

std::vector<EncodedSentence> encode_training_data(const LinearChainModel& model,
                                                  const Corpus& data, std::size_t label_column) {
  std::vector<EncodedSentence> out;
  out.reserve(data.size());
  const Corpus obs = drop_column(data, label_column);
  for (std::size_t s = 0; s < data.size(); ++s) {
    std::vector<std::string> gold;
    gold.reserve(data.sentences()[s].size());
    for (const auto& tok : data.sentences()[s].tokens) gold.push_back(tok.columns[label_column]);
    out.push_back(encode(model, obs.sentences()[s], &gold));
  }
  return out;
}

constexpr std::size_t kGradientBlocks = 4;

// Sums per-sentence log-likelihood terms into a fixed number of contiguous
// sentence blocks and reduces the blocks pairwise, so the floating-point
// result does not depend on the thread count.
class GradientEngine {
 public:
  GradientEngine(const LinearChainModel& model, std::span<const EncodedSentence> data,
                 double sigma, std::size_t threads)
      : model_(model),
        data_(data),
        sigma_(sigma),
        threads_(std::max<std::size_t>(1, threads)),
        blocks_(std::min(kGradientBlocks, std::max<std::size_t>(1, data.size()))),
        grads_(blocks_, std::vector<double>(model.dictionary.size())),
        values_(blocks_) {}

  // Returns the penalized log-likelihood; `grad` receives its gradient.
  double evaluate(std::span<const double> w, std::span<double> grad) {
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t b; (b = next.fetch_add(1)) < blocks_;) run_block(b, w);
    };
    if (threads_ == 1 || blocks_ == 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t i = 1; i < std::min(threads_, blocks_); ++i) pool.emplace_back(worker);
      worker();
    }
    for (std::size_t stride = 1; stride < blocks_; stride *= 2)
      for (std::size_t i = 0; i + stride < blocks_; i += 2 * stride) {
        values_[i] += values_[i + stride];
        auto& dst = grads_[i];
        const auto& src = grads_[i + stride];
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
    const double inv_var = 1.0 / (sigma_ * sigma_);
    double penalty = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      penalty += w[k] * w[k];
      grad[k] = grads_[0][k] - w[k] * inv_var;
    }
    return values_[0] - 0.5 * penalty * inv_var;
  }

 private:
  void run_block(std::size_t b, std::span<const double> w) {
    auto& g = grads_[b];
    std::fill(g.begin(), g.end(), 0.0);
    double value = 0.0;
    const std::size_t begin = b * data_.size() / blocks_;
    const std::size_t end = (b + 1) * data_.size() / blocks_;
    const std::size_t L = model_.labels.size();
    for (std::size_t s = begin; s < end; ++s) {
      const auto& sent = data_[s];
      const Lattice lat = build_lattice(model_, sent, w);
      const Marginals m = forward_backward(lat);
      std::vector<std::size_t> gold(sent.gold.begin(), sent.gold.end());
      value += sequence_score(lat, gold) - m.log_z;
      for (std::size_t t = 0; t < sent.length; ++t) {
        for (const auto base : sent.unigrams_at(t)) {
          g[base + sent.gold[t]] += 1.0;
          for (std::size_t y = 0; y < L; ++y) g[base + y] -= m.node[t * L + y];
        }
        if (t == 0) continue;
        for (const auto base : sent.bigrams_at(t)) {
          g[base + sent.gold[t - 1] * L + sent.gold[t]] += 1.0;
          const double* em = &m.edge[(t - 1) * L * L];
          for (std::size_t k = 0; k < L * L; ++k) g[base + k] -= em[k];
        }
      }
    }
    values_[b] = value;
  }

  const LinearChainModel& model_;
  std::span<const EncodedSentence> data_;
  double sigma_;
  std::size_t threads_;
  std::size_t blocks_;
  std::vector<std::vector<double>> grads_;
  std::vector<double> values_;
};

}  // namespace

EncodedSentence encode_sentence(const LinearChainModel& model, const Sentence& sentence,
                                std::optional<std::size_t> gold_column) {
  if (!gold_column) return encode(model, sentence, nullptr);
  std::vector<std::string> gold;
  for (const auto& tok : sentence.tokens) {
    if (*gold_column >= tok.columns.size())
      fail(ErrorCode::ColumnMismatch, "gold column " + std::to_string(*gold_column) + " missing");
    gold.push_back(tok.columns[*gold_column]);
  }
  return encode(model, sentence, &gold);
}

Lattice build_lattice(const LinearChainModel& model, const EncodedSentence& sentence,
                      std::span<const double> weights) {
  const std::size_t L = model.labels.size();
  Lattice lat(sentence.length, L);
  for (std::size_t t = 0; t < sentence.length; ++t) {
    for (const auto base : sentence.unigrams_at(t))
      for (std::size_t y = 0; y < L; ++y) lat.node(t, y) += weights[base + y];
    if (t == 0) continue;
    for (const auto base : sentence.bigrams_at(t))
      for (std::size_t p = 0; p < L; ++p)
        for (std::size_t y = 0; y < L; ++y) lat.edge(t - 1, p, y) += weights[base + p * L + y];
  }
  return lat;
}

Lattice build_lattice(const LinearChainModel& model, const Sentence& sentence) {
  return build_lattice(model, encode(model, sentence, nullptr), model.weights);
}

ObjectiveValue objective_and_gradient(const LinearChainModel& model, const Corpus& data,
                                      std::size_t label_column, double sigma,
                                      std::size_t threads) {
  if (label_column >= data.column_count())
    fail(ErrorCode::MissingColumn, "label column " + std::to_string(label_column) + " missing");
  const auto encoded = encode_training_data(model, data, label_column);
  GradientEngine engine(model, encoded, sigma, threads);
  ObjectiveValue out;
  out.gradient.resize(model.weights.size());
  out.value = engine.evaluate(model.weights, out.gradient);
  return out;
}

LinearChainModel train(const Corpus& data, std::size_t label_column,
                       std::span<const FeatureTemplate> templates,
                       const TrainingOptions& options) {
  if (data.token_count() == 0) fail(ErrorCode::EmptyTrainingSet, "no training tokens");
  if (label_column >= data.column_count())
    fail(ErrorCode::MissingColumn, "label column " + std::to_string(label_column) + " missing");
  if (data.column_count() < 2)
    fail(ErrorCode::BadColumn, "training data needs at least one observation column");
  if (!(options.sigma > 0.0)) fail(ErrorCode::PipelineConfig, "sigma must be positive");

  LinearChainModel model;
  model.observation_columns = data.column_count() - 1;
  for (const auto& t : templates)
    if (!t.macros.empty() && t.max_column() >= model.observation_columns)
      fail(ErrorCode::BadColumn, "template " + t.id + " reads column " +
                                     std::to_string(t.max_column()) + " but only " +
                                     std::to_string(model.observation_columns) +
                                     " observation columns exist");
  model.templates.assign(templates.begin(), templates.end());
  model.sigma = options.sigma;
  const Corpus obs = drop_column(data, label_column);
  model.labels = label_alphabet(data, label_column);
  model.dictionary = build_dictionary(obs, templates, model.labels.size(), options.cutoff);
  model.weights.assign(model.dictionary.size(), 0.0);

  const auto encoded = encode_training_data(model, data, label_column);
  GradientEngine engine(model, encoded, options.sigma, options.threads);
  const Objective negated = [&](std::span<const double> w, std::span<double> g) {
    const double v = engine.evaluate(w, g);
    for (double& x : g) x = -x;
    return -v;
  };
  LbfgsOptions lopt;
  lopt.history = options.history;
  lopt.max_iterations = options.max_iterations;
  lopt.tolerance = options.tolerance;
  auto result = lbfgs_minimize(negated, model.weights, lopt);
  for (double w : result.x)
    if (!std::isfinite(w)) fail(ErrorCode::NonFiniteObjective, "training produced a non-finite weight");
  model.weights = std::move(result.x);
  model.iterations = result.iterations;
  model.stop_reason = result.stop_reason;
  model.objective_trace.reserve(result.trace.size());
  for (double v : result.trace) model.objective_trace.push_back(-v);
  return model;
}

TaggedSentence tag_sentence(const LinearChainModel& model, const Sentence& sentence,
                            bool with_confidence) {
  const Lattice lat = build_lattice(model, sentence);
  const auto path = viterbi(lat);
  TaggedSentence out;
  out.labels.reserve(path.size());
  for (auto y : path) out.labels.push_back(model.labels[y]);
  if (with_confidence) {
    const auto m = forward_backward(lat);
    const std::size_t L = model.labels.size();
    for (std::size_t t = 0; t < path.size(); ++t) out.confidence.push_back(m.node[t * L + path[t]]);
  }
  return out;
}

std::vector<TaggedSentence> tag(const LinearChainModel& model, std::span<const Sentence> sentences,
                                bool with_confidence) {
  std::vector<TaggedSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(tag_sentence(model, s, with_confidence));
  return out;
}

std::vector<double> node_marginals(const LinearChainModel& model, const Sentence& sentence) {
  return forward_backward(build_lattice(model, sentence)).node;
}

// Model file layout, one record per line, fields TAB-separated:
//   crftag-model 1 | observation-columns n | sigma s | iterations k |
//   template-hash h | recipe r | labels n + n lines | templates n + n lines |
//   features n + n lines "U|B freq string" | weights n + n lines | end
namespace {

constexpr std::string_view kMagic = "crftag-model";
constexpr int kFormatVersion = 1;

class LineReader {
 public:
  explicit LineReader(std::string_view text) : rest_(text) {}

  std::string_view next() {
    if (rest_.empty()) fail(ErrorCode::ModelFormat, "unexpected end of model file at line " +
                                                       std::to_string(line_ + 1));
    const auto nl = rest_.find('\n');
    std::string_view line = rest_.substr(0, nl);
    rest_ = nl == std::string_view::npos ? std::string_view{} : rest_.substr(nl + 1);
    ++line_;
    return line;
  }

  std::string_view field(std::string_view key) {
    const auto line = next();
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || line.substr(0, tab) != key)
      fail(ErrorCode::ModelFormat, "line " + std::to_string(line_) + ": expected '" +
                                       std::string(key) + "'");
    return line.substr(tab + 1);
  }

  std::size_t count(std::string_view key) { return to_size(field(key)); }

  std::size_t to_size(std::string_view s) const {
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
      fail(ErrorCode::ModelFormat, "line " + std::to_string(line_) + ": bad integer '" +
                                       std::string(s) + "'");
    return v;
  }

  double to_double(std::string_view s) const {
    try {
      return text::parse_double(s);
    } catch (const std::exception&) {
      fail(ErrorCode::ModelFormat, "line " + std::to_string(line_) + ": bad number '" +
                                       std::string(s) + "'");
    }
  }

 private:
  std::string_view rest_;
  std::size_t line_ = 0;
};

}  // namespace

std::string write_model(const LinearChainModel& m) {
  std::string out;
  const auto kv = [&](std::string_view k, const std::string& v) {
    out += k;
    out += '\t';
    out += v;
    out += '\n';
  };
  kv(kMagic, std::to_string(kFormatVersion));
  kv("observation-columns", std::to_string(m.observation_columns));
  kv("sigma", text::format_double(m.sigma));
  kv("iterations", std::to_string(m.iterations));
  kv("template-hash", m.template_hash());
  kv("recipe", m.recipe.empty() ? "-" : m.recipe);
  kv("labels", std::to_string(m.labels.size()));
  for (const auto& l : m.labels) out += l + '\n';
  kv("templates", std::to_string(m.templates.size()));
  out += format_templates(m.templates);
  kv("features", std::to_string(m.dictionary.feature_count()));
  for (const auto& e : m.dictionary.entries()) {
    out += e.kind == FeatureTemplate::Kind::Unigram ? "U\t" : "B\t";
    out += std::to_string(e.frequency);
    out += '\t';
    out += e.feature;
    out += '\n';
  }
  kv("weights", std::to_string(m.weights.size()));
  for (double w : m.weights) out += text::format_double(w) + '\n';
  out += "end\n";
  return out;
}

LinearChainModel read_model(std::string_view input) {
  LineReader in(input);
  LinearChainModel m;
  const auto version = in.field(kMagic);
  if (version != std::to_string(kFormatVersion))
    fail(ErrorCode::ModelFormat, "unsupported model format version '" + std::string(version) + "'");
  m.observation_columns = in.count("observation-columns");
  m.sigma = in.to_double(in.field("sigma"));
  m.iterations = in.count("iterations");
  const std::string hash(in.field("template-hash"));
  const auto recipe = in.field("recipe");
  m.recipe = recipe == "-" ? std::string() : std::string(recipe);
  const std::size_t n_labels = in.count("labels");
  for (std::size_t i = 0; i < n_labels; ++i) m.labels.emplace_back(in.next());
  if (!std::is_sorted(m.labels.begin(), m.labels.end()) || m.labels.empty())
    fail(ErrorCode::ModelFormat, "label alphabet must be non-empty and sorted");
  const std::size_t n_templates = in.count("templates");
  std::string tmpl_text;
  for (std::size_t i = 0; i < n_templates; ++i) {
    tmpl_text += in.next();
    tmpl_text += '\n';
  }
  m.templates = parse_templates(tmpl_text);
  if (m.template_hash() != hash) fail(ErrorCode::ModelFormat, "template hash mismatch");
  const std::size_t n_features = in.count("features");
  m.dictionary = FeatureDictionary(m.labels.size());
  for (std::size_t i = 0; i < n_features; ++i) {
    const auto line = in.next();
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) fail(ErrorCode::ModelFormat, "bad feature record");
    const auto kind_s = line.substr(0, t1);
    FeatureTemplate::Kind kind;
    if (kind_s == "U") kind = FeatureTemplate::Kind::Unigram;
    else if (kind_s == "B") kind = FeatureTemplate::Kind::Bigram;
    else fail(ErrorCode::ModelFormat, "bad feature kind '" + std::string(kind_s) + "'");
    m.dictionary.add(std::string(line.substr(t2 + 1)), kind, in.to_size(line.substr(t1 + 1, t2 - t1 - 1)));
  }
  const std::size_t n_weights = in.count("weights");
  if (n_weights != m.dictionary.size())
    fail(ErrorCode::ModelFormat, "weight count " + std::to_string(n_weights) +
                                     " does not match dictionary size " +
                                     std::to_string(m.dictionary.size()));
  m.weights.reserve(n_weights);
  for (std::size_t i = 0; i < n_weights; ++i) {
    const double w = in.to_double(in.next());
    if (!std::isfinite(w)) fail(ErrorCode::ModelFormat, "non-finite weight");
    m.weights.push_back(w);
  }
  if (in.next() != "end") fail(ErrorCode::ModelFormat, "missing end marker");
  return m;
}

void save_model(const LinearChainModel& model, const std::string& path) {
  write_text_file(path, write_model(model));
}

LinearChainModel load_model(const std::string& path) {
  const std::string contents = read_text_file(path);
  try {
    return read_model(contents);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace crftag
