#include "steer/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "steer/error.hpp"
#include "steer/util/file_io.hpp"

namespace steer::cli {

using nlohmann::json;

namespace {

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string name() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }
  json value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected a value");
    const char c = s_[pos_];
    if (c == '"') return string_value();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      if (consume(']')) return arr;
      while (true) {
        arr.push_back(value());
        if (consume(']')) return arr;
        if (!consume(',')) fail("expected ',' or ']'");
      }
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' &&
           s_[pos_] != ' ' && s_[pos_] != '\t') {
      ++pos_;
    }
    return scalar(s_.substr(start, pos_ - start), false);
  }
  json scalar(std::string_view word, bool bare_string_ok) {
    if (word == "true") return true;
    if (word == "false") return false;
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(word.data(), word.data() + word.size(), i);
    if (ec == std::errc() && p == word.data() + word.size() && !word.empty()) return i;
    double d = 0;
    auto [q, ec2] = std::from_chars(word.data(), word.data() + word.size(), d);
    if (ec2 == std::errc() && q == word.data() + word.size() && !word.empty()) return d;
    if (bare_string_ok) return std::string(word);
    fail("cannot parse value '" + std::string(word) + "'");
  }
  [[noreturn]] void fail(const std::string& what) const {
    raise(ErrorCode::kConfigError, "line " + std::to_string(line_) + ": " + what);
  }

 private:
  json string_value() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

json parse_config(std::string_view text) {
  json doc = json::object();
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    LineParser p(line, line_no);
    if (!p.at_end_or_comment()) {
      if (p.consume('[')) {
        section = p.name();
        if (!p.consume(']')) p.fail("expected ']'");
        if (!doc.contains(section)) doc[section] = json::object();
      } else {
        const std::string key = p.name();
        if (!p.consume('=')) p.fail("expected '='");
        json v = p.value();
        json& table = doc[section];
        if (table.contains(key)) p.fail("duplicate key '" + key + "'");
        table[key] = std::move(v);
      }
      if (!p.at_end_or_comment()) p.fail("trailing characters");
    }
    start = end + 1;
  }
  return doc;
}

void set_override(json& doc, std::string_view dotted_key, std::string_view raw) {
  const auto dot = dotted_key.find('.');
  const std::string section = dot == std::string_view::npos ? "" : std::string(dotted_key.substr(0, dot));
  const std::string key(dot == std::string_view::npos ? dotted_key : dotted_key.substr(dot + 1));
  json value;
  if (!raw.empty() && (raw.front() == '[' || raw.front() == '"')) {
    LineParser p(raw, 0);
    value = p.value();
  } else {
    LineParser p(raw, 0);
    value = p.scalar(raw, true);
  }
  doc[section][key] = std::move(value);
}

namespace {

class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {}

  const json* get(const std::string& section, const std::string& key) {
    seen_.insert(section + "." + key);
    auto s = doc_.find(section);
    if (s == doc_.end() || !s->is_object()) return nullptr;
    auto k = s->find(key);
    return k == s->end() ? nullptr : &*k;
  }
  template <class T>
  void read(const std::string& section, const std::string& key, T& out) {
    if (const json* v = get(section, key)) out = convert<T>(*v, section, key);
  }
  template <class T>
  void read(const std::string& section, const std::string& key, std::optional<T>& out) {
    if (const json* v = get(section, key)) out = convert<T>(*v, section, key);
  }
  void check_unknown() const {
    for (const auto& [section, table] : doc_.items()) {
      if (!table.is_object()) {
        raise(ErrorCode::kConfigError, "unknown key '" + section + "'");
      }
      for (const auto& [key, value] : table.items()) {
        if (!seen_.count(section + "." + key)) {
          raise(ErrorCode::kConfigError,
                "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
        }
      }
    }
  }

 private:
  template <class T>
  static T convert(const json& v, const std::string& section, const std::string& key) {
    const std::string name = section.empty() ? key : section + "." + key;
    auto bad = [&](const char* expected) -> T {
      raise(ErrorCode::kConfigError, name + " must be " + expected);
    };
    if constexpr (std::is_same_v<T, bool>) {
      return v.is_boolean() ? v.get<bool>() : bad("a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return v.is_string() ? v.get<std::string>() : bad("a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      return v.is_number() ? v.get<T>() : bad("a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return bad("an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && v.get<std::int64_t>() < 0) {
        return bad("non-negative");
      }
      return v.get<T>();
    } else {
      if (!v.is_array()) return bad("an array");
      T out;
      for (const auto& e : v) out.push_back(convert<typename T::value_type>(e, section, key));
      return out;
    }
  }

  const json& doc_;
  std::set<std::string> seen_;
};

}  // namespace

CliConfig CliConfig::from_json(const json& doc) {
  if (!doc.is_object()) raise(ErrorCode::kConfigError, "config must be a table");
  CliConfig c;
  c.source = doc;
  Reader r(doc);
  r.read("models", "base", c.base_model);
  r.read("models", "domain", c.domain_model);

  r.read("train", "order", c.lm.order);
  r.read("train", "smoothing_alpha", c.lm.smoothing_alpha);
  r.read("train", "cache_weight", c.lm.cache_weight);
  r.read("train", "cache_decay", c.lm.cache_decay);
  r.read("train", "context_budget", c.lm.context_budget);
  r.read("train", "interpolation_weights", c.lm.interpolation_weights);
  std::string tokenizer = std::string(lm::mode_name(c.tokenizer));
  r.read("train", "tokenizer", tokenizer);
  r.read("train", "vocab_corpora", c.vocab_corpora);

  r.read("data", "real", c.real);
  r.read("data", "holdout", c.holdout);
  r.read("data", "synthetic", c.synthetic);

  r.read("generate", "instruction", c.instruction);
  r.read("generate", "count", c.count);
  r.read("generate", "gamma", c.gamma);
  r.read("generate", "eta", c.eta);
  r.read("generate", "allow_extrapolation", c.allow_extrapolation);
  r.read("generate", "negative_prompt_count", c.negative_prompt_count);
  r.read("generate", "batch_size", c.batch_size);
  r.read("generate", "max_new_tokens", c.max_new_tokens);
  r.read("generate", "labels", c.labels);

  std::string method = std::string(decoding::method_name(c.sampler.method));
  r.read("sampler", "method", method);
  r.read("sampler", "p", c.sampler.p);
  r.read("sampler", "k", c.sampler.k);
  r.read("sampler", "temperature", c.sampler.temperature);
  r.read("sampler", "degeneration_alpha", c.sampler.degeneration_alpha);
  r.read("sampler", "token_dim", c.token_dim);

  r.read("metrics", "ngram_tokenizer", c.metrics.ngram_tokenizer);
  r.read("metrics", "qdiv_clusters", c.metrics.qdiv_clusters);
  r.read("metrics", "qdiv_epsilon", c.metrics.qdiv_epsilon);
  r.read("metrics", "kmeans_seed", c.metrics.kmeans_seed);
  r.read("metrics", "auroc_folds", c.metrics.auroc_folds);
  r.read("metrics", "auroc_seed", c.metrics.auroc_seed);
  r.read("metrics", "learning_rate", c.metrics.classifier.learning_rate);
  r.read("metrics", "epochs", c.metrics.classifier.epochs);
  r.read("metrics", "l2", c.metrics.classifier.l2);
  std::int64_t hull_dim = c.metrics.hull_dim;
  r.read("metrics", "hull_dim", hull_dim);
  c.metrics.hull_dim = hull_dim;
  r.read("metrics", "hull_tau", c.metrics.hull_tau);

  std::string embedder = "builtin";
  r.read("embedder", "kind", embedder);
  r.read("embedder", "ngram_low", c.builtin.ngram_low);
  r.read("embedder", "ngram_high", c.builtin.ngram_high);
  r.read("embedder", "dimension", c.builtin.dimension);
  r.read("embedder", "hash_seed", c.builtin.hash_seed);
  r.read("embedder", "endpoint", c.embed_endpoint);
  r.read("embedder", "external_dimension", c.embed_dimension);
  r.read("embedder", "cache_dir", c.embed_cache);
  r.read("embedder", "model", c.embed_model);

  r.read("sweep", "gammas", c.gammas);
  r.read("sweep", "etas", c.etas);
  r.read("sweep", "samples_per_cell", c.samples_per_cell);
  r.read("sweep", "budget", c.budget);

  r.read("run", "seed", c.seed);
  r.read("run", "out", c.out);
  r.check_unknown();

  try {
    c.tokenizer = lm::parse_mode(tokenizer);
    c.sampler.method = decoding::parse_method(method);
  } catch (const Error& e) {
    raise(ErrorCode::kConfigError, e.what());
  }
  if (embedder == "builtin") {
    c.embedder = embeddings::EmbedderKind::kBuiltin;
  } else if (embedder == "external") {
    c.embedder = embeddings::EmbedderKind::kExternal;
  } else {
    raise(ErrorCode::kConfigError, "embedder.kind must be builtin or external");
  }
  return c;
}

std::string CliConfig::fingerprint() const {
  return util::sha256_hex(source.dump()).substr(0, 16);
}

}  // namespace steer::cli
