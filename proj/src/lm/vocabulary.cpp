#include "steer/lm/vocabulary.hpp"

#include <algorithm>
#include <set>

#include "steer/error.hpp"
#include "steer/util/utf8.hpp"

namespace steer::lm {

namespace {

const std::vector<std::string>& reserved_tokens() {
  static const std::vector<std::string> kReserved = {"<pad>", "<s>", "</s>", "<unk>"};
  return kReserved;
}

}  // namespace

std::string_view mode_name(TokenizerMode mode) {
  return mode == TokenizerMode::kCharacter ? "character" : "word";
}

TokenizerMode parse_mode(std::string_view name) {
  if (name == "character" || name == "char") return TokenizerMode::kCharacter;
  if (name == "word" || name == "whitespace-word") return TokenizerMode::kWord;
  raise(ErrorCode::kInvalidArgument, "unknown tokenizer mode '" + std::string(name) + "'");
}

Vocabulary::Vocabulary(TokenizerMode mode, std::vector<std::string> tokens) : mode_(mode) {
  tokens_ = reserved_tokens();
  tokens_.reserve(tokens.size() + kNumReserved);
  for (auto& t : tokens) {
    if (std::find(reserved_tokens().begin(), reserved_tokens().end(), t) !=
        reserved_tokens().end()) {
      continue;
    }
    tokens_.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) raise(ErrorCode::kInvalidArgument, "duplicate token '" + tokens_[i] + "'");
  }
}

Vocabulary Vocabulary::build(std::span<const std::string> corpus, TokenizerMode mode) {
  std::vector<std::string> tokens;
  if (mode == TokenizerMode::kCharacter) {
    tokens.emplace_back("\t");
    tokens.emplace_back("\n");
    for (char c = 0x20; c < 0x7f; ++c) tokens.emplace_back(1, c);
    std::set<std::string> extra;
    for (const auto& line : corpus) {
      for (auto cp : util::split_code_points(line)) {
        if (cp.size() > 1 || static_cast<unsigned char>(cp[0]) >= 0x7f ||
            (static_cast<unsigned char>(cp[0]) < 0x20 && cp[0] != '\t' && cp[0] != '\n')) {
          extra.emplace(cp);
        }
      }
    }
    tokens.insert(tokens.end(), extra.begin(), extra.end());
  } else {
    std::set<std::string> words;
    for (const auto& line : corpus) {
      for (auto w : util::split_words(line)) words.emplace(w);
    }
    tokens.assign(words.begin(), words.end());
  }
  return Vocabulary(mode, std::move(tokens));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    raise(ErrorCode::kInvalidTokenId, "token id " + std::to_string(id) + " out of range");
  }
  return tokens_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::tokenize(std::string_view text) const {
  std::vector<TokenId> ids;
  auto pieces = mode_ == TokenizerMode::kCharacter ? util::split_code_points(text)
                                                   : util::split_words(text);
  ids.reserve(pieces.size());
  for (auto piece : pieces) {
    auto id = find(piece);
    // Reserved spellings typed into text are ordinary unknown symbols.
    ids.push_back(id && *id >= kNumReserved ? *id : kUnk);
  }
  return ids;
}

std::string Vocabulary::detokenize(std::span<const TokenId> ids) const {
  std::string out;
  bool first = true;
  for (TokenId id : ids) {
    const std::string& t = token(id);
    if (id < kNumReserved) continue;
    if (mode_ == TokenizerMode::kWord && !first) out.push_back(' ');
    out += t;
    first = false;
  }
  return out;
}

}  // namespace steer::lm
