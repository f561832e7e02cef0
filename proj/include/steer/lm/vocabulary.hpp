#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace steer::lm {

using TokenId = std::uint32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kNumReserved = 4;

enum class TokenizerMode { kCharacter, kWord };

std::string_view mode_name(TokenizerMode mode);
TokenizerMode parse_mode(std::string_view name);

/// Ordered token inventory. Ids 0..3 are reserved (PAD, BOS, EOS, UNK); the
/// index of every token is stable across save/load.
class Vocabulary {
 public:
  /// Builds from explicit non-reserved tokens, in the given order.
  Vocabulary(TokenizerMode mode, std::vector<std::string> tokens);

  /// Character mode always contains tab, newline and printable ASCII, so two
  /// ASCII corpora produce identical vocabularies; other code points seen in
  /// the corpus follow in byte order. Word mode holds the sorted distinct words.
  static Vocabulary build(std::span<const std::string> corpus, TokenizerMode mode);

  std::size_t size() const { return tokens_.size(); }
  TokenizerMode mode() const { return mode_; }
  const std::string& token(TokenId id) const;
  std::optional<TokenId> find(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Unknown symbols map to UNK; BOS/EOS are never inserted.
  std::vector<TokenId> tokenize(std::string_view text) const;

  /// Character mode concatenates, word mode joins with single spaces;
  /// reserved tokens render as nothing. Throws InvalidTokenId.
  std::string detokenize(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const {
    return mode_ == other.mode_ && tokens_ == other.tokens_;
  }

 private:
  TokenizerMode mode_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace steer::lm
