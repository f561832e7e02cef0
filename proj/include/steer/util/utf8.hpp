#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace steer::util {

/// Splits UTF-8 text into code-point substrings. Each byte of an invalid
/// sequence becomes its own one-byte piece.
std::vector<std::string_view> split_code_points(std::string_view text);

/// Whitespace-separated words (ASCII whitespace).
std::vector<std::string_view> split_words(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace steer::util
