#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tse::text {

/// Decodes UTF-8 into code points. Returns nullopt on malformed input
/// (overlong forms, surrogates and truncated sequences are rejected).
std::optional<std::u32string> decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view cps);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
char32_t to_lower(char32_t cp);

/// Lowercases, splits on Unicode whitespace and strips leading/trailing
/// punctuation from each piece. Pieces that become empty are dropped.
/// Throws FormatError on invalid UTF-8.
std::vector<std::string> tokenize(std::string_view line);

/// Same as tokenize() but keeps empty pieces as "" so positions of the
/// whitespace-split input are preserved.
std::vector<std::string> tokenize_positional(std::string_view line);

/// Splits on a single character, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

}  // namespace tse::text
