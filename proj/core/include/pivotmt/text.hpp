#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pivotmt::text {

/// Decodes UTF-8 into code points. Invalid sequences become U+FFFD.
std::u32string decode_utf8(std::string_view s);

std::string encode_utf8(std::u32string_view s);

/// Whitespace as Python's str.split()/strip() define it. This is the one
/// whitespace notion used across the codebase (metrics and vocabulary),
/// so scores and fixtures agree on splitting behavior.
bool is_space(char32_t cp);

/// Python-style str.split(): split on runs of whitespace, no empty tokens.
std::vector<std::string> split_ws(std::string_view s);

/// Removes every whitespace code point (''.join(s.split())).
std::string remove_ws(std::string_view s);

std::string strip(std::string_view s);
std::string rstrip(std::string_view s);

/// Canonical composition (NFC).
std::string nfc(std::string_view s);

/// Full Unicode case folding.
std::string casefold(std::string_view s);

/// True for general category P* code points.
bool is_punct(char32_t cp);

/// Strips all leading and trailing punctuation code points from a word.
std::string strip_punct(std::string_view word);

}  // namespace pivotmt::text
