#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hierclass::utf8 {

// True when `s` is well-formed UTF-8 (no overlongs, no surrogates, <= U+10FFFF).
bool is_valid(std::string_view s);

// Decodes one code point starting at `pos`, advancing it. Invalid sequences
// yield U+FFFD and advance by one byte.
char32_t next_code_point(std::string_view s, std::size_t& pos);

// Unicode White_Space property.
bool is_space(char32_t c);

// Splits on runs of Unicode whitespace; empty pieces are dropped.
std::vector<std::string_view> split_whitespace(std::string_view s);

}  // namespace hierclass::utf8
