#include "hierclass/utf8.hpp"

namespace hierclass::utf8 {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

// Returns the sequence length at `pos`, or 0 when the bytes there are not a
// well-formed UTF-8 sequence.
std::size_t sequence_length(std::string_view s, std::size_t pos, char32_t& out) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        out = b0;
        return 1;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min = 0x10000;
    } else {
        return 0;
    }
    if (pos + len > s.size()) return 0;
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if (!is_continuation(b)) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    out = cp;
    return len;
}

}  // namespace

bool is_valid(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        char32_t cp;
        const std::size_t len = sequence_length(s, pos, cp);
        if (len == 0) return false;
        pos += len;
    }
    return true;
}

char32_t next_code_point(std::string_view s, std::size_t& pos) {
    char32_t cp = kReplacement;
    const std::size_t len = sequence_length(s, pos, cp);
    if (len == 0) {
        ++pos;
        return kReplacement;
    }
    pos += len;
    return cp;
}

bool is_space(char32_t c) {
    switch (c) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    std::size_t start = std::string_view::npos;
    while (pos < s.size()) {
        const std::size_t here = pos;
        const char32_t cp = next_code_point(s, pos);
        if (is_space(cp)) {
            if (start != std::string_view::npos) {
                out.push_back(s.substr(start, here - start));
                start = std::string_view::npos;
            }
        } else if (start == std::string_view::npos) {
            start = here;
        }
    }
    if (start != std::string_view::npos) out.push_back(s.substr(start));
    return out;
}

}  // namespace hierclass::utf8
