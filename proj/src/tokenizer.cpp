#include "hierclass/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "hierclass/corpus.hpp"
#include "hierclass/error.hpp"
#include "hierclass/utf8.hpp"

namespace hierclass {

std::size_t TokenSequence::length() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

namespace {

std::uint64_t pack(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

const std::array<char32_t, 256>& byte_to_code_point() {
    static const std::array<char32_t, 256> table = [] {
        std::array<char32_t, 256> t{};
        const auto printable = [](int b) {
            return (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
        };
        char32_t next = 256;
        for (int b = 0; b < 256; ++b) t[b] = printable(b) ? static_cast<char32_t>(b) : next++;
        return t;
    }();
    return table;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_special_name(std::string_view bytes) {
    return std::find(std::begin(kSpecialNames), std::end(kSpecialNames), bytes) != std::end(kSpecialNames);
}

// Replaces every non-overlapping occurrence of (left, right), scanning left to right.
void apply_merge(std::vector<TokenId>& symbols, TokenId left, TokenId right, TokenId merged) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < symbols.size();) {
        if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
            symbols[out++] = merged;
            i += 2;
        } else {
            symbols[out++] = symbols[i++];
        }
    }
    symbols.resize(out);
}

}  // namespace

std::string bytes_to_display(std::string_view bytes) {
    const auto& table = byte_to_code_point();
    std::string out;
    for (unsigned char b : bytes) append_utf8(out, table[b]);
    return out;
}

std::string display_to_bytes(std::string_view display) {
    static const std::map<char32_t, unsigned char> inverse = [] {
        std::map<char32_t, unsigned char> m;
        const auto& table = byte_to_code_point();
        for (int b = 0; b < 256; ++b) m[table[b]] = static_cast<unsigned char>(b);
        return m;
    }();
    std::string out;
    std::size_t pos = 0;
    while (pos < display.size()) {
        const char32_t cp = utf8::next_code_point(display, pos);
        const auto it = inverse.find(cp);
        if (it == inverse.end()) throw IoError("token string contains a character outside the byte alphabet");
        out.push_back(static_cast<char>(it->second));
    }
    return out;
}

std::vector<std::string_view> pretokenize(std::string_view text) {
    std::vector<std::string_view> chunks;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t j = i;
        if (is_ascii_space(text[i])) {
            while (j < text.size() && is_ascii_space(text[j])) ++j;
            // Hand a trailing ' ' over to the following word.
            if (j < text.size() && text[j - 1] == ' ') {
                if (j - 1 > i) chunks.push_back(text.substr(i, j - 1 - i));
                i = j - 1;
                j = i + 1;
            } else {
                chunks.push_back(text.substr(i, j - i));
                i = j;
                continue;
            }
        }
        while (j < text.size() && !is_ascii_space(text[j])) ++j;
        chunks.push_back(text.substr(i, j - i));
        i = j;
    }
    return chunks;
}

Tokenizer::Tokenizer() {
    tokens_.reserve(special::kFirstMerge);
    for (TokenId i = 0; i < special::kCount; ++i) tokens_.emplace_back();
    for (int b = 0; b < 256; ++b) tokens_.emplace_back(1, static_cast<char>(b));
}

void Tokenizer::add_merge(TokenId left, TokenId right) {
    const auto id = static_cast<TokenId>(tokens_.size());
    tokens_.push_back(tokens_[left] + tokens_[right]);
    merges_.emplace_back(left, right);
    merge_rank_.emplace(pack(left, right), id);
}

const std::string& Tokenizer::token_bytes(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
        throw ValidationError("token id " + std::to_string(id) + " out of vocabulary range");
    }
    return tokens_[id];
}

Tokenizer Tokenizer::train(std::span<const std::string> lines, std::size_t vocab_size) {
    if (lines.empty()) throw ValidationError("cannot train a tokenizer on an empty corpus");
    if (vocab_size < special::kFirstMerge) {
        throw ValidationError("vocab_size must be at least " + std::to_string(special::kFirstMerge));
    }

    std::map<std::string, std::size_t> chunk_counts;
    for (const auto& line : lines) {
        for (auto chunk : pretokenize(line)) ++chunk_counts[std::string(chunk)];
    }
    struct Word {
        std::vector<TokenId> symbols;
        std::size_t count;
    };
    std::vector<Word> words;
    words.reserve(chunk_counts.size());
    for (const auto& [chunk, count] : chunk_counts) {
        Word w{{}, count};
        for (unsigned char b : chunk) w.symbols.push_back(special::kFirstByte + b);
        words.push_back(std::move(w));
    }

    Tokenizer tok;
    // Merges that would recreate an existing token string (or a special name)
    // are never chosen, so every vocab.json key stays unique.
    std::unordered_set<std::string> existing(tok.tokens_.begin() + special::kFirstByte, tok.tokens_.end());
    while (tok.vocab_size() < vocab_size) {
        std::unordered_map<std::uint64_t, std::size_t> pair_counts;
        for (const auto& w : words) {
            for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
                pair_counts[pack(w.symbols[i], w.symbols[i + 1])] += w.count;
            }
        }
        bool found = false;
        TokenId best_left = 0, best_right = 0;
        std::size_t best_count = 0;
        for (const auto& [key, count] : pair_counts) {
            const auto left = static_cast<TokenId>(key >> 32);
            const auto right = static_cast<TokenId>(key & 0xFFFFFFFFu);
            const std::string& lb = tok.tokens_[left];
            const std::string& rb = tok.tokens_[right];
            const std::string joined = lb + rb;
            if (is_special_name(joined) || existing.contains(joined)) continue;
            const bool better =
                !found || count > best_count ||
                (count == best_count &&
                 std::tie(lb, rb) < std::tie(tok.tokens_[best_left], tok.tokens_[best_right]));
            if (better) {
                found = true;
                best_left = left;
                best_right = right;
                best_count = count;
            }
        }
        if (!found) break;
        const auto merged = static_cast<TokenId>(tok.vocab_size());
        tok.add_merge(best_left, best_right);
        existing.insert(tok.tokens_.back());
        for (auto& w : words) apply_merge(w.symbols, best_left, best_right, merged);
    }
    return tok;
}

std::vector<TokenId> Tokenizer::encode_pieces(std::string_view text) const {
    std::vector<TokenId> out;
    std::vector<TokenId> symbols;
    for (auto chunk : pretokenize(text)) {
        symbols.clear();
        for (unsigned char b : chunk) symbols.push_back(special::kFirstByte + b);
        while (symbols.size() > 1) {
            // Lowest-rank adjacent pair; merged ids increase with rank.
            TokenId best = -1;
            std::size_t best_at = 0;
            for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
                const auto it = merge_rank_.find(pack(symbols[i], symbols[i + 1]));
                if (it != merge_rank_.end() && (best < 0 || it->second < best)) {
                    best = it->second;
                    best_at = i;
                }
            }
            if (best < 0) break;
            apply_merge(symbols, symbols[best_at], symbols[best_at + 1], best);
        }
        out.insert(out.end(), symbols.begin(), symbols.end());
    }
    return out;
}

TokenSequence Tokenizer::encode(std::string_view text, std::size_t max_len) const {
    if (max_len < 2) throw ValidationError("max_len must be at least 2");
    std::vector<TokenId> pieces = encode_pieces(text);
    if (pieces.size() > max_len - 2) pieces.resize(max_len - 2);
    TokenSequence seq;
    seq.ids.assign(max_len, special::kPad);
    seq.mask.assign(max_len, 0);
    seq.ids[0] = special::kCls;
    std::copy(pieces.begin(), pieces.end(), seq.ids.begin() + 1);
    seq.ids[pieces.size() + 1] = special::kSep;
    std::fill(seq.mask.begin(), seq.mask.begin() + static_cast<std::ptrdiff_t>(pieces.size() + 2), 1);
    return seq;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) {
        const std::string& bytes = token_bytes(id);
        out += bytes;
    }
    return out;
}

std::string Tokenizer::decode(const TokenSequence& seq) const {
    if (seq.ids.size() != seq.mask.size()) throw ValidationError("ids and mask differ in length");
    std::string out;
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
        const std::string& bytes = token_bytes(seq.ids[i]);
        if (seq.mask[i]) out += bytes;
    }
    return out;
}

std::string Tokenizer::vocab_json() const {
    nlohmann::ordered_json vocab = nlohmann::ordered_json::object();
    for (TokenId id = 0; id < static_cast<TokenId>(tokens_.size()); ++id) {
        const std::string key = id < special::kCount ? std::string(kSpecialNames[id]) : bytes_to_display(tokens_[id]);
        vocab[key] = id;
    }
    return vocab.dump(2) + "\n";
}

std::string Tokenizer::merges_text() const {
    std::string out;
    for (const auto& [l, r] : merges_) {
        out += bytes_to_display(tokens_[l]);
        out += ' ';
        out += bytes_to_display(tokens_[r]);
        out += '\n';
    }
    return out;
}

Tokenizer Tokenizer::from_files(const std::string& vocab_json, const std::string& merges_text) {
    nlohmann::json vocab;
    try {
        vocab = nlohmann::json::parse(vocab_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("vocab.json: ") + e.what());
    }
    if (!vocab.is_object()) throw IoError("vocab.json: expected an object");

    std::vector<std::string> by_id(vocab.size());
    std::vector<bool> seen(vocab.size(), false);
    for (const auto& [key, value] : vocab.items()) {
        if (!value.is_number_integer()) throw IoError("vocab.json: id for '" + key + "' is not an integer");
        const auto id = value.get<std::int64_t>();
        if (id < 0 || static_cast<std::size_t>(id) >= by_id.size() || seen[id]) {
            throw IoError("vocab.json: ids are not a permutation of 0..n-1");
        }
        seen[id] = true;
        by_id[id] = key;
    }
    if (by_id.size() < static_cast<std::size_t>(special::kFirstMerge)) {
        throw IoError("vocab.json: fewer entries than specials plus 256 bytes");
    }
    for (TokenId i = 0; i < special::kCount; ++i) {
        if (by_id[i] != kSpecialNames[i]) throw IoError("vocab.json: special token ids changed");
    }

    Tokenizer tok;
    for (int b = 0; b < 256; ++b) {
        if (by_id[special::kFirstByte + b] != bytes_to_display(tok.tokens_[special::kFirstByte + b])) {
            throw IoError("vocab.json: byte token table does not match");
        }
    }
    std::unordered_map<std::string, TokenId> display_to_id;
    for (TokenId id = special::kFirstByte; id < static_cast<TokenId>(tok.tokens_.size()); ++id) {
        display_to_id.emplace(bytes_to_display(tok.tokens_[id]), id);
    }

    std::istringstream in(merges_text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto space = line.find(' ');
        if (space == std::string::npos || line.find(' ', space + 1) != std::string::npos) {
            throw IoError("merges.txt:" + std::to_string(line_no) + ": expected 'left right'");
        }
        const auto l = display_to_id.find(line.substr(0, space));
        const auto r = display_to_id.find(line.substr(space + 1));
        if (l == display_to_id.end() || r == display_to_id.end()) {
            throw IoError("merges.txt:" + std::to_string(line_no) + ": merge uses an unknown token");
        }
        tok.add_merge(l->second, r->second);
        const auto merged = static_cast<TokenId>(tok.tokens_.size() - 1);
        const std::string display = bytes_to_display(tok.tokens_[merged]);
        if (static_cast<std::size_t>(merged) >= by_id.size() || by_id[merged] != display) {
            throw IoError("merges.txt:" + std::to_string(line_no) + ": merge disagrees with vocab.json");
        }
        display_to_id.emplace(display, merged);
    }
    if (tok.tokens_.size() != by_id.size()) throw IoError("vocab.json has entries not produced by merges.txt");
    return tok;
}

void Tokenizer::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_file(dir / "vocab.json", vocab_json());
    write_file(dir / "merges.txt", merges_text());
}

Tokenizer Tokenizer::load(const std::filesystem::path& dir) {
    return from_files(read_file(dir / "vocab.json"), read_file(dir / "merges.txt"));
}

}  // namespace hierclass
