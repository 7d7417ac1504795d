#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hierclass {

using TokenId = std::int32_t;

namespace special {
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kCls = 1;
inline constexpr TokenId kSep = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kCount = 4;
inline constexpr TokenId kFirstByte = kCount;
inline constexpr TokenId kFirstMerge = kFirstByte + 256;
}  // namespace special

// Padded, framed encoder input. ids[0] is CLS, the last position with
// mask 1 is SEP, everything after it is PAD with mask 0.
struct TokenSequence {
    std::vector<TokenId> ids;
    std::vector<std::uint8_t> mask;

    std::size_t length() const;  // number of mask-1 positions
    bool operator==(const TokenSequence&) const = default;
};

// Byte-level BPE. Token i >= 4 is a byte string; ids 4..259 are the single
// bytes 0x00..0xFF and ids from 260 on are merges in rank order.
class Tokenizer {
  public:
    using Merge = std::pair<TokenId, TokenId>;

    // Byte vocabulary only, no merges.
    Tokenizer();

    static Tokenizer train(std::span<const std::string> lines, std::size_t vocab_size);

    TokenSequence encode(std::string_view text, std::size_t max_len) const;
    // Unframed BPE pieces of `text`.
    std::vector<TokenId> encode_pieces(std::string_view text) const;
    std::string decode(const TokenSequence& seq) const;
    std::string decode(std::span<const TokenId> ids) const;

    std::size_t vocab_size() const { return tokens_.size(); }
    const std::vector<Merge>& merges() const { return merges_; }
    // Raw bytes of `id`; empty for specials.
    const std::string& token_bytes(TokenId id) const;

    // vocab.json / merges.txt content.
    std::string vocab_json() const;
    std::string merges_text() const;
    static Tokenizer from_files(const std::string& vocab_json, const std::string& merges_text);

    void save(const std::filesystem::path& dir) const;
    static Tokenizer load(const std::filesystem::path& dir);

    bool operator==(const Tokenizer& other) const { return merges_ == other.merges_; }

  private:
    void add_merge(TokenId left, TokenId right);

    std::vector<std::string> tokens_;
    std::vector<Merge> merges_;
    std::unordered_map<std::uint64_t, TokenId> merge_rank_;  // packed pair -> merged id
};

// Splits text into pre-token chunks: runs of non-whitespace bytes, each taking
// one preceding ASCII space if present, and the remaining whitespace runs.
// Concatenating the chunks reproduces the input.
std::vector<std::string_view> pretokenize(std::string_view text);

// Printable encoding of a byte string used for vocab.json keys and merges.txt
// (the GPT-2 byte-to-unicode table); never contains ASCII whitespace.
std::string bytes_to_display(std::string_view bytes);
std::string display_to_bytes(std::string_view display);

inline constexpr std::string_view kSpecialNames[special::kCount] = {"[PAD]", "[CLS]", "[SEP]", "[UNK]"};

}  // namespace hierclass
