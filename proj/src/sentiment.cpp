#include "hierclass/sentiment.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "hierclass/corpus.hpp"
#include "hierclass/error.hpp"
#include "hierclass/utf8.hpp"

namespace hierclass {

std::string_view to_string(Emotion e) { return kEmotionNames[static_cast<std::size_t>(e)]; }

std::optional<Emotion> parse_emotion(std::string_view name) {
    for (std::size_t i = 0; i < kEmotionCount; ++i) {
        if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
    }
    return std::nullopt;
}

void Lexicon::add(std::string word, double polarity, std::optional<Emotion> emotion) {
    if (word.empty()) throw ValidationError("lexicon word is empty");
    if (normalize_word(word) != word) throw ValidationError("lexicon word '" + word + "' is not normalized");
    if (!(polarity >= -1.0 && polarity <= 1.0)) {
        throw ValidationError("polarity for '" + word + "' outside [-1, 1]");
    }
    if (!entries_.emplace(std::move(word), LexiconEntry{polarity, emotion}).second) {
        throw ValidationError("duplicate lexicon word");
    }
}

const LexiconEntry* Lexicon::find(std::string_view word) const {
    const auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string Lexicon::to_tsv() const {
    std::string out = "word\tpolarity\temotion\n";
    for (const auto& [word, entry] : entries_) {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, entry.polarity);
        out += word;
        out += '\t';
        out.append(buf, res.ptr);
        out += '\t';
        if (entry.emotion) out += to_string(*entry.emotion);
        out += '\n';
    }
    return out;
}

Lexicon Lexicon::from_tsv(const std::string& content, const std::string& source) {
    Lexicon lex;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    const auto fail = [&](const std::string& msg) {
        return ValidationError(source + ":" + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.starts_with("word\t")) continue;
        if (line.empty()) continue;
        if (!utf8::is_valid(line)) throw fail("invalid UTF-8");
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (;;) {
            const auto tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (cols.size() == 2) cols.emplace_back();
        if (cols.size() != 3) throw fail("expected word, polarity, emotion columns");

        double polarity = 0.0;
        const auto& p = cols[1];
        const auto res = std::from_chars(p.data(), p.data() + p.size(), polarity);
        if (res.ec != std::errc{} || res.ptr != p.data() + p.size()) throw fail("bad polarity '" + p + "'");
        std::optional<Emotion> emotion;
        if (!cols[2].empty()) {
            emotion = parse_emotion(cols[2]);
            if (!emotion) throw fail("unknown emotion tag '" + cols[2] + "'");
        }
        try {
            lex.add(cols[0], polarity, emotion);
        } catch (const ValidationError& e) {
            throw fail(e.what());
        }
    }
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    return Lexicon::from_tsv(read_file(path), path.string());
}

void save_lexicon(const Lexicon& lex, const std::filesystem::path& path) { write_file(path, lex.to_tsv()); }

namespace {
bool is_ascii_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
           (u >= 0x7B && u <= 0x7E);
}
}  // namespace

std::string normalize_word(std::string_view word) {
    std::size_t b = 0, e = word.size();
    while (b < e && is_ascii_punct(word[b])) ++b;
    while (e > b && is_ascii_punct(word[e - 1])) --e;
    std::string out(word.substr(b, e - b));
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

SentimentFeatures extract_features(std::string_view text, const Lexicon& lex) {
    SentimentFeatures f{};
    std::size_t words = 0, matched = 0, positive = 0, negative = 0;
    std::array<std::size_t, kEmotionCount> emotions{};
    double polarity_sum = 0.0;
    for (auto raw : utf8::split_whitespace(text)) {
        const std::string word = normalize_word(raw);
        if (word.empty()) continue;  // pure punctuation is not a word
        ++words;
        const LexiconEntry* entry = lex.find(word);
        if (!entry) continue;
        ++matched;
        polarity_sum += entry->polarity;
        if (entry->polarity > 0.0) ++positive;
        if (entry->polarity < 0.0) ++negative;
        if (entry->emotion) ++emotions[static_cast<std::size_t>(*entry->emotion)];
    }
    if (matched == 0) return f;
    const auto n = static_cast<double>(words);
    f[0] = polarity_sum / static_cast<double>(matched);
    f[1] = static_cast<double>(positive) / n;
    f[2] = static_cast<double>(negative) / n;
    for (std::size_t i = 0; i < kEmotionCount; ++i) f[3 + i] = static_cast<double>(emotions[i]) / n;
    return f;
}

}  // namespace hierclass
