#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace hierclass {

// Ekman's six basic emotions, in feature-vector order.
enum class Emotion { anger, fear, sadness, joy, surprise, disgust };

inline constexpr std::size_t kEmotionCount = 6;
inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "fear", "sadness", "joy", "surprise", "disgust"};

std::string_view to_string(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view name);

struct LexiconEntry {
    double polarity = 0.0;  // [-1, 1]
    std::optional<Emotion> emotion;

    bool operator==(const LexiconEntry&) const = default;
};

class Lexicon {
  public:
    Lexicon() = default;

    // Validates word (non-empty, already lower-case, unique) and polarity range.
    void add(std::string word, double polarity, std::optional<Emotion> emotion = std::nullopt);
    const LexiconEntry* find(std::string_view word) const;

    std::size_t size() const { return entries_.size(); }
    const std::map<std::string, LexiconEntry, std::less<>>& entries() const { return entries_; }

    std::string to_tsv() const;
    static Lexicon from_tsv(const std::string& content, const std::string& source = "<memory>");

    bool operator==(const Lexicon&) const = default;

  private:
    std::map<std::string, LexiconEntry, std::less<>> entries_;
};

Lexicon load_lexicon(const std::filesystem::path& path);
void save_lexicon(const Lexicon& lex, const std::filesystem::path& path);

inline constexpr std::size_t kSentimentDim = 9;

// [mean polarity of matched words, positive fraction, negative fraction,
//  anger, fear, sadness, joy, surprise, disgust fractions]
using SentimentFeatures = std::array<double, kSentimentDim>;

// Lower-cases ASCII letters and strips leading/trailing ASCII punctuation.
std::string normalize_word(std::string_view word);

SentimentFeatures extract_features(std::string_view text, const Lexicon& lex);

}  // namespace hierclass
