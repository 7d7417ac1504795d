#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hierclass {

struct Record {
    std::string text;
    std::string label;

    bool operator==(const Record&) const = default;
};

// Records in source-file order plus the distinct labels in order of first
// appearance.
class Dataset {
  public:
    Dataset() = default;
    explicit Dataset(std::vector<Record> records);

    const std::vector<Record>& records() const { return records_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    bool operator==(const Dataset&) const = default;

  private:
    std::vector<Record> records_;
    std::vector<std::string> labels_;
};

enum class DataFormat { csv, jsonl };

// Picks jsonl for a ".jsonl" extension and csv otherwise.
DataFormat format_from_path(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, DataFormat format);
Dataset load_dataset(const std::filesystem::path& path);

// Parsers over in-memory content; `source` only labels error messages.
Dataset parse_csv(const std::string& content, const std::string& source = "<memory>");
Dataset parse_jsonl(const std::string& content, const std::string& source = "<memory>");

std::string to_csv(const Dataset& dataset);
std::string to_jsonl(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DataFormat format);

std::map<std::string, std::size_t> class_distribution(const Dataset& dataset);

struct Split {
    Dataset train;
    Dataset test;
};

// Number of test records for a label with `count` records:
// round(count * fraction) clamped to [1, count - 1].
std::size_t stratified_test_count(std::size_t count, double test_fraction);

// Per-label seeded selection of test records; both halves keep source order.
Split stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace hierclass
