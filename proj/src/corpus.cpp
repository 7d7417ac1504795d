#include "hierclass/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "hierclass/error.hpp"
#include "hierclass/rng.hpp"
#include "hierclass/utf8.hpp"

namespace hierclass {

Dataset::Dataset(std::vector<Record> records) : records_(std::move(records)) {
    std::unordered_set<std::string> seen;
    for (const auto& r : records_) {
        if (seen.insert(r.label).second) labels_.push_back(r.label);
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

DataFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".jsonl" ? DataFormat::jsonl : DataFormat::csv;
}

namespace {

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

Record make_record(std::string text, std::string label, const std::string& source,
                   std::size_t line) {
    if (!utf8::is_valid(text) || !utf8::is_valid(label)) {
        throw IoError(where(source, line) + "invalid UTF-8");
    }
    if (label.empty()) throw IoError(where(source, line) + "empty label");
    return Record{std::move(text), std::move(label)};
}

// RFC-4180 reader. Each row carries the line number it started on.
struct CsvRow {
    std::vector<std::string> fields;
    std::size_t line;
};

std::vector<CsvRow> read_csv_rows(const std::string& s, const std::string& source) {
    std::vector<CsvRow> rows;
    std::size_t i = 0;
    std::size_t line = 1;
    while (i < s.size()) {
        CsvRow row{{}, line};
        std::string field;
        bool end_of_row = false;
        while (!end_of_row) {
            field.clear();
            if (i < s.size() && s[i] == '"') {
                const std::size_t open_line = line;
                ++i;
                bool closed = false;
                while (i < s.size()) {
                    const char c = s[i];
                    if (c == '"') {
                        if (i + 1 < s.size() && s[i + 1] == '"') {
                            field.push_back('"');
                            i += 2;
                        } else {
                            ++i;
                            closed = true;
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        field.push_back(c);
                        ++i;
                    }
                }
                if (!closed) throw IoError(where(source, open_line) + "unterminated quoted field");
                if (i < s.size() && s[i] != ',' && s[i] != '\n' && s[i] != '\r') {
                    throw IoError(where(source, line) + "unexpected character after closing quote");
                }
            } else {
                while (i < s.size() && s[i] != ',' && s[i] != '\n' && s[i] != '\r') {
                    if (s[i] == '"') throw IoError(where(source, line) + "stray quote in unquoted field");
                    field.push_back(s[i]);
                    ++i;
                }
            }
            row.fields.push_back(field);
            if (i >= s.size()) {
                end_of_row = true;
            } else if (s[i] == ',') {
                ++i;
            } else {
                if (s[i] == '\r') ++i;
                if (i < s.size() && s[i] == '\n') ++i;
                ++line;
                end_of_row = true;
            }
        }
        // A bare empty line carries no record.
        if (!(row.fields.size() == 1 && row.fields[0].empty())) rows.push_back(std::move(row));
    }
    return rows;
}

bool needs_quotes(const std::string& f) {
    return f.empty() || f.find_first_of(",\"\r\n") != std::string::npos || f.front() == ' ' ||
           f.back() == ' ';
}

std::string csv_field(const std::string& f) {
    if (!needs_quotes(f)) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

Dataset parse_csv(const std::string& content, const std::string& source) {
    std::string_view body = content;
    if (body.starts_with("\xEF\xBB\xBF")) body.remove_prefix(3);
    const auto rows = read_csv_rows(std::string(body), source);
    if (rows.empty()) throw IoError(source + ": missing CSV header");
    const auto& header = rows.front().fields;
    const auto find_col = [&](const char* name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw IoError(source + ": CSV header lacks '" + name + "' column");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t text_col = find_col("text");
    const std::size_t label_col = find_col("label");

    std::vector<Record> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.size()) {
            throw IoError(where(source, row.line) + "expected " + std::to_string(header.size()) +
                          " fields, found " + std::to_string(row.fields.size()));
        }
        records.push_back(make_record(row.fields[text_col], row.fields[label_col], source, row.line));
    }
    return Dataset(std::move(records));
}

Dataset parse_jsonl(const std::string& content, const std::string& source) {
    std::vector<Record> records;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (!utf8::is_valid(line)) throw IoError(where(source, line_no) + "invalid UTF-8");
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError(where(source, line_no) + "malformed JSON: " + e.what());
        }
        if (!obj.is_object()) throw IoError(where(source, line_no) + "expected a JSON object");
        for (const char* key : {"text", "label"}) {
            if (!obj.contains(key)) throw IoError(where(source, line_no) + "missing field '" + key + "'");
            if (!obj[key].is_string()) {
                throw IoError(where(source, line_no) + "field '" + key + "' is not a string");
            }
        }
        records.push_back(make_record(obj["text"].get<std::string>(), obj["label"].get<std::string>(),
                                      source, line_no));
    }
    return Dataset(std::move(records));
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    const std::string content = read_file(path);
    return format == DataFormat::csv ? parse_csv(content, path.string())
                                     : parse_jsonl(content, path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    return load_dataset(path, format_from_path(path));
}

std::string to_csv(const Dataset& dataset) {
    std::string out = "text,label\n";
    for (const auto& r : dataset.records()) {
        out += csv_field(r.text);
        out += ',';
        out += csv_field(r.label);
        out += '\n';
    }
    return out;
}

std::string to_jsonl(const Dataset& dataset) {
    std::string out;
    for (const auto& r : dataset.records()) {
        nlohmann::ordered_json obj;
        obj["text"] = r.text;
        obj["label"] = r.label;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path, DataFormat format) {
    write_file(path, format == DataFormat::csv ? to_csv(dataset) : to_jsonl(dataset));
}

std::map<std::string, std::size_t> class_distribution(const Dataset& dataset) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : dataset.records()) ++counts[r.label];
    return counts;
}

std::size_t stratified_test_count(std::size_t count, double test_fraction) {
    if (count < 2) throw ValidationError("stratified split needs at least 2 records per label");
    const auto rounded = static_cast<std::size_t>(std::llround(static_cast<double>(count) * test_fraction));
    return std::clamp<std::size_t>(rounded, 1, count - 1);
}

Split stratified_split(const Dataset& dataset, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ValidationError("test_fraction must lie in (0, 1)");
    }
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < dataset.size(); ++i) by_label[dataset.records()[i].label].push_back(i);
    for (const auto& [label, idx] : by_label) {
        if (idx.size() < 2) {
            throw ValidationError("label '" + label + "' has fewer than 2 records; cannot split");
        }
    }

    Rng rng(seed);
    std::vector<bool> in_test(dataset.size(), false);
    // Labels are visited in sorted order so the draw sequence is independent of
    // record order within the file.
    for (auto& [label, idx] : by_label) {
        const std::size_t n_test = stratified_test_count(idx.size(), test_fraction);
        rng.shuffle(std::span<std::size_t>(idx));
        for (std::size_t k = 0; k < n_test; ++k) in_test[idx[k]] = true;
    }

    std::vector<Record> train, test;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (in_test[i] ? test : train).push_back(dataset.records()[i]);
    }
    return Split{Dataset(std::move(train)), Dataset(std::move(test))};
}

}  // namespace hierclass
