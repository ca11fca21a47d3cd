#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wembsim/error.hpp"

namespace wembsim {

inline std::string ascii_lower(std::string_view word) {
    std::string out(word);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

struct CoverageStats {
    std::size_t total_tokens = 0;
    std::size_t in_vocab = 0;
    std::vector<std::string> oov_tokens; // input order, duplicates kept
};

// Vocabulary-to-row map over a dense row-major matrix of word vectors.
// Immutable after loading; safe to share across concurrent readers.
class EmbeddingTable {
public:
    EmbeddingTable(std::string name, std::size_t dim) : name_(std::move(name)), dim_(dim) {}

    const std::string& name() const { return name_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return words_.size(); }

    // Number of duplicate words dropped while loading (first occurrence wins).
    std::size_t duplicates_dropped() const { return duplicates_dropped_; }

    const std::vector<std::string>& words() const { return words_; }
    const std::unordered_map<std::string, std::size_t>& vocab() const { return vocab_; }

    std::span<const double> row(std::size_t i) const {
        return {matrix_.data() + i * dim_, dim_};
    }

    // Exact match first, then the ASCII-lowercase form; absence is a value.
    std::optional<std::span<const double>> lookup(std::string_view word) const {
        if (auto it = vocab_.find(std::string(word)); it != vocab_.end()) return row(it->second);
        std::string lower = ascii_lower(word);
        if (lower != word) {
            if (auto it = vocab_.find(lower); it != vocab_.end()) return row(it->second);
        }
        return std::nullopt;
    }

    bool contains(std::string_view word) const { return lookup(word).has_value(); }

    // Returns false (and drops the row) when the word is already present.
    bool insert(std::string word, std::span<const double> values) {
        if (values.size() != dim_) throw error("insert: vector has wrong dimensionality");
        auto [it, fresh] = vocab_.try_emplace(std::move(word), words_.size());
        if (!fresh) {
            ++duplicates_dropped_;
            return false;
        }
        words_.push_back(it->first);
        matrix_.insert(matrix_.end(), values.begin(), values.end());
        return true;
    }

private:
    std::string name_;
    std::size_t dim_;
    std::vector<std::string> words_;                      // row index -> word
    std::unordered_map<std::string, std::size_t> vocab_;  // word -> row index
    std::vector<double> matrix_;                          // size() x dim(), row-major
    std::size_t duplicates_dropped_ = 0;
};

inline CoverageStats coverage(const EmbeddingTable& table, std::span<const std::string> tokens) {
    CoverageStats stats;
    stats.total_tokens = tokens.size();
    for (const auto& token : tokens) {
        if (table.contains(token)) {
            ++stats.in_vocab;
        } else {
            stats.oov_tokens.push_back(token);
        }
    }
    return stats;
}

namespace detail {

inline double parse_component(std::string_view text, std::size_t line_no) {
    double value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) {
        throw parse_error("non-finite component at line " + std::to_string(line_no));
    }
    if (ec != std::errc{} || ptr != last) {
        throw parse_error("malformed component '" + std::string(text) + "' at line " +
                          std::to_string(line_no));
    }
    if (!std::isfinite(value)) {
        throw parse_error("non-finite component at line " + std::to_string(line_no));
    }
    return value;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

} // namespace detail

// GloVe-style text vectors: `word c1 c2 ... cd`, one entry per line.
// A first line of exactly two integer tokens is treated as a FastText-style
// `count dim` header and skipped. Dimensionality comes from the first data
// line unless expected_dim is given. Duplicate words: first occurrence wins,
// later ones are dropped and counted.
inline EmbeddingTable load_text_vectors(const std::filesystem::path& path,
                                        std::optional<std::size_t> expected_dim = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open embedding file: " + path.string());

    EmbeddingTable table(path.stem().string(), expected_dim.value_or(0));
    std::optional<std::size_t> dim = expected_dim;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = detail::split_ws(line);
        if (fields.empty()) continue;

        if (first_content_line) {
            first_content_line = false;
            if (fields.size() == 2 && detail::all_digits(fields[0]) && detail::all_digits(fields[1])) {
                continue; // count/dim header
            }
        }

        if (fields.size() < 2) {
            throw parse_error("expected `word c1 ... cd` at line " + std::to_string(line_no));
        }
        const std::size_t d = fields.size() - 1;
        if (!dim) {
            dim = d;
            table = EmbeddingTable(path.stem().string(), d);
        } else if (d != *dim) {
            throw parse_error("dimension mismatch at line " + std::to_string(line_no) +
                              ": expected " + std::to_string(*dim) + " components, got " +
                              std::to_string(d));
        }
        values.clear();
        values.reserve(d);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            values.push_back(detail::parse_component(fields[i], line_no));
        }
        table.insert(std::string(fields[0]), values);
    }

    if (table.size() == 0) throw parse_error("empty embedding file: " + path.string());
    return table;
}

// word2vec binary layout: ASCII `<count> <dim>\n` header, then repeated
// `<word><space><dim x float32 little-endian>`. Words are read until a single
// space byte; a leading '\n' before a word is skipped (de-facto writer quirk).
inline EmbeddingTable load_word2vec_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open embedding file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const std::size_t header_end = bytes.find('\n');
    if (header_end == std::string::npos) throw parse_error("missing word2vec header: " + path.string());
    auto fields = detail::split_ws(std::string_view(bytes).substr(0, header_end));
    if (fields.size() != 2) throw parse_error("malformed word2vec header: " + path.string());

    long long count = 0, dim = 0;
    auto parse_ll = [&](std::string_view s, long long& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };
    if (!parse_ll(fields[0], count) || !parse_ll(fields[1], dim)) {
        throw parse_error("malformed word2vec header: " + path.string());
    }
    if (count <= 0 || dim <= 0) {
        throw parse_error("word2vec header must have positive count and dim, got " +
                          std::to_string(count) + " " + std::to_string(dim));
    }

    EmbeddingTable table(path.stem().string(), static_cast<std::size_t>(dim));
    std::size_t pos = header_end + 1;
    std::vector<double> values(static_cast<std::size_t>(dim));

    for (long long entry = 0; entry < count; ++entry) {
        while (pos < bytes.size() && bytes[pos] == '\n') ++pos;
        const std::size_t word_start = pos;
        while (pos < bytes.size() && bytes[pos] != ' ') ++pos;
        if (pos >= bytes.size()) {
            throw parse_error("truncated word2vec file: expected at least " +
                              std::to_string(pos + 1 + values.size() * 4) + " bytes, file has " +
                              std::to_string(bytes.size()));
        }
        std::string word = bytes.substr(word_start, pos - word_start);
        ++pos; // the single space separator

        const std::size_t vec_bytes = static_cast<std::size_t>(dim) * 4;
        if (pos + vec_bytes > bytes.size()) {
            throw parse_error("truncated word2vec file: expected at least " +
                              std::to_string(pos + vec_bytes) + " bytes, file has " +
                              std::to_string(bytes.size()));
        }
        for (std::size_t i = 0; i < static_cast<std::size_t>(dim); ++i) {
            const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * 4);
            const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                                    (static_cast<std::uint32_t>(b[1]) << 8) |
                                    (static_cast<std::uint32_t>(b[2]) << 16) |
                                    (static_cast<std::uint32_t>(b[3]) << 24);
            const float f = std::bit_cast<float>(u);
            if (!std::isfinite(f)) {
                throw parse_error("non-finite component in entry '" + word + "'");
            }
            values[i] = static_cast<double>(f);
        }
        pos += vec_bytes;
        table.insert(std::move(word), values);
    }

    return table;
}

// Text writer used for archival and the load/save round-trip guarantee:
// 17 significant digits reproduce every double exactly.
inline void save_text_vectors(const EmbeddingTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write embedding file: " + path.string());
    char buf[64];
    for (std::size_t r = 0; r < table.size(); ++r) {
        out << table.words()[r];
        for (double v : table.row(r)) {
            std::snprintf(buf, sizeof(buf), " %.17g", v);
            out << buf;
        }
        out << '\n';
    }
}

} // namespace wembsim
