#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "wembsim/embedding_table.hpp"
#include "wembsim/error.hpp"
#include "wembsim/stopwords_nltk.hpp"

namespace wembsim {

struct StopwordList {
    std::unordered_set<std::string> words; // all lowercase, non-empty

    bool contains(std::string_view word) const {
        return words.find(std::string(word)) != words.end();
    }

    static StopwordList none() { return {}; }

    static StopwordList nltk_english() {
        StopwordList list;
        list.words.reserve(detail::kNltkEnglishStopwords.size());
        for (auto w : detail::kNltkEnglishStopwords) list.words.emplace(w);
        return list;
    }

    // One word per line, UTF-8, `#` starts a comment line. Entries are
    // lowercased on load.
    static StopwordList from_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw error("cannot open stopword file: " + path.string());
        StopwordList list;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
                line.pop_back();
            std::size_t start = 0;
            while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
            if (start > 0) line.erase(0, start);
            if (line.empty() || line[0] == '#') continue;
            list.words.insert(ascii_lower(line));
        }
        return list;
    }
};

// Raw caption text plus its filtered token sequence.
struct Caption {
    std::string raw;
    std::vector<std::string> tokens;

    bool empty() const { return tokens.empty(); }
};

// Lowercase, replace every character that is not an ASCII letter, digit, or
// apostrophe with a space, split on whitespace. Apostrophes survive inside
// tokens ("man's" stays one token). Multi-byte UTF-8 sequences act as
// separators, so typographic dashes and quotes split like punctuation.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        char c = raw;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
        if (keep) {
            current.push_back(c);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Order-preserving removal of stopwords and, when a table is given, of
// tokens absent from its vocabulary.
inline std::vector<std::string> filter_tokens(std::span<const std::string> tokens,
                                              const StopwordList& stops,
                                              const EmbeddingTable* vocab = nullptr) {
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (const auto& token : tokens) {
        if (stops.contains(token)) continue;
        if (vocab != nullptr && !vocab->contains(token)) continue;
        kept.push_back(token);
    }
    return kept;
}

inline Caption make_caption(std::string_view text, const StopwordList& stops,
                            const EmbeddingTable* vocab = nullptr) {
    Caption caption;
    caption.raw = std::string(text);
    caption.tokens = filter_tokens(tokenize(text), stops, vocab);
    return caption;
}

} // namespace wembsim
