#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "wembsim/embedding_table.hpp"

namespace testutil {

// Unique scratch directory per test process, removed on destruction.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0; attempt < 1000; ++attempt) {
            auto candidate = base / ("wembsim_test_" + std::to_string(std::rand()) + "_" +
                                     std::to_string(attempt));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

    std::filesystem::path write(const std::string& name, const std::string& contents) const {
        auto file = path_ / name;
        std::ofstream out(file, std::ios::binary);
        out << contents;
        return file;
    }

private:
    std::filesystem::path path_;
};

// Random embedding table over single-letter-ish words w0..w{vocab-1}.
inline wembsim::EmbeddingTable random_table(std::mt19937& rng, std::size_t vocab, std::size_t dim,
                                            double lo = -1.0, double hi = 1.0) {
    wembsim::EmbeddingTable table("random", dim);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> row(dim);
    for (std::size_t w = 0; w < vocab; ++w) {
        for (auto& v : row) v = dist(rng);
        table.insert("w" + std::to_string(w), row);
    }
    return table;
}

inline std::vector<std::string> random_tokens(std::mt19937& rng, std::size_t vocab,
                                              std::size_t min_len, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len_dist(min_len, max_len);
    std::uniform_int_distribution<std::size_t> word_dist(0, vocab - 1);
    std::vector<std::string> tokens(len_dist(rng));
    for (auto& token : tokens) token = "w" + std::to_string(word_dist(rng));
    return tokens;
}

} // namespace testutil
