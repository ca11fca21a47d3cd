#include <catch_amalgamated.hpp>

#include <cstring>
#include <random>

#include "test_util.hpp"
#include "wembsim/embedding_table.hpp"

using namespace wembsim;
using testutil::TempDir;

namespace {

std::string word2vec_bytes(const std::vector<std::pair<std::string, std::vector<float>>>& entries,
                           long long dim) {
    std::string bytes = std::to_string(entries.size()) + " " + std::to_string(dim) + "\n";
    for (const auto& [word, vec] : entries) {
        bytes += word;
        bytes += ' ';
        for (float f : vec) {
            char raw[4];
            std::memcpy(raw, &f, 4);
            bytes.append(raw, 4); // host is little-endian in CI; asserted below
        }
        bytes += '\n';
    }
    return bytes;
}

} // namespace

TEST_CASE("text vectors load with inferred dimensionality") {
    TempDir dir;
    auto table = load_text_vectors(dir.write("t.txt", "a 1.0 0.0\nb 0.0 1.0\n"));
    REQUIRE(table.dim() == 2);
    REQUIRE(table.size() == 2);
    REQUIRE(table.row(0)[0] == 1.0);
    REQUIRE(table.row(1)[1] == 1.0);
    REQUIRE(table.name() == "t");
}

TEST_CASE("count/dim first line is detected as a header and skipped") {
    TempDir dir;
    auto table = load_text_vectors(dir.write("h.txt", "2 3\nx 1 2 3\ny 4 5 6\n"));
    REQUIRE(table.dim() == 3);
    REQUIRE(table.size() == 2);
    REQUIRE(table.lookup("y").has_value());
}

TEST_CASE("dimension mismatch names the offending line") {
    TempDir dir;
    auto path = dir.write("bad.txt", "a 1.0\nb 1.0 2.0\n");
    REQUIRE_THROWS_MATCHES(load_text_vectors(path), parse_error,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("line 2")));
}

TEST_CASE("non-finite and malformed components are rejected") {
    TempDir dir;
    REQUIRE_THROWS_AS(load_text_vectors(dir.write("inf.txt", "a inf 1.0\n")), parse_error);
    REQUIRE_THROWS_AS(load_text_vectors(dir.write("nan.txt", "a nan 1.0\n")), parse_error);
    REQUIRE_THROWS_AS(load_text_vectors(dir.write("junk.txt", "a 1.0 x\n")), parse_error);
    REQUIRE_THROWS_AS(load_text_vectors(dir.write("huge.txt", "a 1e999 0.0\n")), parse_error);
}

TEST_CASE("empty embedding file is an error") {
    TempDir dir;
    REQUIRE_THROWS_AS(load_text_vectors(dir.write("empty.txt", "")), parse_error);
    REQUIRE_THROWS_AS(load_text_vectors(dir.write("blank.txt", "\n\n")), parse_error);
}

TEST_CASE("expected_dim overrides inference") {
    TempDir dir;
    auto path = dir.write("d.txt", "a 1 2 3\n");
    REQUIRE(load_text_vectors(path, 3).dim() == 3);
    REQUIRE_THROWS_AS(load_text_vectors(path, 4), parse_error);
}

TEST_CASE("duplicate words keep the first row and are counted") {
    TempDir dir;
    auto table = load_text_vectors(dir.write("dup.txt", "a 1 0\nb 0 1\na 9 9\n"));
    REQUIRE(table.size() == 2);
    REQUIRE(table.duplicates_dropped() == 1);
    REQUIRE((*table.lookup("a"))[0] == 1.0);
}

TEST_CASE("word2vec binary round-trips a synthetic fixture bit-exactly") {
    const float probe = 1.0f;
    std::uint32_t bits;
    std::memcpy(&bits, &probe, 4);
    REQUIRE(bits == 0x3f800000u); // little-endian float layout assumed by the fixture writer

    TempDir dir;
    const std::vector<std::pair<std::string, std::vector<float>>> entries = {
        {"horse", {0.25f, -1.5f, 3.0f}},
        {"dog", {1e-3f, 42.0f, -0.0f}},
    };
    auto path = dir.write("vec.bin", word2vec_bytes(entries, 3));
    auto table = load_word2vec_binary(path);
    REQUIRE(table.size() == 2);
    REQUIRE(table.dim() == 3);
    for (const auto& [word, vec] : entries) {
        auto row = table.lookup(word);
        REQUIRE(row.has_value());
        for (std::size_t i = 0; i < vec.size(); ++i) {
            REQUIRE((*row)[i] == static_cast<double>(vec[i]));
        }
    }
}

TEST_CASE("word2vec header with non-positive count or dim is rejected") {
    TempDir dir;
    REQUIRE_THROWS_AS(load_word2vec_binary(dir.write("z.bin", "0 300\n")), parse_error);
    REQUIRE_THROWS_AS(load_word2vec_binary(dir.write("n.bin", "2 -3\n")), parse_error);
}

TEST_CASE("word2vec file cut mid-vector reports a truncation error") {
    TempDir dir;
    std::string bytes = word2vec_bytes({{"a", {1.f, 2.f, 3.f}}, {"b", {4.f, 5.f, 6.f}}}, 3);
    bytes.resize(bytes.size() - 7); // cut into b's vector
    auto path = dir.write("trunc.bin", bytes);
    REQUIRE_THROWS_MATCHES(load_word2vec_binary(path), parse_error,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("truncated")));
}

TEST_CASE("lookup falls back from exact match to lowercase") {
    TempDir dir;
    auto table = load_text_vectors(dir.write("l.txt", "horse 1 0\nParis 0 1\n"));
    REQUIRE(table.lookup("horse").has_value());
    REQUIRE(table.lookup("Horse").has_value());
    REQUIRE((*table.lookup("Horse"))[0] == 1.0);
    REQUIRE(table.lookup("Paris").has_value());
    REQUIRE_FALSE(table.lookup("paris").has_value()); // no uppercase fallback
    REQUIRE_FALSE(table.lookup("zqxv").has_value());
}

TEST_CASE("coverage counts in-vocab tokens and preserves oov order") {
    TempDir dir;
    auto table = load_text_vectors(dir.write("c.txt", "a 1 0\n"));

    const std::vector<std::string> tokens = {"a", "zz", "a"};
    auto stats = coverage(table, tokens);
    REQUIRE(stats.total_tokens == 3);
    REQUIRE(stats.in_vocab == 2);
    REQUIRE(stats.oov_tokens == std::vector<std::string>{"zz"});

    REQUIRE(coverage(table, std::vector<std::string>{}).total_tokens == 0);
    REQUIRE(coverage(table, std::vector<std::string>{}).in_vocab == 0);

    const std::vector<std::string> oov = {"x", "y"};
    auto none = coverage(table, oov);
    REQUIRE(none.in_vocab == 0);
    REQUIRE(none.oov_tokens.size() == 2);
    REQUIRE(none.in_vocab + none.oov_tokens.size() == none.total_tokens);
}

TEST_CASE("save/load round-trip reproduces the table exactly") {
    std::mt19937 rng(7);
    auto table = testutil::random_table(rng, 20, 5, -10.0, 10.0);

    TempDir dir;
    auto path = dir.path() / "roundtrip.txt";
    save_text_vectors(table, path);
    auto reloaded = load_text_vectors(path);

    REQUIRE(reloaded.dim() == table.dim());
    REQUIRE(reloaded.size() == table.size());
    for (std::size_t r = 0; r < table.size(); ++r) {
        REQUIRE(reloaded.words()[r] == table.words()[r]);
        for (std::size_t c = 0; c < table.dim(); ++c) {
            REQUIRE(reloaded.row(r)[c] == table.row(r)[c]); // bit-exact
        }
    }
}

TEST_CASE("every vocabulary word resolves through lookup") {
    std::mt19937 rng(11);
    auto table = testutil::random_table(rng, 50, 4);
    for (const auto& word : table.words()) {
        REQUIRE(table.lookup(word).has_value());
    }
}

TEST_CASE("text and binary loads of the same table agree within 1e-6") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<float> dist(-5.0f, 5.0f);
    std::vector<std::pair<std::string, std::vector<float>>> entries;
    for (int w = 0; w < 12; ++w) {
        std::vector<float> vec(6);
        for (auto& v : vec) v = dist(rng);
        entries.emplace_back("w" + std::to_string(w), vec);
    }

    TempDir dir;
    std::string text;
    char buf[64];
    for (const auto& [word, vec] : entries) {
        text += word;
        for (float f : vec) {
            std::snprintf(buf, sizeof(buf), " %.9g", f);
            text += buf;
        }
        text += '\n';
    }
    auto text_table = load_text_vectors(dir.write("t.txt", text));
    auto bin_table = load_word2vec_binary(dir.write("t.bin", word2vec_bytes(entries, 6)));

    REQUIRE(text_table.size() == bin_table.size());
    REQUIRE(text_table.dim() == bin_table.dim());
    for (std::size_t r = 0; r < text_table.size(); ++r) {
        auto bin_row = bin_table.lookup(text_table.words()[r]);
        REQUIRE(bin_row.has_value());
        for (std::size_t c = 0; c < text_table.dim(); ++c) {
            REQUIRE(std::fabs(text_table.row(r)[c] - (*bin_row)[c]) < 1e-6);
        }
    }
}

TEST_CASE("word2vec words may be preceded by newlines") {
    TempDir dir;
    std::string bytes = "2 1\n";
    const float one = 1.0f, two = 2.0f;
    char raw[4];
    bytes += "a ";
    std::memcpy(raw, &one, 4);
    bytes.append(raw, 4);
    bytes += "\nb ";
    std::memcpy(raw, &two, 4);
    bytes.append(raw, 4);
    auto table = load_word2vec_binary(dir.write("nl.bin", bytes));
    REQUIRE(table.size() == 2);
    REQUIRE((*table.lookup("b"))[0] == 2.0);
}
