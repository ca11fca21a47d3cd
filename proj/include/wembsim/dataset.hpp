#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wembsim/error.hpp"

namespace wembsim::harness {

struct ScoringInstance {
    std::string image_id;
    std::string candidate;
    std::vector<std::string> references; // non-empty
};

struct SystemEntry {
    std::string system_id;
    std::vector<ScoringInstance> instances; // non-empty
    std::optional<double> m1;
    std::optional<double> m2;
};

struct PairwiseInstance {
    std::string caption_a;
    std::string caption_b;
    std::vector<std::string> reference_pool;
    char human_prefers = 'A'; // 'A' or 'B'
    std::string category;     // HHC or HHI
};

struct DistractionInstance {
    std::string correct;
    std::string distractor;
    std::vector<std::string> references;
    std::string category; // SP, SS, JP, JS
};

namespace detail {

using nlohmann::json;

inline json parse_line(const std::string& line, std::size_t line_no) {
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
        throw parse_error("invalid JSON object at line " + std::to_string(line_no));
    }
    return record;
}

inline std::string require_string(const json& record, const char* field, std::size_t line_no) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_string()) {
        throw parse_error(std::string("missing string field '") + field + "' at line " +
                          std::to_string(line_no));
    }
    return it->get<std::string>();
}

inline std::vector<std::string> require_string_array(const json& record, const char* field,
                                                     std::size_t line_no) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_array()) {
        throw parse_error(std::string("missing array field '") + field + "' at line " +
                          std::to_string(line_no));
    }
    std::vector<std::string> out;
    out.reserve(it->size());
    for (const auto& element : *it) {
        if (!element.is_string()) {
            throw parse_error(std::string("non-string entry in '") + field + "' at line " +
                              std::to_string(line_no));
        }
        out.push_back(element.get<std::string>());
    }
    return out;
}

template <typename Record, typename ParseFn>
std::vector<Record> read_jsonl(const std::filesystem::path& path, ParseFn parse,
                               std::size_t* skipped = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open input file: " + path.string());
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (skipped != nullptr) {
            try {
                records.push_back(parse(parse_line(line, line_no), line_no));
            } catch (const parse_error&) {
                ++*skipped;
            }
        } else {
            records.push_back(parse(parse_line(line, line_no), line_no));
        }
    }
    return records;
}

inline ScoringInstance parse_scoring_instance(const json& record, std::size_t line_no) {
    ScoringInstance instance;
    instance.image_id = require_string(record, "image_id", line_no);
    instance.candidate = require_string(record, "candidate", line_no);
    instance.references = require_string_array(record, "references", line_no);
    if (instance.references.empty()) {
        throw parse_error("empty references at line " + std::to_string(line_no));
    }
    return instance;
}

} // namespace detail

// One ScoringInstance object per line. With skipped != nullptr, malformed
// rows are skipped and tallied instead of aborting the read.
inline std::vector<ScoringInstance> read_scoring_instances(const std::filesystem::path& path,
                                                           std::size_t* skipped = nullptr) {
    return detail::read_jsonl<ScoringInstance>(path, detail::parse_scoring_instance, skipped);
}

inline std::vector<SystemEntry> read_system_entries(const std::filesystem::path& path) {
    return detail::read_jsonl<SystemEntry>(path, [](const detail::json& record, std::size_t line_no) {
        SystemEntry entry;
        entry.system_id = detail::require_string(record, "system_id", line_no);
        auto it = record.find("instances");
        if (it == record.end() || !it->is_array() || it->empty()) {
            throw parse_error("missing non-empty 'instances' at line " + std::to_string(line_no));
        }
        for (const auto& element : *it) {
            if (!element.is_object()) {
                throw parse_error("non-object instance at line " + std::to_string(line_no));
            }
            entry.instances.push_back(detail::parse_scoring_instance(element, line_no));
        }
        if (auto scores = record.find("human_scores"); scores != record.end() && scores->is_object()) {
            if (auto m1 = scores->find("M1"); m1 != scores->end() && m1->is_number()) {
                entry.m1 = m1->get<double>();
            }
            if (auto m2 = scores->find("M2"); m2 != scores->end() && m2->is_number()) {
                entry.m2 = m2->get<double>();
            }
        }
        return entry;
    });
}

inline std::vector<PairwiseInstance> read_pairwise_instances(const std::filesystem::path& path) {
    return detail::read_jsonl<PairwiseInstance>(path, [](const detail::json& record, std::size_t line_no) {
        PairwiseInstance instance;
        instance.caption_a = detail::require_string(record, "caption_a", line_no);
        instance.caption_b = detail::require_string(record, "caption_b", line_no);
        instance.reference_pool = detail::require_string_array(record, "reference_pool", line_no);
        const std::string prefers = detail::require_string(record, "human_prefers", line_no);
        if (prefers != "A" && prefers != "B") {
            throw parse_error("human_prefers must be 'A' or 'B' at line " + std::to_string(line_no));
        }
        instance.human_prefers = prefers[0];
        instance.category = detail::require_string(record, "category", line_no);
        if (instance.category != "HHC" && instance.category != "HHI") {
            throw parse_error("unknown pairwise category '" + instance.category + "' at line " +
                              std::to_string(line_no));
        }
        return instance;
    });
}

inline std::vector<DistractionInstance> read_distraction_instances(const std::filesystem::path& path) {
    return detail::read_jsonl<DistractionInstance>(path, [](const detail::json& record, std::size_t line_no) {
        DistractionInstance instance;
        instance.correct = detail::require_string(record, "correct", line_no);
        instance.distractor = detail::require_string(record, "distractor", line_no);
        instance.references = detail::require_string_array(record, "references", line_no);
        instance.category = detail::require_string(record, "category", line_no);
        if (instance.category != "SP" && instance.category != "SS" && instance.category != "JP" &&
            instance.category != "JS") {
            throw parse_error("unknown category tag '" + instance.category + "' at line " +
                              std::to_string(line_no));
        }
        if (instance.correct == instance.distractor) {
            throw parse_error("correct equals distractor at line " + std::to_string(line_no));
        }
        return instance;
    });
}

} // namespace wembsim::harness
