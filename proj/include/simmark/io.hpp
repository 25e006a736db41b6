#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace simmark::io {

/// Writes via a sibling temp file and rename, so readers never see partial output.
void write_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& value);

/// One JSON object per non-empty line.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records);

/// Corpus record {"id", "text", optional "label"}.
struct TextRecord {
    std::string id;
    std::string text;
    std::optional<std::string> label;
};

std::vector<TextRecord> read_corpus(const std::string& path);

} // namespace simmark::io
