#include "simmark/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "simmark/error.hpp"

namespace simmark::io {

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(Errc::IoError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(Errc::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json read_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, path + ": " + e.what());
    }
}

void write_json(const std::string& path, const nlohmann::json& value) {
    write_atomic(path, value.dump(2) + "\n");
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<nlohmann::json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, fmt::format("{}:{}: {}", path, lineno, e.what()));
        }
    }
    return out;
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& records) {
    std::string content;
    for (const auto& r : records) {
        content += r.dump();
        content += '\n';
    }
    write_atomic(path, content);
}

std::vector<TextRecord> read_corpus(const std::string& path) {
    std::vector<TextRecord> out;
    std::size_t n = 0;
    for (const auto& rec : read_jsonl(path)) {
        ++n;
        if (!rec.is_object() || !rec.contains("text") || !rec["text"].is_string())
            throw Error(Errc::ParseError, fmt::format("{}: record {} needs a string \"text\"", path, n));
        TextRecord r;
        r.id = rec.contains("id") ? (rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump())
                                  : std::to_string(n - 1);
        r.text = rec["text"].get<std::string>();
        if (rec.contains("label") && rec["label"].is_string()) r.label = rec["label"].get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace simmark::io
