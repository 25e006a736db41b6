#include "simmark/segmentation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "simmark/data_abbreviations.hpp"
#include "simmark/error.hpp"

namespace simmark {
namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Byte length of a closing quote/bracket at `pos`, or 0.
std::size_t closer_length(std::string_view text, std::size_t pos) {
    const char c = text[pos];
    if (c == '"' || c == '\'' || c == ')' || c == ']' || c == '}') return 1;
    // U+201D, U+2019 (E2 80 9D / E2 80 99), U+00BB (C2 BB)
    if (text.substr(pos, 3) == "\xE2\x80\x9D" || text.substr(pos, 3) == "\xE2\x80\x99") return 3;
    if (text.substr(pos, 2) == "\xC2\xBB") return 2;
    return 0;
}

std::size_t codepoints(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](unsigned char c) { return (c & 0xC0) != 0x80; }));
}

// The whitespace-delimited word ending right before `dot`, without opening punctuation.
std::string_view word_before(std::string_view text, std::size_t dot) {
    std::size_t begin = dot;
    while (begin > 0 && !is_space(text[begin - 1])) --begin;
    std::string_view word = text.substr(begin, dot - begin);
    while (!word.empty() && (word.front() == '"' || word.front() == '\'' || word.front() == '(' ||
                             word.front() == '['))
        word.remove_prefix(1);
    return word;
}

struct Span {
    std::size_t begin;
    std::size_t end;
};

void push_trimmed(std::string_view text, std::size_t begin, std::size_t end, std::vector<Span>& out) {
    while (begin < end && is_space(text[begin])) ++begin;
    while (end > begin && is_space(text[end - 1])) --end;
    if (begin < end) out.push_back({begin, end});
}

} // namespace

AbbreviationList::AbbreviationList(const std::vector<std::string>& entries) {
    for (const auto& e : entries) {
        std::string key = lower(e);
        while (!key.empty() && key.back() == '.') key.pop_back();
        if (!key.empty()) entries_.insert(std::move(key));
    }
}

AbbreviationList AbbreviationList::parse(std::string_view content) {
    std::vector<std::string> entries;
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::size_t b = 0, e = line.size();
        while (b < e && is_space(line[b])) ++b;
        while (e > b && is_space(line[e - 1])) --e;
        if (b < e) entries.push_back(line.substr(b, e - b));
    }
    return AbbreviationList(entries);
}

AbbreviationList AbbreviationList::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open abbreviation list " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const AbbreviationList& AbbreviationList::builtin() {
    static const AbbreviationList list = parse(data::kDefaultAbbreviations);
    return list;
}

bool AbbreviationList::contains(std::string_view word) const {
    if (word.empty()) return false;
    return entries_.find(lower(word)) != entries_.end();
}

std::string SentenceSequence::join() const {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out += ' ';
        out += s.text;
    }
    return out;
}

std::vector<std::string> SentenceSequence::texts() const {
    std::vector<std::string> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) out.push_back(s.text);
    return out;
}

SentenceSequence split_sentences(std::string_view text, const AbbreviationList& abbreviations) {
    std::vector<Span> pieces;
    std::size_t start = 0;
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[i];
        if (c == '\n') {
            push_trimmed(text, start, i, pieces);
            start = i + 1;
            continue;
        }
        if (!is_terminal(c)) continue;

        std::size_t j = i + 1;
        while (j < n && is_terminal(text[j])) ++j;
        const bool single_period = c == '.' && j == i + 1;
        while (j < n) {
            const std::size_t len = closer_length(text, j);
            if (len == 0) break;
            j += len;
        }
        if (j < n && !is_space(text[j])) {
            i = j - 1;
            continue;
        }
        if (single_period && abbreviations.contains(word_before(text, i))) continue;
        push_trimmed(text, start, j, pieces);
        start = j;
        i = j - 1;
    }
    push_trimmed(text, start, n, pieces);
    if (pieces.empty()) throw Error(Errc::EmptyText, "text is empty or whitespace-only");

    std::vector<Span> merged;
    for (std::size_t k = 0; k < pieces.size(); ++k) {
        Span span = pieces[k];
        while (codepoints(text.substr(span.begin, span.end - span.begin)) < 2 && k + 1 < pieces.size()) {
            span.end = pieces[++k].end;
        }
        if (codepoints(text.substr(span.begin, span.end - span.begin)) < 2 && !merged.empty()) {
            merged.back().end = span.end;
        } else {
            merged.push_back(span);
        }
    }

    SentenceSequence seq;
    seq.sentences.reserve(merged.size());
    for (std::size_t k = 0; k < merged.size(); ++k) {
        const auto [b, e] = merged[k];
        seq.sentences.push_back(Sentence{k, std::string(text.substr(b, e - b)), b, e});
    }
    return seq;
}

SentenceSequence make_sequence(const std::vector<std::string>& texts, std::size_t prompt_len) {
    SentenceSequence seq;
    seq.prompt_len = prompt_len;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < texts.size(); ++k) {
        seq.sentences.push_back(Sentence{k, texts[k], offset, offset + texts[k].size()});
        offset += texts[k].size() + 1;
    }
    return seq;
}

std::vector<SentencePair> consecutive_pairs(const SentenceSequence& seq) {
    if (seq.size() < 2) throw Error(Errc::TooShort, "need at least two sentences to form a pair");
    const std::size_t first = seq.prompt_len == 0 ? 0 : std::min(seq.prompt_len - 1, seq.size() - 2);
    std::vector<SentencePair> pairs;
    pairs.reserve(seq.size() - 1 - first);
    for (std::size_t i = first; i + 1 < seq.size(); ++i) pairs.push_back({seq[i], seq[i + 1]});
    return pairs;
}

} // namespace simmark
