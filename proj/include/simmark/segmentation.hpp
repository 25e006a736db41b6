#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simmark {

struct Sentence {
    std::size_t index = 0;
    std::string text;
    /// [begin, end) byte offsets into the source text, whitespace excluded.
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Sentence&) const = default;
};

struct SentenceSequence {
    std::vector<Sentence> sentences;
    /// Leading sentences treated as the prompt. Only the last prompt sentence
    /// takes part in scoring, as the anchor of the first pair.
    std::size_t prompt_len = 1;

    std::size_t size() const noexcept { return sentences.size(); }
    bool empty() const noexcept { return sentences.empty(); }
    const Sentence& operator[](std::size_t i) const { return sentences[i]; }

    /// Sentence texts joined with single spaces.
    std::string join() const;
    std::vector<std::string> texts() const;
};

/// Lower-cased abbreviations (no trailing period) that never end a sentence.
class AbbreviationList {
public:
    AbbreviationList() = default;
    explicit AbbreviationList(const std::vector<std::string>& entries);

    /// Parses the one-per-line format; '#' starts a comment.
    static AbbreviationList parse(std::string_view content);
    static AbbreviationList load(const std::string& path);
    /// The list shipped in data/abbreviations.txt.
    static const AbbreviationList& builtin();

    bool contains(std::string_view word) const;
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::set<std::string, std::less<>> entries_;
};

/// Rule-based splitter: terminal marks (. ! ?) followed by optional closing
/// quotes or brackets and then whitespace, any newline, or end of text.
/// Fragments shorter than two characters are merged into the next sentence.
/// Throws Error{EmptyText} on empty or whitespace-only input.
SentenceSequence split_sentences(std::string_view text,
                                 const AbbreviationList& abbreviations = AbbreviationList::builtin());

/// Builds a sequence from already-separated sentences (spans refer to the joined text).
SentenceSequence make_sequence(const std::vector<std::string>& texts, std::size_t prompt_len = 1);

struct SentencePair {
    Sentence anchor;
    Sentence target;
};

/// (X_i, X_{i+1}) for every adjacent pair; throws Error{TooShort} below two sentences.
std::vector<SentencePair> consecutive_pairs(const SentenceSequence& seq);

} // namespace simmark
