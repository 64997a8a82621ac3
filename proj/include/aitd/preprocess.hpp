#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace aitd {

struct TokenSequence {
    std::string doc_id;
    std::vector<std::string> tokens;
    /// Token counts at which a sentence ends; strictly increasing, last <= size.
    std::vector<std::size_t> sentence_boundaries;

    bool operator==(const TokenSequence&) const = default;
};

using StopwordSet = std::set<std::string>;

struct PreprocessConfig {
    bool lowercase = true;
    bool strip_punct_tokens = true;
    bool remove_stopwords = false;
    bool stem = false;
    /// Defaults to the bundled English list. Entries are normalized with
    /// `normalized_stopwords` before use.
    StopwordSet stopword_list = default_stopwords();

    static const StopwordSet& default_stopwords();

    bool operator==(const PreprocessConfig&) const = default;
};

/// NFC, simple (locale-independent) lowercasing when `lowercase` is set, and
/// whitespace runs collapsed to one ASCII space with the ends trimmed.
/// Invalid UTF-8 sequences are replaced with U+FFFD.
std::string normalize(std::string_view text, bool lowercase = true);

/// Word rule: a maximal run of Unicode letters and decimal digits (combining
/// marks continue a word), where an apostrophe (U+0027 or U+2019) between two
/// letters stays inside the word. Any other run of non-space characters is a
/// punctuation token, kept or dropped per `strip_punct_tokens`. A punctuation
/// run containing '.', '!' or '?' ends a sentence.
TokenSequence tokenize(std::string_view normalized_text, const PreprocessConfig& config,
                       std::string doc_id = {});

TokenSequence remove_stopwords(TokenSequence seq, const StopwordSet& stopwords);

/// Porter (1980) stemmer for one lowercase token. Tokens of length <= 2 and
/// tokens containing anything other than ASCII a-z are returned unchanged.
std::string porter_stem(std::string_view word);

TokenSequence stem(TokenSequence seq);

/// The config's stopword list with every entry normalized under the config.
StopwordSet normalized_stopwords(const PreprocessConfig& config);

/// normalize -> tokenize -> remove stopwords (if enabled) -> stem (if enabled).
TokenSequence preprocess(std::string_view text, const PreprocessConfig& config,
                         std::string doc_id = {});

/// Stopword file: one token per line, UTF-8, '#'-prefixed lines and blank
/// lines ignored.
StopwordSet parse_stopwords(std::string_view content);
StopwordSet load_stopwords(const std::filesystem::path& path);

/// Order-independent hash of a stopword set (FNV-1a over sorted entries).
std::uint64_t stopword_hash(const StopwordSet& stopwords);

/// Unicode helpers shared with the feature extractors.
std::size_t codepoint_count(std::string_view utf8);
bool is_word_token(std::string_view token);
bool contains_digit(std::string_view token);
/// (uppercase letters, letters) in raw text.
std::pair<std::size_t, std::size_t> count_upper_letters(std::string_view utf8);

} // namespace aitd
