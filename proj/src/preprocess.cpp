#include "aitd/preprocess.hpp"

#include "aitd/hash.hpp"
#include "aitd/util.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace aitd {

extern const char kDefaultStopwordData[];

namespace {

const icu::Normalizer2& nfc() {
    static const icu::Normalizer2* instance = [] {
        UErrorCode status = U_ZERO_ERROR;
        const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
        if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
        return n;
    }();
    return *instance;
}

icu::UnicodeString to_nfc(const icu::UnicodeString& s) {
    UErrorCode status = U_ZERO_ERROR;
    auto out = nfc().normalize(s, status);
    if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
    return out;
}

// Decodes one code point at `i`, advancing it. Malformed input yields U+FFFD.
UChar32 next_cp(std::string_view s, std::size_t& i) {
    UChar32 c;
    int32_t pos = static_cast<int32_t>(i);
    U8_NEXT(s.data(), pos, static_cast<int32_t>(s.size()), c);
    i = static_cast<std::size_t>(pos);
    return c < 0 ? 0xFFFD : c;
}

bool is_mark(UChar32 c) { return (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0; }
bool is_word_start(UChar32 c) { return u_isalnum(c) != 0; }
bool is_word_cont(UChar32 c) { return u_isalnum(c) != 0 || is_mark(c); }
bool is_apostrophe(UChar32 c) { return c == 0x27 || c == 0x2019; }
bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }
bool is_sentence_end(UChar32 c) { return c == '.' || c == '!' || c == '?'; }

} // namespace

const StopwordSet& PreprocessConfig::default_stopwords() {
    static const StopwordSet list = parse_stopwords(kDefaultStopwordData);
    return list;
}

std::string normalize(std::string_view text, bool lowercase) {
    auto us = to_nfc(icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(),
                                                                   static_cast<int32_t>(text.size()))));
    if (lowercase) {
        icu::UnicodeString lowered;
        for (int32_t i = 0; i < us.length();) {
            const UChar32 c = us.char32At(i);
            lowered.append(u_tolower(c));
            i += U16_LENGTH(c);
        }
        us = to_nfc(lowered);
    }
    std::string utf8;
    us.toUTF8String(utf8);

    std::string out;
    out.reserve(utf8.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < utf8.size();) {
        const std::size_t start = i;
        const UChar32 c = next_cp(utf8, i);
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.append(utf8, start, i - start);
    }
    return out;
}

TokenSequence tokenize(std::string_view text, const PreprocessConfig& config, std::string doc_id) {
    TokenSequence seq;
    seq.doc_id = std::move(doc_id);
    const auto mark_boundary = [&seq] {
        const auto n = seq.tokens.size();
        if (n > 0 && (seq.sentence_boundaries.empty() || seq.sentence_boundaries.back() < n))
            seq.sentence_boundaries.push_back(n);
    };

    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t start = i;
        const UChar32 c = next_cp(text, i);
        if (is_space(c)) continue;

        if (is_word_start(c)) {
            UChar32 prev = c;
            std::size_t end = i;
            while (end < text.size()) {
                std::size_t probe = end;
                const UChar32 d = next_cp(text, probe);
                if (is_word_cont(d)) {
                    prev = d;
                    end = probe;
                    continue;
                }
                if (is_apostrophe(d) && (u_isalpha(prev) || is_mark(prev)) && probe < text.size()) {
                    std::size_t after = probe;
                    const UChar32 e = next_cp(text, after);
                    if (u_isalpha(e)) {
                        prev = e;
                        end = after;
                        continue;
                    }
                }
                break;
            }
            seq.tokens.emplace_back(text.substr(start, end - start));
            i = end;
            continue;
        }

        // Punctuation run: everything up to the next space or word character.
        bool ends_sentence = is_sentence_end(c);
        std::size_t end = i;
        while (end < text.size()) {
            std::size_t probe = end;
            const UChar32 d = next_cp(text, probe);
            if (is_space(d) || is_word_start(d)) break;
            ends_sentence = ends_sentence || is_sentence_end(d);
            end = probe;
        }
        if (!config.strip_punct_tokens) seq.tokens.emplace_back(text.substr(start, end - start));
        if (ends_sentence) mark_boundary();
        i = end;
    }
    return seq;
}

TokenSequence remove_stopwords(TokenSequence seq, const StopwordSet& stopwords) {
    if (stopwords.empty()) return seq;
    TokenSequence out;
    out.doc_id = std::move(seq.doc_id);
    std::size_t next_boundary = 0;
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
        if (!stopwords.contains(seq.tokens[t])) out.tokens.push_back(std::move(seq.tokens[t]));
        while (next_boundary < seq.sentence_boundaries.size() &&
               seq.sentence_boundaries[next_boundary] == t + 1) {
            const auto n = out.tokens.size();
            if (n > 0 && (out.sentence_boundaries.empty() || out.sentence_boundaries.back() < n))
                out.sentence_boundaries.push_back(n);
            ++next_boundary;
        }
    }
    return out;
}

TokenSequence stem(TokenSequence seq) {
    for (auto& t : seq.tokens) t = porter_stem(t);
    return seq;
}

StopwordSet normalized_stopwords(const PreprocessConfig& config) {
    StopwordSet out;
    for (const auto& w : config.stopword_list) {
        auto n = normalize(w, config.lowercase);
        if (!n.empty()) out.insert(std::move(n));
    }
    return out;
}

TokenSequence preprocess(std::string_view text, const PreprocessConfig& config, std::string doc_id) {
    auto seq = tokenize(normalize(text, config.lowercase), config, std::move(doc_id));
    if (config.remove_stopwords) seq = remove_stopwords(std::move(seq), normalized_stopwords(config));
    if (config.stem) seq = stem(std::move(seq));
    return seq;
}

StopwordSet parse_stopwords(std::string_view content) {
    StopwordSet out;
    for (auto line : split_lines(content)) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t");
        out.emplace(line.substr(first, last - first + 1));
    }
    return out;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    return parse_stopwords(read_file(path));
}

std::uint64_t stopword_hash(const StopwordSet& stopwords) {
    Fnv1a64 h;
    for (const auto& w : stopwords) h.update(w).update("\n");
    return h.digest();
}

std::size_t codepoint_count(std::string_view utf8) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < utf8.size();) {
        next_cp(utf8, i);
        ++n;
    }
    return n;
}

bool is_word_token(std::string_view token) {
    if (token.empty()) return false;
    std::size_t i = 0;
    return is_word_start(next_cp(token, i));
}

bool contains_digit(std::string_view token) {
    for (std::size_t i = 0; i < token.size();)
        if (u_isdigit(next_cp(token, i))) return true;
    return false;
}

std::pair<std::size_t, std::size_t> count_upper_letters(std::string_view utf8) {
    std::size_t upper = 0, letters = 0;
    for (std::size_t i = 0; i < utf8.size();) {
        const UChar32 c = next_cp(utf8, i);
        if (u_isalpha(c)) {
            ++letters;
            if (u_isupper(c)) ++upper;
        }
    }
    return {upper, letters};
}

} // namespace aitd
