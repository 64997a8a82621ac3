// Porter, M.F. (1980). An algorithm for suffix stripping. Program 14(3).
//
// Follows the published rule set (step 2 uses ABLI -> ABLE, no LOGI rule).
// In steps 2-4 only the longest matching suffix is considered; if its
// condition fails the step leaves the word alone.

#include "aitd/preprocess.hpp"

#include <algorithm>
#include <initializer_list>
#include <utility>

namespace aitd {

namespace {

class PorterStemmer {
public:
    explicit PorterStemmer(std::string_view word) : b_(word) {}

    std::string run() && {
        step1a();
        step1b();
        step1c();
        step2();
        step3();
        step4();
        step5a();
        step5b();
        return std::move(b_);
    }

private:
    std::string b_;

    bool is_consonant(std::size_t i) const {
        switch (b_[i]) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 ? true : !is_consonant(i - 1);
        default:
            return true;
        }
    }

    // m in [C](VC)^m[V] over the first `len` characters.
    std::size_t measure(std::size_t len) const {
        std::size_t i = 0, m = 0;
        while (i < len && is_consonant(i)) ++i;
        while (i < len) {
            while (i < len && !is_consonant(i)) ++i;
            if (i >= len) break;
            while (i < len && is_consonant(i)) ++i;
            ++m;
        }
        return m;
    }

    bool has_vowel(std::size_t len) const {
        for (std::size_t i = 0; i < len; ++i)
            if (!is_consonant(i)) return true;
        return false;
    }

    // *d: stem ends with a double consonant.
    bool double_consonant(std::size_t len) const {
        return len >= 2 && b_[len - 1] == b_[len - 2] && is_consonant(len - 1);
    }

    // *o: stem ends cvc, where the final c is not w, x or y.
    bool cvc(std::size_t len) const {
        if (len < 3) return false;
        if (!is_consonant(len - 1) || is_consonant(len - 2) || !is_consonant(len - 3)) return false;
        const char c = b_[len - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(std::string_view suffix) const {
        return b_.size() >= suffix.size() &&
               std::string_view(b_).substr(b_.size() - suffix.size()) == suffix;
    }

    std::size_t stem_len(std::string_view suffix) const { return b_.size() - suffix.size(); }

    void replace_suffix(std::string_view suffix, std::string_view with) {
        b_.resize(stem_len(suffix));
        b_.append(with);
    }

    struct Rule {
        std::string_view suffix;
        std::string_view replacement;
    };

    // Longest-match rule list with an (m > min_measure) condition.
    void apply_measure_rules(std::initializer_list<Rule> rules, std::size_t min_measure) {
        const Rule* best = nullptr;
        for (const auto& r : rules)
            if (ends(r.suffix) && (!best || r.suffix.size() > best->suffix.size())) best = &r;
        if (best && measure(stem_len(best->suffix)) > min_measure)
            replace_suffix(best->suffix, best->replacement);
    }

    void step1a() {
        if (ends("sses")) replace_suffix("sses", "ss");
        else if (ends("ies")) replace_suffix("ies", "i");
        else if (ends("ss")) return;
        else if (ends("s")) b_.pop_back();
    }

    void step1b() {
        if (ends("eed")) {
            if (measure(stem_len("eed")) > 0) b_.pop_back();
            return;
        }
        bool stripped = false;
        for (const std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
            if (ends(suffix) && has_vowel(stem_len(suffix))) {
                b_.resize(stem_len(suffix));
                stripped = true;
                break;
            }
        }
        if (!stripped) return;
        if (ends("at") || ends("bl") || ends("iz")) {
            b_.push_back('e');
        } else if (double_consonant(b_.size())) {
            const char c = b_.back();
            if (c != 'l' && c != 's' && c != 'z') b_.pop_back();
        } else if (measure(b_.size()) == 1 && cvc(b_.size())) {
            b_.push_back('e');
        }
    }

    void step1c() {
        if (ends("y") && has_vowel(b_.size() - 1)) b_.back() = 'i';
    }

    void step2() {
        apply_measure_rules({{"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
                             {"anci", "ance"},   {"izer", "ize"},    {"abli", "able"},
                             {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
                             {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
                             {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
                             {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
                             {"iviti", "ive"},   {"biliti", "ble"}},
                            0);
    }

    void step3() {
        apply_measure_rules({{"icate", "ic"},
                             {"ative", ""},
                             {"alize", "al"},
                             {"iciti", "ic"},
                             {"ical", "ic"},
                             {"ful", ""},
                             {"ness", ""}},
                            0);
    }

    void step4() {
        static constexpr std::string_view suffixes[] = {
            "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
            "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
        std::string_view best;
        for (const auto s : suffixes)
            if (ends(s) && s.size() > best.size()) best = s;
        if (best.empty()) return;
        const std::size_t len = stem_len(best);
        if (best == "ion" && (len == 0 || (b_[len - 1] != 's' && b_[len - 1] != 't'))) return;
        if (measure(len) > 1) b_.resize(len);
    }

    void step5a() {
        if (!ends("e")) return;
        const std::size_t len = b_.size() - 1;
        const std::size_t m = measure(len);
        if (m > 1 || (m == 1 && !cvc(len))) b_.pop_back();
    }

    void step5b() {
        if (ends("ll") && measure(b_.size() - 1) > 1) b_.pop_back();
    }
};

} // namespace

std::string porter_stem(std::string_view word) {
    if (word.size() <= 2) return std::string(word);
    if (!std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; }))
        return std::string(word);
    return PorterStemmer(word).run();
}

} // namespace aitd
