#include "aitd/corpus.hpp"

#include "aitd/error.hpp"
#include "aitd/hash.hpp"
#include "aitd/random.hpp"
#include "aitd/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace aitd {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<Document> docs) {
    docs_.reserve(docs.size());
    for (auto& d : docs) add(std::move(d));
}

void Corpus::add(Document doc) {
    if (doc.id.empty()) throw DataError("document id must be nonempty");
    if (doc.label && *doc.label != 0 && *doc.label != 1)
        throw DataError("document '" + doc.id + "': label must be 0 or 1, got " +
                        std::to_string(*doc.label));
    if (!ids_.insert(doc.id).second) throw DataError("duplicate document id '" + doc.id + "'");
    if (doc.label) ++counts_[static_cast<std::size_t>(*doc.label)];
    docs_.push_back(std::move(doc));
}

std::vector<int> Corpus::labels() const {
    std::vector<int> out;
    out.reserve(docs_.size());
    for (const auto& d : docs_) {
        if (!d.label) throw DataError("document '" + d.id + "' has no label");
        out.push_back(*d.label);
    }
    return out;
}

bool Corpus::contains(std::string_view id) const {
    return ids_.find(std::string(id)) != ids_.end();
}

// ---------------------------------------------------------------------------
// Formats

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "csv") return CorpusFormat::Csv;
    if (name == "jsonl") return CorpusFormat::Jsonl;
    throw InvalidArgument("unknown corpus format '" + std::string(name) + "' (expected csv or jsonl)");
}

std::string_view to_string(CorpusFormat format) {
    return format == CorpusFormat::Csv ? "csv" : "jsonl";
}

CorpusFormat corpus_format_for(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".csv") return CorpusFormat::Csv;
    if (ext == ".jsonl" || ext == ".json") return CorpusFormat::Jsonl;
    throw InvalidArgument("cannot infer corpus format from '" + path.string() +
                          "'; pass --format csv|jsonl");
}

namespace {

std::optional<int> parse_label_cell(std::string_view cell, const std::string& source,
                                    std::size_t line) {
    if (cell.empty()) return std::nullopt;
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw ParseError(source, line, "label must be 0 or 1, got '" + std::string(cell) + "'");
}

// One CSV record. Returns false at end of input.
struct CsvReader {
    std::string_view data;
    std::string source;
    std::size_t pos = 0;
    std::size_t line = 1;

    bool next(std::vector<std::string>& fields, std::size_t& record_line) {
        fields.clear();
        // Blank lines between records are skipped.
        while (pos < data.size() && (data[pos] == '\n' || data[pos] == '\r')) {
            if (data[pos] == '\n') ++line;
            ++pos;
        }
        if (pos >= data.size()) return false;
        record_line = line;
        std::string field;
        for (;;) {
            field.clear();
            if (pos < data.size() && data[pos] == '"') {
                ++pos;
                for (;;) {
                    if (pos >= data.size())
                        throw ParseError(source, record_line, "unterminated quoted field");
                    const char c = data[pos++];
                    if (c == '"') {
                        if (pos < data.size() && data[pos] == '"') {
                            field.push_back('"');
                            ++pos;
                        } else {
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        field.push_back(c);
                    }
                }
                if (pos < data.size() && data[pos] != ',' && data[pos] != '\n' &&
                    !(data[pos] == '\r' && pos + 1 < data.size() && data[pos + 1] == '\n') &&
                    !(data[pos] == '\r' && pos + 1 == data.size()))
                    throw ParseError(source, record_line, "unexpected character after closing quote");
            } else {
                while (pos < data.size() && data[pos] != ',' && data[pos] != '\n') {
                    const char c = data[pos];
                    if (c == '"') throw ParseError(source, record_line, "stray quote in unquoted field");
                    if (c == '\r' && (pos + 1 == data.size() || data[pos + 1] == '\n')) {
                        ++pos;
                        continue;
                    }
                    field.push_back(c);
                    ++pos;
                }
            }
            if (pos < data.size() && data[pos] == '\r') ++pos;
            fields.push_back(std::move(field));
            if (pos >= data.size()) return true;
            if (data[pos] == ',') {
                ++pos;
                continue;
            }
            // newline ends the record
            ++pos;
            ++line;
            return true;
        }
    }
};

Corpus parse_csv(std::string_view content, const std::string& source) {
    if (content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);
    CsvReader reader{content, source};
    std::vector<std::string> fields;
    std::size_t line = 0;
    if (!reader.next(fields, line)) return Corpus{};
    bool with_label = false;
    if (fields == std::vector<std::string>{"id", "text", "label"}) {
        with_label = true;
    } else if (fields != std::vector<std::string>{"id", "text"}) {
        throw ParseError(source, line, "expected header 'id,text,label'");
    }
    const std::size_t width = with_label ? 3 : 2;
    Corpus corpus;
    while (reader.next(fields, line)) {
        if (fields.size() != width)
            throw ParseError(source, line, "expected " + std::to_string(width) + " fields, got " +
                                               std::to_string(fields.size()));
        if (fields[0].empty()) throw ParseError(source, line, "empty id");
        Document doc{std::move(fields[0]), std::move(fields[1]),
                     with_label ? parse_label_cell(fields[2], source, line) : std::nullopt};
        if (corpus.contains(doc.id))
            throw DataError(source + ":" + std::to_string(line) + ": duplicate document id '" +
                            doc.id + "'");
        corpus.add(std::move(doc));
    }
    return corpus;
}

Corpus parse_jsonl(std::string_view content, const std::string& source) {
    Corpus corpus;
    std::size_t line_no = 0;
    for (const auto line : split_lines(content)) {
        ++line_no;
        if (is_blank(line)) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!row.is_object()) throw ParseError(source, line_no, "expected a JSON object");
        const auto id = row.find("id");
        const auto text = row.find("text");
        if (id == row.end() || !id->is_string() || id->get_ref<const std::string&>().empty())
            throw ParseError(source, line_no, "missing or empty string field 'id'");
        if (text == row.end() || !text->is_string())
            throw ParseError(source, line_no, "missing string field 'text'");
        std::optional<int> label;
        if (const auto l = row.find("label"); l != row.end() && !l->is_null()) {
            if (!l->is_number_integer() || (l->get<std::int64_t>() != 0 && l->get<std::int64_t>() != 1))
                throw ParseError(source, line_no, "label must be the integer 0 or 1");
            label = l->get<int>();
        }
        Document doc{id->get<std::string>(), text->get<std::string>(), label};
        if (corpus.contains(doc.id))
            throw DataError(source + ":" + std::to_string(line_no) + ": duplicate document id '" +
                            doc.id + "'");
        corpus.add(std::move(doc));
    }
    return corpus;
}

void write_csv_field(std::string& out, std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        out.append(field);
        return;
    }
    out.push_back('"');
    for (const char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

} // namespace

Corpus parse_corpus(std::string_view content, CorpusFormat format, const std::string& source) {
    return format == CorpusFormat::Csv ? parse_csv(content, source) : parse_jsonl(content, source);
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    return parse_corpus(read_file(path), format, path.string());
}

std::string serialize_corpus(const Corpus& corpus, CorpusFormat format) {
    std::string out;
    if (format == CorpusFormat::Csv) {
        out = "id,text,label\n";
        for (const auto& d : corpus) {
            write_csv_field(out, d.id);
            out.push_back(',');
            write_csv_field(out, d.text);
            out.push_back(',');
            if (d.label) out.append(std::to_string(*d.label));
            out.push_back('\n');
        }
        return out;
    }
    for (const auto& d : corpus) {
        json row;
        row["id"] = d.id;
        row["text"] = d.text;
        if (d.label) row["label"] = *d.label;
        out.append(row.dump());
        out.push_back('\n');
    }
    return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
    write_file_atomic(path, serialize_corpus(corpus, format));
}

std::uint64_t corpus_fingerprint(const Corpus& corpus) {
    Fnv1a64 h;
    for (const auto& d : corpus) {
        h.update(d.id).update(std::string_view("\0", 1));
        h.update(d.text).update(std::string_view("\0", 1));
        h.update(d.label ? std::string_view(*d.label ? "1" : "0") : std::string_view("-"));
        h.update(std::string_view("\n"));
    }
    return h.digest();
}

// ---------------------------------------------------------------------------
// Fraction

Fraction::Fraction(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
    if (den_ == 0 || num_ == 0 || num_ >= den_)
        throw InvalidArgument("fraction must lie strictly between 0 and 1");
    const auto g = std::gcd(num_, den_);
    num_ /= g;
    den_ /= g;
}

Fraction Fraction::parse(std::string_view text) {
    const auto bad = [&] {
        return InvalidArgument("invalid fraction '" + std::string(text) + "'");
    };
    const auto parse_uint = [&](std::string_view digits) {
        std::uint64_t v = 0;
        if (digits.empty()) throw bad();
        const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec != std::errc{} || p != digits.data() + digits.size()) throw bad();
        return v;
    };
    if (const auto slash = text.find('/'); slash != std::string_view::npos)
        return Fraction(parse_uint(text.substr(0, slash)), parse_uint(text.substr(slash + 1)));

    const auto dot = text.find('.');
    const auto whole = text.substr(0, dot);
    if (!whole.empty() && parse_uint(whole) != 0)
        throw InvalidArgument("fraction must lie strictly between 0 and 1");
    if (dot == std::string_view::npos) return Fraction(0, 1); // throws: zero
    auto frac = text.substr(dot + 1);
    while (!frac.empty() && frac.back() == '0') frac.remove_suffix(1);
    if (frac.size() > 18) throw bad();
    if (frac.empty()) return Fraction(0, 1);
    std::uint64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    return Fraction(parse_uint(frac), den);
}

Fraction Fraction::from_double(double value) {
    if (!(value > 0.0 && value < 1.0))
        throw InvalidArgument("fraction must lie strictly between 0 and 1");
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
    if (ec != std::errc{}) throw InvalidArgument("cannot represent fraction");
    return parse(std::string_view(buf, static_cast<std::size_t>(p - buf)));
}

std::string Fraction::str() const {
    std::uint64_t den = den_;
    std::size_t twos = 0, fives = 0;
    while (den % 2 == 0) { den /= 2; ++twos; }
    while (den % 5 == 0) { den /= 5; ++fives; }
    if (den != 1) return std::to_string(num_) + "/" + std::to_string(den_);
    // Terminating decimal.
    const std::size_t digits = std::max(twos, fives);
    unsigned __int128 scaled = num_;
    for (std::size_t i = 0; i < digits; ++i) scaled *= 10;
    scaled /= den_;
    auto s = std::to_string(static_cast<std::uint64_t>(scaled));
    if (s.size() < digits) s.insert(0, digits - s.size(), '0');
    return "0." + s;
}

std::uint64_t Fraction::floor_times(std::uint64_t n) const {
    const unsigned __int128 prod = static_cast<unsigned __int128>(n) * num_;
    return static_cast<std::uint64_t>(prod / den_);
}

// ---------------------------------------------------------------------------
// Split

SplitResult stratified_split(const Corpus& corpus, const SplitSpec& spec) {
    if (!corpus.fully_labeled()) {
        for (const auto& d : corpus)
            if (!d.label) throw DataError("cannot split: document '" + d.id + "' is unlabeled");
    }
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        by_class[static_cast<std::size_t>(*corpus[i].label)].push_back(i);

    SplitMix64 rng(spec.seed);
    std::vector<char> in_test(corpus.size(), 0);
    for (int c = 0; c < 2; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        if (members.empty())
            throw DataError("cannot split: class " + std::to_string(c) + " has no documents");
        const auto n_test = spec.test_fraction.floor_times(members.size());
        if (n_test >= members.size())
            throw DataError("cannot split: class " + std::to_string(c) +
                            " would receive no training documents");
        shuffle(std::span<std::size_t>(members), rng);
        for (std::size_t k = 0; k < n_test; ++k) in_test[members[k]] = 1;
    }

    SplitResult result;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        (in_test[i] ? result.test : result.train).add(corpus[i]);
    return result;
}

std::string split_manifest_json(const SplitSpec& spec, const SplitResult& result) {
    const auto counts = [](const Corpus& c) {
        json j;
        j["0"] = c.label_counts()[0];
        j["1"] = c.label_counts()[1];
        return j;
    };
    json m;
    m["generator"] = SplitMix64::kName;
    m["seed"] = spec.seed;
    m["test_fraction"] = spec.test_fraction.str();
    m["train"] = {{"documents", result.train.size()}, {"per_class", counts(result.train)}};
    m["test"] = {{"documents", result.test.size()}, {"per_class", counts(result.test)}};
    return m.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Synthetic corpus

void SyntheticParams::validate() const {
    if (shared_vocab == 0) throw InvalidArgument("shared_vocab must be >= 1");
    if (markers_per_class == 0) throw InvalidArgument("markers_per_class must be >= 1");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw InvalidArgument("overlap must lie in [0, 1]");
    if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent))
        throw InvalidArgument("zipf_exponent must be finite and >= 0");
    if (min_tokens == 0 || min_tokens > max_tokens)
        throw InvalidArgument("token range must satisfy 1 <= min_tokens <= max_tokens");
    if (min_sentence == 0 || min_sentence > max_sentence)
        throw InvalidArgument("sentence range must satisfy 1 <= min_sentence <= max_sentence");
    if (!(digit_rate >= 0.0 && digit_rate <= 1.0)) throw InvalidArgument("digit_rate must lie in [0, 1]");
}

namespace {

// Pronounceable, unique word for an index: three base-80 syllables.
std::string synthetic_word(std::size_t index) {
    static constexpr std::string_view consonants = "bcdfghklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    constexpr std::size_t kSyllables = 16 * 5;
    std::string w;
    for (int k = 0; k < 3; ++k) {
        const std::size_t s = index % kSyllables;
        index /= kSyllables;
        w.push_back(consonants[s / 5]);
        w.push_back(vowels[s % 5]);
    }
    return w;
}

struct WeightedVocab {
    std::vector<std::string> words;
    std::vector<double> cumulative;

    const std::string& draw(SplitMix64& rng) const {
        const double u = rng.uniform() * cumulative.back();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                             words.size() - 1);
        return words[k];
    }
};

WeightedVocab make_vocab(std::size_t first_index, std::size_t count, double exponent) {
    WeightedVocab v;
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        v.words.push_back(synthetic_word(first_index + k));
        total += 1.0 / std::pow(static_cast<double>(k + 1), exponent);
        v.cumulative.push_back(total);
    }
    return v;
}

std::size_t marker_base(const SyntheticParams& p, int label) {
    return p.shared_vocab + static_cast<std::size_t>(label) * p.markers_per_class;
}

} // namespace

std::vector<std::string> synthetic_marker_terms(const SyntheticParams& params, int label) {
    params.validate();
    if (label != 0 && label != 1) throw InvalidArgument("label must be 0 or 1");
    std::vector<std::string> out;
    for (std::size_t k = 0; k < params.markers_per_class; ++k)
        out.push_back(synthetic_word(marker_base(params, label) + k));
    return out;
}

Corpus generate_synthetic_corpus(std::size_t n_per_class, std::uint64_t seed,
                                 const SyntheticParams& params) {
    if (n_per_class == 0) throw InvalidArgument("n_per_class must be >= 1");
    params.validate();

    const auto shared = make_vocab(0, params.shared_vocab, params.zipf_exponent);
    const std::array<WeightedVocab, 2> markers{
        make_vocab(marker_base(params, 0), params.markers_per_class, 0.5),
        make_vocab(marker_base(params, 1), params.markers_per_class, 0.5)};

    SplitMix64 rng(seed);
    const auto range = [&](std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
    };

    Corpus corpus;
    std::size_t serial = 0;
    for (std::size_t i = 0; i < n_per_class; ++i) {
        for (int label = 0; label < 2; ++label) {
            const std::size_t n_tokens = range(params.min_tokens, params.max_tokens);
            std::string text;
            std::size_t left_in_sentence = range(params.min_sentence, params.max_sentence);
            bool sentence_start = true;
            for (std::size_t t = 0; t < n_tokens; ++t) {
                std::string word;
                if (rng.uniform() < params.digit_rate) {
                    word = std::to_string(rng.below(1000));
                } else if (rng.uniform() < params.overlap) {
                    word = shared.draw(rng);
                } else {
                    word = markers[static_cast<std::size_t>(label)].draw(rng);
                }
                if (sentence_start) word[0] = static_cast<char>(std::toupper(word[0]));
                if (!text.empty()) text.push_back(' ');
                text += word;
                sentence_start = false;
                if (--left_in_sentence == 0 || t + 1 == n_tokens) {
                    text.push_back('.');
                    sentence_start = true;
                    left_in_sentence = range(params.min_sentence, params.max_sentence);
                }
            }
            char id[32];
            std::snprintf(id, sizeof(id), "doc-%06zu", ++serial);
            corpus.add(Document{id, std::move(text), label});
        }
    }
    return corpus;
}

} // namespace aitd
