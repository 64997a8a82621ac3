#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace aitd {

/// Class 0 is human-written text, class 1 is AI-generated text.
inline constexpr int kHumanLabel = 0;
inline constexpr int kAiLabel = 1;

struct Document {
    std::string id;
    std::string text;
    std::optional<int> label;

    bool operator==(const Document&) const = default;
};

/// An ordered, id-unique collection of documents. Insertion order is
/// preserved exactly and is the determinism anchor for everything downstream.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Document> docs);

    /// Throws DataError on an empty or duplicate id or on a label
    /// outside {0, 1}.
    void add(Document doc);

    const std::vector<Document>& documents() const noexcept { return docs_; }
    const Document& operator[](std::size_t i) const { return docs_[i]; }
    std::size_t size() const noexcept { return docs_.size(); }
    bool empty() const noexcept { return docs_.empty(); }

    auto begin() const noexcept { return docs_.begin(); }
    auto end() const noexcept { return docs_.end(); }

    /// Count of labeled documents per class.
    const std::array<std::size_t, 2>& label_counts() const noexcept { return counts_; }
    std::size_t labeled_count() const noexcept { return counts_[0] + counts_[1]; }
    bool fully_labeled() const noexcept { return labeled_count() == docs_.size(); }

    /// Labels in document order. Throws DataError naming the first unlabeled id.
    std::vector<int> labels() const;

    bool contains(std::string_view id) const;

    bool operator==(const Corpus& other) const { return docs_ == other.docs_; }

private:
    std::vector<Document> docs_;
    std::unordered_set<std::string> ids_;
    std::array<std::size_t, 2> counts_{0, 0};
};

enum class CorpusFormat { Csv, Jsonl };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat format);
/// `.csv` maps to Csv, `.jsonl`/`.json` to Jsonl; anything else is an error.
CorpusFormat corpus_format_for(const std::filesystem::path& path);

/// CSV: header `id,text,label` (or `id,text` for unlabeled input), comma
/// separated, double-quote quoting with "" escapes, UTF-8. An empty label cell
/// marks an unlabeled document.
///
/// JSONL: one object per line with `id` (string), `text` (string) and an
/// optional integer `label` in {0, 1}.
///
/// Malformed records raise ParseError with the 1-based line number of the
/// record start; duplicate ids raise DataError naming the id.
Corpus parse_corpus(std::string_view content, CorpusFormat format,
                    const std::string& source = "<memory>");
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

std::string serialize_corpus(const Corpus& corpus, CorpusFormat format);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);

/// Order-sensitive fingerprint over ids, texts and labels.
std::uint64_t corpus_fingerprint(const Corpus& corpus);

/// Exact rational in the open interval (0, 1).
class Fraction {
public:
    /// Parses a decimal literal such as "0.25" or a ratio such as "1/3".
    static Fraction parse(std::string_view text);
    /// Uses the shortest decimal representation that round-trips the double.
    static Fraction from_double(double value);

    std::uint64_t numerator() const noexcept { return num_; }
    std::uint64_t denominator() const noexcept { return den_; }
    double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    /// floor(n * this), computed exactly.
    std::uint64_t floor_times(std::uint64_t n) const;

private:
    Fraction(std::uint64_t num, std::uint64_t den);
    std::uint64_t num_;
    std::uint64_t den_;
};

struct SplitSpec {
    Fraction test_fraction;
    std::uint64_t seed = 0;
};

struct SplitResult {
    Corpus train;
    Corpus test;
};

/// Per class c, the test side receives floor(count_c * test_fraction)
/// documents chosen by a seeded shuffle of that class's documents (class 0
/// shuffled first, then class 1, from one SplitMix64 stream). Both outputs keep
/// the input's relative document order.
SplitResult stratified_split(const Corpus& corpus, const SplitSpec& spec);

/// Manifest JSON recording seed, fraction, generator and per-class counts.
std::string split_manifest_json(const SplitSpec& spec, const SplitResult& result);

/// Synthetic two-class corpus. Tokens are drawn from a shared Zipf-weighted
/// vocabulary with probability `overlap`, otherwise from a class-specific
/// marker vocabulary (class 1 draws from the AI-marker subset). With overlap 0
/// the class vocabularies are disjoint.
struct SyntheticParams {
    std::size_t shared_vocab = 300;
    std::size_t markers_per_class = 30;
    double overlap = 0.85;
    double zipf_exponent = 1.0;
    std::size_t min_tokens = 30;
    std::size_t max_tokens = 80;
    std::size_t min_sentence = 6;
    std::size_t max_sentence = 16;
    double digit_rate = 0.02;

    void validate() const;
};

Corpus generate_synthetic_corpus(std::size_t n_per_class, std::uint64_t seed,
                                 const SyntheticParams& params = {});

/// The marker vocabulary of `label` (0 = human markers, 1 = AI markers).
std::vector<std::string> synthetic_marker_terms(const SyntheticParams& params, int label);

} // namespace aitd
