#pragma once

#include "aitd/corpus.hpp"
#include "aitd/preprocess.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace aitd {

/// Row-major dense matrix.
struct DenseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : n_rows(rows), n_cols(cols), data(rows * cols, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * n_cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * n_cols, n_cols}; }

    bool operator==(const DenseMatrix&) const = default;
};

/// Compressed sparse rows. Column indices are strictly increasing within a
/// row; absent cells are zero.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> col_idx;
    std::vector<double> values;

    struct Row {
        std::span<const std::uint32_t> cols;
        std::span<const double> vals;
        std::size_t size() const noexcept { return cols.size(); }
    };

    SparseMatrix() = default;
    explicit SparseMatrix(std::size_t cols) : n_cols(cols) {}

    std::size_t nnz() const noexcept { return values.size(); }

    Row row(std::size_t r) const {
        const auto b = row_ptr[r], e = row_ptr[r + 1];
        return {std::span(col_idx).subspan(b, e - b), std::span(values).subspan(b, e - b)};
    }

    /// Appends a row from (column, value) pairs with strictly increasing
    /// columns below n_cols; zeros are dropped.
    void push_row(std::span<const std::pair<std::uint32_t, double>> entries);

    /// Cell lookup by binary search.
    double at(std::size_t r, std::size_t c) const;

    /// Throws DataError if the CSR invariants do not hold.
    void validate() const;

    DenseMatrix to_dense() const;
    static SparseMatrix from_dense(const DenseMatrix& dense);

    /// Side-by-side concatenation; row counts must match.
    static SparseMatrix hstack(const SparseMatrix& left, const SparseMatrix& right);

    SparseMatrix select_rows(std::span<const std::size_t> rows) const;

    bool operator==(const SparseMatrix&) const = default;
};

class Vocabulary {
public:
    Vocabulary() = default;
    /// `terms` must be strictly sorted; 1 <= doc_freq[i] <= n_docs.
    Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq, std::size_t n_docs);

    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::vector<std::size_t>& doc_freq() const noexcept { return doc_freq_; }
    std::size_t n_docs_fitted() const noexcept { return n_docs_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }

    std::optional<std::uint32_t> index_of(std::string_view term) const;

    /// Smooth idf: ln((1 + N) / (1 + df)) + 1.
    double idf(std::size_t column) const;

    bool operator==(const Vocabulary& other) const {
        return terms_ == other.terms_ && doc_freq_ == other.doc_freq_ && n_docs_ == other.n_docs_;
    }

private:
    std::vector<std::string> terms_;
    std::vector<std::size_t> doc_freq_;
    std::size_t n_docs_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
};

enum class FeatureKind { Counts, Tfidf, Stylo, CountsStylo, TfidfStylo, Dense };

FeatureKind parse_feature_kind(std::string_view name);
std::string_view to_string(FeatureKind kind);
bool uses_vocabulary(FeatureKind kind);
bool uses_stylo(FeatureKind kind);

struct FeatureSpec {
    FeatureKind kind = FeatureKind::Counts;
    std::size_t min_df = 1;
    std::optional<std::size_t> max_vocab;

    void validate() const;
    bool operator==(const FeatureSpec&) const = default;
};

/// Keeps terms with doc_freq >= min_df; when capped, the top max_vocab terms by
/// (doc_freq desc, term asc) survive. Result is sorted by code point.
Vocabulary fit_vocabulary(std::span<const TokenSequence> docs, const FeatureSpec& spec);

SparseMatrix transform_counts(std::span<const TokenSequence> docs, const Vocabulary& vocab);

/// Raw-count tf times smooth idf, then unit L2 norm per nonzero row.
SparseMatrix transform_tfidf(const SparseMatrix& counts, const Vocabulary& vocab);

struct StyloVector {
    double avg_word_len = 0;
    double avg_sentence_len = 0;
    double type_token_ratio = 0;
    double hapax_ratio = 0;
    double stopword_ratio = 0;
    double punct_per_token = 0;
    double digit_token_ratio = 0;
    double uppercase_char_ratio = 0;

    static constexpr std::size_t kSize = 8;
    static const std::array<std::string_view, kSize>& names();
    std::array<double, kSize> values() const;

    bool operator==(const StyloVector&) const = default;
};

/// Stylometric profile of one raw document. The text is normalized per
/// `config` and re-tokenized with punctuation tokens kept; word statistics use
/// word tokens only, `punct_per_token` is punctuation tokens over all tokens,
/// and `uppercase_char_ratio` is measured on the raw text. `stopwords` must
/// already be normalized.
StyloVector extract_stylo(std::string_view raw_text, const PreprocessConfig& config,
                          const StopwordSet& stopwords);

struct DenseFeatures {
    DenseMatrix matrix;
    std::vector<std::string> ids;
    std::vector<std::optional<int>> labels;
};

/// JSONL rows `{"id": str, "vec": [numbers], "label": 0|1 (optional)}`.
DenseFeatures parse_dense_features(std::string_view content, const std::string& source = "<memory>");
DenseFeatures load_dense_features(const std::filesystem::path& path);

struct TermCount {
    std::string term;
    std::size_t count = 0;
    bool operator==(const TermCount&) const = default;
};

struct TermFrequencyReport {
    std::vector<TermCount> overall;
    std::array<std::vector<TermCount>, 2> by_label;

    std::string to_json() const;
    /// Columns `scope,term,count` with scope in {overall, 0, 1}.
    std::string to_csv() const;
};

/// Top-k terms by total occurrences, ties broken by term.
TermFrequencyReport term_frequency_report(const Corpus& corpus, const PreprocessConfig& config,
                                          std::size_t top_k);

/// Called once for every document that contributes to a fitted statistic.
using FitObserver = std::function<void(const Document&)>;

/// A fitted feature space: preprocessing, vocabulary and column layout.
/// Vocabulary columns come first, then the eight stylometric columns.
class FeatureExtractor {
public:
    FeatureExtractor() = default;

    static FeatureExtractor fit(const Corpus& train, PreprocessConfig config, FeatureSpec spec,
                                const FitObserver& observer = {});
    static FeatureExtractor for_dense(std::size_t dim);
    /// Rebuilds a previously fitted extractor (model loading).
    static FeatureExtractor restore(PreprocessConfig config, FeatureSpec spec, Vocabulary vocab,
                                    std::size_t dense_dim);

    SparseMatrix transform(const Corpus& docs) const;
    SparseMatrix transform_dense(const DenseMatrix& dense) const;

    std::size_t n_cols() const noexcept;
    /// First column of the trailing block that margin models standardize;
    /// equals n_cols() when the layout has no such block.
    std::size_t standardize_from() const noexcept;
    std::string feature_name(std::size_t column) const;

    const PreprocessConfig& config() const noexcept { return config_; }
    const FeatureSpec& spec() const noexcept { return spec_; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    std::size_t dense_dim() const noexcept { return dense_dim_; }

private:
    PreprocessConfig config_;
    FeatureSpec spec_;
    Vocabulary vocab_;
    std::size_t dense_dim_ = 0;
    StopwordSet stopwords_;
};

} // namespace aitd
