#include "aitd/features.hpp"

#include "aitd/error.hpp"
#include "aitd/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

namespace aitd {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// SparseMatrix

void SparseMatrix::push_row(std::span<const std::pair<std::uint32_t, double>> entries) {
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto [c, v] = entries[k];
        if (c >= n_cols || (k > 0 && entries[k - 1].first >= c))
            throw InvalidArgument("sparse row entries must have strictly increasing columns below n_cols");
        if (v == 0.0) continue;
        col_idx.push_back(c);
        values.push_back(v);
    }
    row_ptr.push_back(values.size());
    ++n_rows;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    const auto rw = row(r);
    const auto it = std::lower_bound(rw.cols.begin(), rw.cols.end(), static_cast<std::uint32_t>(c));
    if (it == rw.cols.end() || *it != c) return 0.0;
    return rw.vals[static_cast<std::size_t>(it - rw.cols.begin())];
}

void SparseMatrix::validate() const {
    if (row_ptr.size() != n_rows + 1) throw DataError("CSR: row_ptr length must be n_rows + 1");
    if (row_ptr.front() != 0 || row_ptr.back() != values.size() || col_idx.size() != values.size())
        throw DataError("CSR: offsets do not span the value array");
    for (std::size_t r = 0; r < n_rows; ++r) {
        if (row_ptr[r] > row_ptr[r + 1]) throw DataError("CSR: row_ptr must be nondecreasing");
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (col_idx[k] >= n_cols) throw DataError("CSR: column index out of range");
            if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1])
                throw DataError("CSR: column indices must increase within a row");
        }
    }
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(n_rows, n_cols);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const auto rw = row(r);
        for (std::size_t k = 0; k < rw.size(); ++k) d(r, rw.cols[k]) = rw.vals[k];
    }
    return d;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
    SparseMatrix m(dense.n_cols);
    std::vector<std::pair<std::uint32_t, double>> entries;
    for (std::size_t r = 0; r < dense.n_rows; ++r) {
        entries.clear();
        for (std::size_t c = 0; c < dense.n_cols; ++c)
            entries.emplace_back(static_cast<std::uint32_t>(c), dense(r, c));
        m.push_row(entries);
    }
    return m;
}

SparseMatrix SparseMatrix::hstack(const SparseMatrix& left, const SparseMatrix& right) {
    if (left.n_rows != right.n_rows) throw DataError("hstack: row counts differ");
    SparseMatrix m(left.n_cols + right.n_cols);
    m.col_idx.reserve(left.nnz() + right.nnz());
    m.values.reserve(left.nnz() + right.nnz());
    for (std::size_t r = 0; r < left.n_rows; ++r) {
        const auto a = left.row(r);
        m.col_idx.insert(m.col_idx.end(), a.cols.begin(), a.cols.end());
        m.values.insert(m.values.end(), a.vals.begin(), a.vals.end());
        const auto b = right.row(r);
        for (std::size_t k = 0; k < b.size(); ++k) {
            m.col_idx.push_back(static_cast<std::uint32_t>(b.cols[k] + left.n_cols));
            m.values.push_back(b.vals[k]);
        }
        m.row_ptr.push_back(m.values.size());
        ++m.n_rows;
    }
    return m;
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> rows) const {
    SparseMatrix m(n_cols);
    for (const auto r : rows) {
        const auto rw = row(r);
        m.col_idx.insert(m.col_idx.end(), rw.cols.begin(), rw.cols.end());
        m.values.insert(m.values.end(), rw.vals.begin(), rw.vals.end());
        m.row_ptr.push_back(m.values.size());
        ++m.n_rows;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
                       std::size_t n_docs)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs) {
    if (terms_.size() != doc_freq_.size()) throw DataError("vocabulary: terms/doc_freq length mismatch");
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i > 0 && !(terms_[i - 1] < terms_[i]))
            throw DataError("vocabulary: terms must be strictly sorted");
        if (doc_freq_[i] < 1 || doc_freq_[i] > n_docs_)
            throw DataError("vocabulary: doc_freq of '" + terms_[i] + "' out of range");
        index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
    }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view term) const {
    const auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double Vocabulary::idf(std::size_t column) const {
    return std::log((1.0 + static_cast<double>(n_docs_)) /
                    (1.0 + static_cast<double>(doc_freq_[column]))) +
           1.0;
}

// ---------------------------------------------------------------------------
// Feature kinds

namespace {
constexpr std::array<std::pair<FeatureKind, std::string_view>, 6> kKindNames{{
    {FeatureKind::Counts, "counts"},
    {FeatureKind::Tfidf, "tfidf"},
    {FeatureKind::Stylo, "stylo"},
    {FeatureKind::CountsStylo, "counts+stylo"},
    {FeatureKind::TfidfStylo, "tfidf+stylo"},
    {FeatureKind::Dense, "dense"},
}};
} // namespace

FeatureKind parse_feature_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames)
        if (n == name) return k;
    throw InvalidArgument("unknown feature kind '" + std::string(name) + "'");
}

std::string_view to_string(FeatureKind kind) {
    for (const auto& [k, n] : kKindNames)
        if (k == kind) return n;
    return "?";
}

bool uses_vocabulary(FeatureKind kind) {
    return kind == FeatureKind::Counts || kind == FeatureKind::Tfidf ||
           kind == FeatureKind::CountsStylo || kind == FeatureKind::TfidfStylo;
}

bool uses_stylo(FeatureKind kind) {
    return kind == FeatureKind::Stylo || kind == FeatureKind::CountsStylo ||
           kind == FeatureKind::TfidfStylo;
}

void FeatureSpec::validate() const {
    if (min_df < 1) throw InvalidArgument("min_df must be >= 1");
    if (max_vocab && *max_vocab < 1) throw InvalidArgument("max_vocab must be >= 1");
}

// ---------------------------------------------------------------------------
// Vectorizers

Vocabulary fit_vocabulary(std::span<const TokenSequence> docs, const FeatureSpec& spec) {
    spec.validate();
    if (docs.empty()) throw DataError("cannot fit a vocabulary on an empty corpus");
    std::unordered_map<std::string, std::size_t> df;
    std::unordered_set<std::string_view> seen;
    for (const auto& d : docs) {
        seen.clear();
        for (const auto& t : d.tokens)
            if (seen.insert(t).second) ++df[t];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [term, n] : df)
        if (n >= spec.min_df) kept.emplace_back(term, n);
    if (kept.empty())
        throw DataError("vocabulary is empty after filtering with min_df=" +
                        std::to_string(spec.min_df) + "; lower min_df");
    if (spec.max_vocab && kept.size() > *spec.max_vocab) {
        std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        kept.resize(*spec.max_vocab);
    }
    std::sort(kept.begin(), kept.end());
    std::vector<std::string> terms;
    std::vector<std::size_t> freq;
    terms.reserve(kept.size());
    freq.reserve(kept.size());
    for (auto& [t, n] : kept) {
        terms.push_back(std::move(t));
        freq.push_back(n);
    }
    return Vocabulary(std::move(terms), std::move(freq), docs.size());
}

SparseMatrix transform_counts(std::span<const TokenSequence> docs, const Vocabulary& vocab) {
    SparseMatrix m(vocab.size());
    std::vector<std::uint32_t> cols;
    std::vector<std::pair<std::uint32_t, double>> entries;
    for (const auto& d : docs) {
        cols.clear();
        for (const auto& t : d.tokens)
            if (const auto c = vocab.index_of(t)) cols.push_back(*c);
        std::sort(cols.begin(), cols.end());
        entries.clear();
        for (std::size_t k = 0; k < cols.size();) {
            std::size_t run = k;
            while (run < cols.size() && cols[run] == cols[k]) ++run;
            entries.emplace_back(cols[k], static_cast<double>(run - k));
            k = run;
        }
        m.push_row(entries);
    }
    return m;
}

SparseMatrix transform_tfidf(const SparseMatrix& counts, const Vocabulary& vocab) {
    if (counts.n_cols != vocab.size()) throw DataError("tfidf: count matrix does not match vocabulary");
    SparseMatrix m = counts;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        double norm2 = 0.0;
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            m.values[k] *= vocab.idf(m.col_idx[k]);
            norm2 += m.values[k] * m.values[k];
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) m.values[k] *= inv;
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Stylometry

const std::array<std::string_view, StyloVector::kSize>& StyloVector::names() {
    static constexpr std::array<std::string_view, kSize> n{
        "avg_word_len",   "avg_sentence_len", "type_token_ratio",  "hapax_ratio",
        "stopword_ratio", "punct_per_token",  "digit_token_ratio", "uppercase_char_ratio"};
    return n;
}

std::array<double, StyloVector::kSize> StyloVector::values() const {
    return {avg_word_len,   avg_sentence_len, type_token_ratio,  hapax_ratio,
            stopword_ratio, punct_per_token,  digit_token_ratio, uppercase_char_ratio};
}

StyloVector extract_stylo(std::string_view raw_text, const PreprocessConfig& config,
                          const StopwordSet& stopwords) {
    PreprocessConfig keep_punct = config;
    keep_punct.strip_punct_tokens = false;
    const auto seq = tokenize(normalize(raw_text, config.lowercase), keep_punct);

    StyloVector v;
    if (seq.tokens.empty()) return v;

    std::size_t words = 0, punct = 0, chars = 0, stop = 0, digits = 0;
    std::map<std::string_view, std::size_t> freq;
    std::size_t sentences = 0;
    bool open_sentence_has_word = false;
    std::size_t next_boundary = 0;
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
        const auto& tok = seq.tokens[t];
        if (is_word_token(tok)) {
            ++words;
            chars += codepoint_count(tok);
            ++freq[tok];
            if (stopwords.contains(tok)) ++stop;
            if (contains_digit(tok)) ++digits;
            open_sentence_has_word = true;
        } else {
            ++punct;
        }
        if (next_boundary < seq.sentence_boundaries.size() &&
            seq.sentence_boundaries[next_boundary] == t + 1) {
            if (open_sentence_has_word) ++sentences;
            open_sentence_has_word = false;
            ++next_boundary;
        }
    }
    if (open_sentence_has_word) ++sentences;

    v.punct_per_token = static_cast<double>(punct) / static_cast<double>(seq.tokens.size());
    const auto [upper, letters] = count_upper_letters(raw_text);
    v.uppercase_char_ratio = letters ? static_cast<double>(upper) / static_cast<double>(letters) : 0.0;
    if (words == 0) return v;

    const auto w = static_cast<double>(words);
    std::size_t hapax = 0;
    for (const auto& [_, n] : freq)
        if (n == 1) ++hapax;
    v.avg_word_len = static_cast<double>(chars) / w;
    v.avg_sentence_len = sentences ? w / static_cast<double>(sentences) : 0.0;
    v.type_token_ratio = static_cast<double>(freq.size()) / w;
    v.hapax_ratio = static_cast<double>(hapax) / w;
    v.stopword_ratio = static_cast<double>(stop) / w;
    v.digit_token_ratio = static_cast<double>(digits) / w;
    return v;
}

// ---------------------------------------------------------------------------
// Dense embeddings

DenseFeatures parse_dense_features(std::string_view content, const std::string& source) {
    DenseFeatures out;
    std::unordered_set<std::string> ids;
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
        if (id == row.end() || !id->is_string() || id->get_ref<const std::string&>().empty())
            throw ParseError(source, line_no, "missing or empty string field 'id'");
        const auto vec = row.find("vec");
        if (vec == row.end() || !vec->is_array() || vec->empty())
            throw ParseError(source, line_no, "missing nonempty array field 'vec'");
        if (out.ids.empty()) {
            out.matrix.n_cols = vec->size();
        } else if (vec->size() != out.matrix.n_cols) {
            throw ParseError(source, line_no, "vector has " + std::to_string(vec->size()) +
                                                  " entries, expected " +
                                                  std::to_string(out.matrix.n_cols));
        }
        for (const auto& x : *vec) {
            if (!x.is_number()) throw ParseError(source, line_no, "vector entries must be numbers");
            const double d = x.get<double>();
            if (!std::isfinite(d)) throw ParseError(source, line_no, "non-finite vector entry");
            out.matrix.data.push_back(d);
        }
        std::optional<int> label;
        if (const auto l = row.find("label"); l != row.end() && !l->is_null()) {
            if (!l->is_number_integer() || (l->get<std::int64_t>() != 0 && l->get<std::int64_t>() != 1))
                throw ParseError(source, line_no, "label must be the integer 0 or 1");
            label = l->get<int>();
        }
        auto id_str = id->get<std::string>();
        if (!ids.insert(id_str).second)
            throw ParseError(source, line_no, "duplicate id '" + id_str + "'");
        out.ids.push_back(std::move(id_str));
        out.labels.push_back(label);
        ++out.matrix.n_rows;
    }
    return out;
}

DenseFeatures load_dense_features(const std::filesystem::path& path) {
    return parse_dense_features(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Term frequency report

namespace {

std::vector<TermCount> top_terms(const std::unordered_map<std::string, std::size_t>& counts,
                                 std::size_t top_k) {
    std::vector<TermCount> rows;
    rows.reserve(counts.size());
    for (const auto& [t, n] : counts) rows.push_back({t, n});
    std::sort(rows.begin(), rows.end(), [](const TermCount& a, const TermCount& b) {
        return a.count != b.count ? a.count > b.count : a.term < b.term;
    });
    if (rows.size() > top_k) rows.resize(top_k);
    return rows;
}

json term_rows_json(const std::vector<TermCount>& rows) {
    json a = json::array();
    for (const auto& r : rows) a.push_back(json::array({r.term, r.count}));
    return a;
}

void append_csv_field(std::string& out, std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        out.append(s);
        return;
    }
    out.push_back('"');
    for (const char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

} // namespace

TermFrequencyReport term_frequency_report(const Corpus& corpus, const PreprocessConfig& config,
                                          std::size_t top_k) {
    if (top_k < 1) throw InvalidArgument("top_k must be >= 1");
    std::unordered_map<std::string, std::size_t> overall;
    std::array<std::unordered_map<std::string, std::size_t>, 2> per_label;
    for (const auto& d : corpus) {
        const auto seq = preprocess(d.text, config, d.id);
        for (const auto& t : seq.tokens) {
            ++overall[t];
            if (d.label) ++per_label[static_cast<std::size_t>(*d.label)][t];
        }
    }
    TermFrequencyReport r;
    r.overall = top_terms(overall, top_k);
    r.by_label[0] = top_terms(per_label[0], top_k);
    r.by_label[1] = top_terms(per_label[1], top_k);
    return r;
}

std::string TermFrequencyReport::to_json() const {
    json j;
    j["overall"] = term_rows_json(overall);
    j["by_label"] = {{"0", term_rows_json(by_label[0])}, {"1", term_rows_json(by_label[1])}};
    return j.dump(2) + "\n";
}

std::string TermFrequencyReport::to_csv() const {
    std::string out = "scope,term,count\n";
    const auto emit = [&](std::string_view scope, const std::vector<TermCount>& rows) {
        for (const auto& r : rows) {
            out.append(scope);
            out.push_back(',');
            append_csv_field(out, r.term);
            out.push_back(',');
            out.append(std::to_string(r.count));
            out.push_back('\n');
        }
    };
    emit("overall", overall);
    emit("0", by_label[0]);
    emit("1", by_label[1]);
    return out;
}

// ---------------------------------------------------------------------------
// FeatureExtractor

FeatureExtractor FeatureExtractor::fit(const Corpus& train, PreprocessConfig config, FeatureSpec spec,
                                       const FitObserver& observer) {
    spec.validate();
    if (spec.kind == FeatureKind::Dense)
        throw InvalidArgument("dense features are read from an embeddings file, not fitted on text");
    if (train.empty()) throw DataError("cannot fit features on an empty corpus");
    FeatureExtractor fx;
    fx.config_ = std::move(config);
    fx.spec_ = spec;
    fx.stopwords_ = normalized_stopwords(fx.config_);
    if (uses_vocabulary(spec.kind)) {
        std::vector<TokenSequence> seqs;
        seqs.reserve(train.size());
        for (const auto& d : train) {
            if (observer) observer(d);
            seqs.push_back(preprocess(d.text, fx.config_, d.id));
        }
        fx.vocab_ = fit_vocabulary(seqs, spec);
    } else if (observer) {
        for (const auto& d : train) observer(d);
    }
    return fx;
}

FeatureExtractor FeatureExtractor::for_dense(std::size_t dim) {
    if (dim == 0) throw InvalidArgument("dense dimension must be >= 1");
    FeatureExtractor fx;
    fx.spec_.kind = FeatureKind::Dense;
    fx.dense_dim_ = dim;
    return fx;
}

FeatureExtractor FeatureExtractor::restore(PreprocessConfig config, FeatureSpec spec, Vocabulary vocab,
                                           std::size_t dense_dim) {
    spec.validate();
    if (spec.kind == FeatureKind::Dense) {
        auto fx = for_dense(dense_dim);
        fx.config_ = std::move(config);
        return fx;
    }
    if (uses_vocabulary(spec.kind) && vocab.empty()) throw DataError("feature space needs a vocabulary");
    FeatureExtractor fx;
    fx.config_ = std::move(config);
    fx.spec_ = spec;
    fx.vocab_ = std::move(vocab);
    fx.stopwords_ = normalized_stopwords(fx.config_);
    return fx;
}

SparseMatrix FeatureExtractor::transform(const Corpus& docs) const {
    if (spec_.kind == FeatureKind::Dense)
        throw InvalidArgument("this feature space expects dense embeddings, not text");
    SparseMatrix vocab_block(0);
    if (uses_vocabulary(spec_.kind)) {
        std::vector<TokenSequence> seqs;
        seqs.reserve(docs.size());
        for (const auto& d : docs) seqs.push_back(preprocess(d.text, config_, d.id));
        vocab_block = transform_counts(seqs, vocab_);
        if (spec_.kind == FeatureKind::Tfidf || spec_.kind == FeatureKind::TfidfStylo)
            vocab_block = transform_tfidf(vocab_block, vocab_);
    } else {
        for (std::size_t r = 0; r < docs.size(); ++r) vocab_block.push_row({});
    }
    if (!uses_stylo(spec_.kind)) return vocab_block;

    SparseMatrix stylo(StyloVector::kSize);
    std::vector<std::pair<std::uint32_t, double>> entries;
    for (const auto& d : docs) {
        const auto vals = extract_stylo(d.text, config_, stopwords_).values();
        entries.clear();
        for (std::size_t k = 0; k < vals.size(); ++k)
            entries.emplace_back(static_cast<std::uint32_t>(k), vals[k]);
        stylo.push_row(entries);
    }
    return SparseMatrix::hstack(vocab_block, stylo);
}

SparseMatrix FeatureExtractor::transform_dense(const DenseMatrix& dense) const {
    if (spec_.kind != FeatureKind::Dense)
        throw InvalidArgument("this feature space expects text, not dense embeddings");
    if (dense.n_cols != dense_dim_)
        throw DataError("embedding dimension " + std::to_string(dense.n_cols) + " does not match model (" +
                        std::to_string(dense_dim_) + ")");
    return SparseMatrix::from_dense(dense);
}

std::size_t FeatureExtractor::n_cols() const noexcept {
    if (spec_.kind == FeatureKind::Dense) return dense_dim_;
    return (uses_vocabulary(spec_.kind) ? vocab_.size() : 0) +
           (uses_stylo(spec_.kind) ? StyloVector::kSize : 0);
}

std::size_t FeatureExtractor::standardize_from() const noexcept {
    if (spec_.kind == FeatureKind::Dense) return 0;
    if (uses_stylo(spec_.kind)) return uses_vocabulary(spec_.kind) ? vocab_.size() : 0;
    return n_cols();
}

std::string FeatureExtractor::feature_name(std::size_t column) const {
    if (spec_.kind == FeatureKind::Dense) return "dense:" + std::to_string(column);
    const std::size_t v = uses_vocabulary(spec_.kind) ? vocab_.size() : 0;
    if (column < v) return vocab_.terms()[column];
    return "stylo:" + std::string(StyloVector::names().at(column - v));
}

} // namespace aitd
