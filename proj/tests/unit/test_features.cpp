#include "aitd/error.hpp"
#include "aitd/features.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <map>
#include <random>
#include <numeric>
#include <set>
#include <sstream>

using namespace aitd;

namespace {

TokenSequence seq(std::vector<std::string> tokens) { return {"", std::move(tokens), {}}; }

std::vector<TokenSequence> random_docs(std::mt19937_64& gen, std::size_t n, std::size_t alphabet) {
    std::vector<TokenSequence> docs;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> toks;
        const auto len = gen() % 15;
        for (std::size_t k = 0; k < len; ++k) toks.push_back("t" + std::to_string(gen() % alphabet));
        docs.push_back(seq(std::move(toks)));
    }
    return docs;
}

Corpus corpus_of(const std::vector<std::pair<std::string, int>>& rows) {
    Corpus c;
    for (std::size_t i = 0; i < rows.size(); ++i) c.add({"d" + std::to_string(i), rows[i].first, rows[i].second});
    return c;
}

} // namespace

TEST_CASE("sparse matrix csr basics") {
    SparseMatrix m(4);
    const std::pair<std::uint32_t, double> r0[] = {{0, 1.0}, {2, 0.0}, {3, 2.5}};
    m.push_row(r0);
    m.push_row({});
    m.validate();
    CHECK(m.n_rows == 2);
    CHECK(m.nnz() == 2);
    CHECK(m.at(0, 3) == 2.5);
    CHECK(m.at(0, 2) == 0.0);
    CHECK(m.row(1).size() == 0);
    const auto dense = m.to_dense();
    CHECK(SparseMatrix::from_dense(dense) == m);
    const std::pair<std::uint32_t, double> bad[] = {{2, 1.0}, {1, 1.0}};
    CHECK_THROWS_AS(m.push_row(bad), InvalidArgument);
    const std::pair<std::uint32_t, double> out_of_range[] = {{4, 1.0}};
    CHECK_THROWS_AS(m.push_row(out_of_range), InvalidArgument);

    CHECK(m.n_rows == 2);
    SparseMatrix right(2);
    const std::pair<std::uint32_t, double> a[] = {{1, 7.0}};
    right.push_row(a);
    right.push_row(a);
    const auto h = SparseMatrix::hstack(m, right);
    h.validate();
    CHECK(h.n_cols == 6);
    CHECK(h.at(0, 5) == 7.0);
    CHECK(h.at(1, 5) == 7.0);
    const std::size_t pick[] = {1};
    CHECK_THROWS_AS(SparseMatrix::hstack(m, SparseMatrix(2)), DataError);
    CHECK(h.select_rows(pick).at(0, 5) == 7.0);
}

TEST_CASE("fit_vocabulary examples") {
    const std::vector<TokenSequence> docs = {seq({"a", "a", "b"}), seq({"b", "c"})};
    const auto v = fit_vocabulary(docs, {});
    CHECK(v.terms() == std::vector<std::string>{"a", "b", "c"});
    CHECK(v.doc_freq() == std::vector<std::size_t>{1, 2, 1});
    CHECK(v.n_docs_fitted() == 2);
    FeatureSpec two;
    two.min_df = 2;
    CHECK(fit_vocabulary(docs, two).terms() == std::vector<std::string>{"b"});
    FeatureSpec three;
    three.min_df = 3;
    CHECK_THROWS_AS(fit_vocabulary(docs, three), DataError);
}

TEST_CASE("vocabulary cap keeps (doc_freq desc, term asc) then sorts") {
    const std::vector<TokenSequence> docs = {seq({"z", "y", "x"}), seq({"z", "y"}), seq({"z", "w"})};
    FeatureSpec cap;
    cap.max_vocab = 3;
    // df: z 3, y 2, w 1, x 1; the tie at df 1 keeps w over x.
    const auto v = fit_vocabulary(docs, cap);
    CHECK(v.terms() == std::vector<std::string>{"w", "y", "z"});
    CHECK(v.doc_freq() == std::vector<std::size_t>{1, 2, 3});
    FeatureSpec zero;
    zero.max_vocab = 0;
    CHECK_THROWS_AS(fit_vocabulary(docs, zero), InvalidArgument);
}

TEST_CASE("vocabulary terms sort by code point") {
    const auto v = fit_vocabulary(std::vector{seq({"\xC3\xA9t\xC3\xA9", "zoo", "Zoo", "apple"})}, {});
    CHECK(v.terms() == std::vector<std::string>{"Zoo", "apple", "zoo", "\xC3\xA9t\xC3\xA9"});
    CHECK(v.index_of("zoo") == 2u);
    CHECK_FALSE(v.index_of("missing").has_value());
    CHECK_THROWS(Vocabulary({"b", "a"}, {1, 1}, 1));
    CHECK_THROWS(Vocabulary({"a"}, {2}, 1));
}

TEST_CASE("doc_freq matches a brute-force scan") {
    std::mt19937_64 gen(50);
    for (int trial = 0; trial < 20; ++trial) {
        const auto docs = random_docs(gen, 50, 40);
        FeatureSpec spec;
        spec.min_df = 1 + gen() % 3;
        Vocabulary v;
        try {
            v = fit_vocabulary(docs, spec);
        } catch (const DataError&) {
            continue;
        }
        std::map<std::string, std::size_t> oracle;
        for (const auto& d : docs) {
            const std::set<std::string> uniq(d.tokens.begin(), d.tokens.end());
            for (const auto& t : uniq) ++oracle[t];
        }
        std::vector<std::string> expected;
        for (const auto& [t, df] : oracle)
            if (df >= spec.min_df) expected.push_back(t);
        CHECK(v.terms() == expected);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(v.doc_freq()[i] == oracle[v.terms()[i]]);
    }
}

TEST_CASE("transform_counts examples") {
    const std::vector<TokenSequence> docs = {seq({"ai", "text", "ai"}), seq({"human", "text"})};
    const auto v = fit_vocabulary(docs, {});
    const auto m = transform_counts(docs, v).to_dense();
    CHECK(m.data == std::vector<double>{2, 0, 1, 0, 1, 1});
    const std::vector<TokenSequence> odd = {seq({}), seq({"oov", "words"})};
    const auto z = transform_counts(odd, v);
    CHECK(z.n_rows == 2);
    CHECK(z.nnz() == 0);
}

TEST_CASE("counts match a dense recount and row sums equal in-vocabulary tokens") {
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 20; ++trial) {
        const auto fit_docs = random_docs(gen, 30, 25);
        const auto v = fit_vocabulary(fit_docs, {});
        const auto docs = random_docs(gen, 100, 30);
        const auto m = transform_counts(docs, v);
        m.validate();
        for (std::size_t r = 0; r < docs.size(); ++r) {
            std::vector<double> expect(v.size(), 0.0);
            double in_vocab = 0;
            for (const auto& t : docs[r].tokens) {
                for (std::size_t c = 0; c < v.size(); ++c)
                    if (v.terms()[c] == t) {
                        expect[c] += 1;
                        in_vocab += 1;
                    }
            }
            double sum = 0;
            for (std::size_t c = 0; c < v.size(); ++c) {
                CHECK(m.at(r, c) == expect[c]);
                sum += m.at(r, c);
            }
            CHECK(sum == in_vocab);
        }
    }
}

TEST_CASE("tfidf hand example") {
    const std::vector<TokenSequence> docs = {seq({"ai", "text", "ai"}), seq({"human", "text"})};
    const auto v = fit_vocabulary(docs, {});
    CHECK(v.idf(2) == 1.0);
    CHECK(v.idf(0) == doctest::Approx(std::log(1.5) + 1.0).epsilon(1e-15));
    CHECK(v.idf(0) == doctest::Approx(1.4055).epsilon(1e-4));
    const auto t = transform_tfidf(transform_counts(docs, v), v);
    CHECK(t.at(0, 0) == doctest::Approx(0.9422).epsilon(1e-4));
    CHECK(t.at(0, 1) == 0.0);
    CHECK(t.at(0, 2) == doctest::Approx(0.3352).epsilon(1e-4));
}

TEST_CASE("tfidf rows are unit norm or zero and idf is monotone") {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 30; ++trial) {
        const auto docs = random_docs(gen, 40, 20);
        const auto v = fit_vocabulary(docs, {});
        const auto counts = transform_counts(docs, v);
        const auto t = transform_tfidf(counts, v);
        for (std::size_t r = 0; r < t.n_rows; ++r) {
            double norm2 = 0;
            for (const double x : t.row(r).vals) norm2 += x * x;
            if (counts.row(r).size() == 0) CHECK(t.row(r).size() == 0);
            else CHECK(std::abs(std::sqrt(norm2) - 1.0) <= 1e-9);
            // Oracle: raw tf times smooth idf, L2-normalized.
            const auto cr = counts.row(r);
            for (std::size_t k = 0; k < cr.size(); ++k) {
                const double df = static_cast<double>(v.doc_freq()[cr.cols[k]]);
                const double N = static_cast<double>(v.n_docs_fitted());
                const double raw = cr.vals[k] * (std::log((1 + N) / (1 + df)) + 1);
                double z = 0;
                for (std::size_t q = 0; q < cr.size(); ++q) {
                    const double dq = static_cast<double>(v.doc_freq()[cr.cols[q]]);
                    const double x = cr.vals[q] * (std::log((1 + N) / (1 + dq)) + 1);
                    z += x * x;
                }
                CHECK(t.at(r, cr.cols[k]) == doctest::Approx(raw / std::sqrt(z)).epsilon(1e-12));
            }
        }
        for (std::size_t a = 0; a < v.size(); ++a) {
            CHECK(v.idf(a) >= 1.0);
            for (std::size_t b = 0; b < v.size(); ++b)
                if (v.doc_freq()[a] <= v.doc_freq()[b]) CHECK(v.idf(a) >= v.idf(b));
            if (v.doc_freq()[a] == v.n_docs_fitted()) CHECK(v.idf(a) == 1.0);
        }
    }
}

TEST_CASE("permuting documents permutes rows and nothing else") {
    std::mt19937_64 gen(31);
    const auto docs = random_docs(gen, 25, 12);
    auto shuffled = docs;
    std::vector<std::size_t> perm(docs.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = docs[perm[i]];
    const auto v = fit_vocabulary(docs, {});
    CHECK(fit_vocabulary(shuffled, {}) == v);
    const auto a = transform_tfidf(transform_counts(docs, v), v);
    const auto b = transform_tfidf(transform_counts(shuffled, v), v);
    CHECK(a.select_rows(perm) == b);
}

TEST_CASE("stylometric examples") {
    const auto s = extract_stylo("The cat sat.", {}, {"the"});
    CHECK(s.avg_word_len == 3.0);
    CHECK(s.avg_sentence_len == 3.0);
    CHECK(s.stopword_ratio == doctest::Approx(1.0 / 3.0));
    CHECK(s.type_token_ratio == 1.0);
    CHECK(s.hapax_ratio == 1.0);
    CHECK(s.punct_per_token == 0.25);
    CHECK(s.digit_token_ratio == 0.0);
    CHECK(s.uppercase_char_ratio == doctest::Approx(1.0 / 9.0));
    CHECK(extract_stylo("", {}, {}) == StyloVector{});
    const auto one = extract_stylo("aaaa", {}, {});
    CHECK(one.type_token_ratio == 1.0);
    CHECK(one.hapax_ratio == 1.0);
    CHECK(one.avg_sentence_len == 1.0);
    CHECK(one.avg_word_len == 4.0);
}

TEST_CASE("stylometric ratios stay in range") {
    std::mt19937_64 gen(2);
    const std::vector<std::string> pieces = {"word ", "Word ", "the ", "42 ", ". ", "! ", "x1 ", "\xC3\x89t\xC3\xA9 ", ", "};
    for (int i = 0; i < 500; ++i) {
        std::string text;
        for (auto n = gen() % 30; n > 0; --n) text += pieces[gen() % pieces.size()];
        const auto v = extract_stylo(text, {}, {"the"}).values();
        for (std::size_t k = 0; k < v.size(); ++k) {
            CHECK(v[k] >= 0.0);
            if (k >= 2) CHECK(v[k] <= 1.0);
        }
    }
    const auto s = extract_stylo("a a b 7. c!", {}, {});
    CHECK(s.hapax_ratio == doctest::Approx(3.0 / 5.0));
    CHECK(s.type_token_ratio == doctest::Approx(4.0 / 5.0));
    CHECK(s.digit_token_ratio == doctest::Approx(1.0 / 5.0));
    CHECK(s.avg_sentence_len == doctest::Approx(2.5));
}

TEST_CASE("dense feature loading") {
    const auto d = parse_dense_features("{\"id\":\"a\",\"vec\":[1,2,3,4],\"label\":1}\n"
                                        "{\"id\":\"b\",\"vec\":[0.5,0,0,-1]}\n");
    CHECK(d.matrix.n_rows == 2);
    CHECK(d.matrix.n_cols == 4);
    CHECK(d.matrix(1, 3) == -1.0);
    CHECK(d.labels[0] == 1);
    CHECK_FALSE(d.labels[1].has_value());
    try {
        parse_dense_features("{\"id\":\"a\",\"vec\":[1,2,3,4]}\n{\"id\":\"b\",\"vec\":[1,2,3,4,5]}\n");
        FAIL("expected ragged-row error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_dense_features("{\"id\":\"a\",\"vec\":[1e999]}\n"), ParseError);
    CHECK_THROWS_AS(parse_dense_features("{\"id\":\"a\",\"vec\":[]}\n"), ParseError);
    CHECK_THROWS_AS(parse_dense_features("{\"id\":\"a\",\"vec\":[\"x\"]}\n"), ParseError);
    CHECK_THROWS_AS(parse_dense_features("{\"id\":\"a\",\"vec\":[1]}\n{\"id\":\"a\",\"vec\":[2]}\n"), DataError);
}

TEST_CASE("term frequency report examples") {
    const auto c = corpus_of({{"a a b", 0}, {"b c", 1}});
    const auto r = term_frequency_report(c, {}, 2);
    CHECK(r.overall == std::vector<TermCount>{{"a", 2}, {"b", 2}});
    CHECK(r.by_label[0] == std::vector<TermCount>{{"a", 2}, {"b", 1}});
    CHECK(r.by_label[1] == std::vector<TermCount>{{"b", 1}, {"c", 1}});
    CHECK(term_frequency_report(c, {}, 100).overall.size() == 3);
    CHECK_THROWS_AS(term_frequency_report(c, {}, 0), InvalidArgument);

    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["overall"] == nlohmann::json::parse(R"([["a",2],["b",2]])"));
    CHECK(j["by_label"]["1"][1] == nlohmann::json::parse(R"(["c",1])"));
    CHECK(r.to_csv() == "scope,term,count\noverall,a,2\noverall,b,2\n0,a,2\n0,b,1\n1,b,1\n1,c,1\n");
}

TEST_CASE("term frequency report matches a brute-force counter") {
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<std::string, int>> rows;
        for (int i = 0; i < 20; ++i) {
            std::string text;
            for (auto n = gen() % 10; n > 0; --n) text += "w" + std::to_string(gen() % 8) + " ";
            rows.emplace_back(text, static_cast<int>(gen() % 2));
        }
        const auto c = corpus_of(rows);
        const std::size_t k = 1 + gen() % 6;
        const auto r = term_frequency_report(c, {}, k);
        for (int scope = -1; scope < 2; ++scope) {
            std::map<std::string, std::size_t> counts;
            for (const auto& [text, label] : rows) {
                if (scope >= 0 && label != scope) continue;
                std::istringstream in(text);
                for (std::string w; in >> w;) ++counts[w];
            }
            std::vector<TermCount> all;
            for (const auto& [t, n] : counts) all.push_back({t, n});
            std::stable_sort(all.begin(), all.end(), [](const TermCount& a, const TermCount& b) {
                return a.count > b.count;
            });
            all.resize(std::min(all.size(), k));
            CHECK((scope < 0 ? r.overall : r.by_label[static_cast<std::size_t>(scope)]) == all);
        }
    }
}

TEST_CASE("feature extractor layouts") {
    const auto c = corpus_of({{"The cat sat. A dog ran!", 0}, {"ai text ai text", 1}, {"human text 42", 0}});
    for (const auto* name : {"counts", "tfidf", "stylo", "counts+stylo", "tfidf+stylo"}) {
        FeatureSpec spec;
        spec.kind = parse_feature_kind(name);
        CHECK(to_string(spec.kind) == name);
        const auto fx = FeatureExtractor::fit(c, {}, spec);
        const auto X = fx.transform(c);
        X.validate();
        CHECK(X.n_rows == 3);
        const std::size_t v = uses_vocabulary(spec.kind) ? fx.vocabulary().size() : 0;
        CHECK(X.n_cols == v + (uses_stylo(spec.kind) ? StyloVector::kSize : 0));
        CHECK(fx.n_cols() == X.n_cols);
        if (uses_stylo(spec.kind)) {
            CHECK(fx.feature_name(v) == "stylo:avg_word_len");
            CHECK(fx.standardize_from() == v);
            CHECK(X.at(1, v + 2) == 0.5); // type_token_ratio of "ai text ai text"
        } else {
            CHECK(fx.standardize_from() == X.n_cols);
            CHECK(fx.feature_name(0) == fx.vocabulary().terms()[0]);
        }
    }
    CHECK_THROWS_AS(parse_feature_kind("bigrams"), InvalidArgument);
    FeatureSpec dense;
    dense.kind = FeatureKind::Dense;
    CHECK_THROWS_AS(FeatureExtractor::fit(c, {}, dense), InvalidArgument);
    const auto fx = FeatureExtractor::for_dense(3);
    CHECK(fx.n_cols() == 3);
    CHECK(fx.standardize_from() == 0);
    CHECK(fx.feature_name(2) == "dense:2");
    CHECK_THROWS_AS(fx.transform_dense(DenseMatrix(2, 4)), DataError);
}

TEST_CASE("fit observer sees only training documents") {
    const auto train = corpus_of({{"alpha beta", 0}, {"gamma", 1}});
    Corpus test;
    test.add({"held-out", "delta alpha", 0});
    std::vector<std::string> seen;
    FeatureSpec spec;
    spec.kind = FeatureKind::TfidfStylo;
    const auto fx = FeatureExtractor::fit(train, {}, spec, [&](const Document& d) { seen.push_back(d.id); });
    CHECK(seen == std::vector<std::string>{"d0", "d1"});
    const auto before = fx.vocabulary();
    (void)fx.transform(test);
    CHECK(fx.vocabulary() == before);
    CHECK_FALSE(before.index_of("delta").has_value());
}
