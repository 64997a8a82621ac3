#include "aitd/corpus.hpp"
#include "aitd/error.hpp"
#include "aitd/preprocess.hpp"
#include "aitd/random.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <random>
#include <set>

using namespace aitd;

TEST_CASE("splitmix64 matches published reference outputs") {
    SplitMix64 rng(1234567);
    const std::uint64_t expected[] = {6457827717110365317ULL, 3203168211198807973ULL, 9817491932198370423ULL,
                                      4593380528125082431ULL, 16408922859458223821ULL};
    for (const auto e : expected) CHECK(rng.next() == e);
}

TEST_CASE("bounded draws stay in range and shuffles permute") {
    SplitMix64 rng(9);
    for (std::uint64_t n : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 5}) {
        for (int i = 0; i < 200; ++i) CHECK(rng.below(n) < n);
    }
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto w = v;
    shuffle(std::span<int>(w), rng);
    CHECK(w != v);
    std::sort(w.begin(), w.end());
    CHECK(w == v);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("two-row csv loads with label counts") {
    const auto c = parse_corpus("id,text,label\nd1,hello,0\nd2,world,1\n", CorpusFormat::Csv);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == Document{"d1", "hello", 0});
    CHECK(c[1] == Document{"d2", "world", 1});
    CHECK(c.label_counts() == std::array<std::size_t, 2>{1, 1});
}

TEST_CASE("header-only csv is an empty corpus") {
    CHECK(parse_corpus("id,text,label\n", CorpusFormat::Csv).empty());
    CHECK(parse_corpus("", CorpusFormat::Jsonl).empty());
}

TEST_CASE("label outside {0,1} is rejected at its line") {
    try {
        parse_corpus("id,text,label\nd1,a,0\nd2,b,2\n", CorpusFormat::Csv, "in.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    try {
        parse_corpus("{\"id\":\"a\",\"text\":\"x\",\"label\":1}\n{\"id\":\"b\",\"text\":\"y\",\"label\":3}\n",
                     CorpusFormat::Jsonl);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("malformed rows name their starting line") {
    // The quoted field spans lines 2-3, so the bad record starts at line 4.
    const std::string csv = "id,text,label\nd1,\"two\nlines\",0\nd2,only-two-fields\n";
    try {
        parse_corpus(csv, CorpusFormat::Csv);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    CHECK_THROWS_AS(parse_corpus("id,label\n", CorpusFormat::Csv), DataError);
    CHECK_THROWS_AS(parse_corpus("{\"id\":1,\"text\":\"x\"}\n", CorpusFormat::Jsonl), ParseError);
    CHECK_THROWS_AS(parse_corpus("not json\n", CorpusFormat::Jsonl), ParseError);
    CHECK_THROWS_AS(parse_corpus("id,text,label\nd1,\"unterminated,0\n", CorpusFormat::Csv), ParseError);
}

TEST_CASE("duplicate ids are named in the error") {
    try {
        parse_corpus("id,text,label\ndup,a,0\ndup,b,1\n", CorpusFormat::Csv);
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("dup") != std::string::npos);
    }
}

TEST_CASE("csv dialect: quotes, escapes, CRLF and unlabeled rows") {
    const auto c = parse_corpus("\xEF\xBB\xBFid,text,label\r\n"
                                "a,\"x, \"\"quoted\"\"\ny\",1\r\n"
                                "b,plain,\r\n",
                                CorpusFormat::Csv);
    REQUIRE(c.size() == 2);
    CHECK(c[0].text == "x, \"quoted\"\ny");
    CHECK_FALSE(c[1].label.has_value());
    CHECK_FALSE(c.fully_labeled());
    CHECK_THROWS_AS(c.labels(), DataError);

    const auto unlabeled = parse_corpus("id,text\nu1,hi\n", CorpusFormat::Csv);
    CHECK_FALSE(unlabeled[0].label.has_value());
    const auto j = parse_corpus("{\"id\":\"u\",\"text\":\"t\"}\n\n{\"id\":\"v\",\"text\":\"t\",\"label\":null}\n",
                                CorpusFormat::Jsonl);
    CHECK(j.size() == 2);
    CHECK(j.labeled_count() == 0);
}

namespace {

Corpus random_corpus(std::mt19937_64& gen, std::size_t n) {
    static const std::vector<std::string> pieces = {"a", "b", ",", "\"", "\n", " ", "é", "日本", "x y", "'", "\t", "0"};
    Corpus c;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        const auto len = gen() % 12;
        for (std::size_t k = 0; k < len; ++k) text += pieces[gen() % pieces.size()];
        std::optional<int> label;
        if (gen() % 4 != 0) label = static_cast<int>(gen() % 2);
        c.add({"id" + std::to_string(i) + (gen() % 2 ? ",q" : ""), text, label});
    }
    return c;
}

} // namespace

TEST_CASE("load -> save -> load round trip is the identity for both formats") {
    std::mt19937_64 gen(11);
    test::TempDir dir("corpus");
    for (int trial = 0; trial < 60; ++trial) {
        const auto c = random_corpus(gen, gen() % 20);
        for (const auto format : {CorpusFormat::Csv, CorpusFormat::Jsonl}) {
            const auto text = serialize_corpus(c, format);
            const auto back = parse_corpus(text, format);
            REQUIRE(back == c);
            CHECK(back.label_counts() == c.label_counts());
            CHECK(serialize_corpus(back, format) == text);
        }
    }
    const auto c = random_corpus(gen, 10);
    save_corpus(c, dir / "c.jsonl", CorpusFormat::Jsonl);
    CHECK(load_corpus(dir / "c.jsonl", CorpusFormat::Jsonl) == c);
    CHECK_THROWS_AS(load_corpus(dir / "missing.csv", CorpusFormat::Csv), DataError);
}

TEST_CASE("corpus invariants") {
    Corpus c;
    CHECK_THROWS_AS(c.add({"", "x", 0}), DataError);
    CHECK_THROWS_AS(c.add({"a", "x", 5}), DataError);
    c.add({"a", "x", 1});
    CHECK(c.contains("a"));
    CHECK_THROWS_AS(c.add({"a", "y", 0}), DataError);
    CHECK(corpus_format_for("x.csv") == CorpusFormat::Csv);
    CHECK(corpus_format_for("x.jsonl") == CorpusFormat::Jsonl);
    CHECK_THROWS_AS(corpus_format_for("x.txt"), InvalidArgument);
}

TEST_CASE("fingerprint is order and label sensitive") {
    Corpus a, b, c;
    a.add({"x", "t", 0});
    a.add({"y", "u", 1});
    b.add({"y", "u", 1});
    b.add({"x", "t", 0});
    c.add({"x", "t", 1});
    c.add({"y", "u", 1});
    CHECK(corpus_fingerprint(a) != corpus_fingerprint(b));
    CHECK(corpus_fingerprint(a) != corpus_fingerprint(c));
    CHECK(corpus_fingerprint(a) == corpus_fingerprint(Corpus(a.documents())));
}

TEST_CASE("fractions are exact rationals in (0,1)") {
    const auto q = Fraction::parse("0.25");
    CHECK(q.numerator() == 1);
    CHECK(q.denominator() == 4);
    CHECK(q.str() == "0.25");
    const auto third = Fraction::parse("1/3");
    CHECK(third.floor_times(9) == 3);
    CHECK(third.floor_times(10) == 3);
    CHECK(Fraction::parse("0.2").floor_times(5) == 1);
    CHECK(Fraction::parse("0.1").floor_times(30) == 3); // 30 * 0.1 = 3.0000000000000004 in doubles
    CHECK(Fraction::parse("0.7").floor_times(10) == 7); // 10 * 0.7 = 7.000000000000001 in doubles
    CHECK(Fraction::from_double(0.1).floor_times(30) == 3);
    for (const char* bad : {"0", "1", "1.5", "-0.2", "abc", "", "1/0", "3/2", "0.", ".", "2/4x"})
        CHECK_THROWS_AS(Fraction::parse(bad), InvalidArgument);
    CHECK(Fraction::parse("2/4").str() == "0.5");
    CHECK(Fraction::parse("2/6").str() == "1/3");
}

namespace {

Corpus labeled(std::size_t n0, std::size_t n1, std::mt19937_64& gen) {
    std::vector<int> labels(n0, 0);
    labels.insert(labels.end(), n1, 1);
    std::shuffle(labels.begin(), labels.end(), gen);
    Corpus c;
    for (std::size_t i = 0; i < labels.size(); ++i) c.add({"d" + std::to_string(i), "t", labels[i]});
    return c;
}

std::vector<std::string> ids(const Corpus& c) {
    std::vector<std::string> out;
    for (const auto& d : c) out.push_back(d.id);
    return out;
}

} // namespace

TEST_CASE("stratified split takes floor(count * fraction) per class") {
    std::mt19937_64 gen(3);
    const auto c = labeled(6, 4, gen);
    const auto r = stratified_split(c, {Fraction::parse("0.5"), 17});
    CHECK(r.test.label_counts() == std::array<std::size_t, 2>{3, 2});
    CHECK(r.train.label_counts() == std::array<std::size_t, 2>{3, 2});

    const auto big = labeled(600, 600, gen);
    const auto half = stratified_split(big, {Fraction::parse("1/2"), 42});
    // 300 per class in test: the per-class support of a 246/54/40/260 confusion matrix.
    CHECK(half.test.label_counts() == std::array<std::size_t, 2>{300, 300});
}

TEST_CASE("stratified split properties over random seeds and fractions") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n0 = 1 + gen() % 40, n1 = 1 + gen() % 40;
        const auto c = labeled(n0, n1, gen);
        const std::uint64_t den = 2 + gen() % 20;
        const std::uint64_t num = 1 + gen() % (den - 1);
        const SplitSpec spec{Fraction::parse(std::to_string(num) + "/" + std::to_string(den)), gen()};
        const auto r = stratified_split(c, spec);
        CHECK(r.test.label_counts()[0] == n0 * num / den);
        CHECK(r.test.label_counts()[1] == n1 * num / den);
        CHECK(r.train.size() + r.test.size() == c.size());

        std::set<std::string> all;
        for (const auto& id : ids(r.train)) all.insert(id);
        for (const auto& id : ids(r.test)) CHECK(all.insert(id).second);
        CHECK(all.size() == c.size());

        // Relative input order survives on both sides.
        const auto order = ids(c);
        for (const auto* side : {&r.train, &r.test}) {
            std::vector<std::size_t> pos;
            for (const auto& d : *side) pos.push_back(std::find(order.begin(), order.end(), d.id) - order.begin());
            CHECK(std::is_sorted(pos.begin(), pos.end()));
        }
        const auto again = stratified_split(c, spec);
        CHECK(again.train == r.train);
        CHECK(again.test == r.test);
    }
}

TEST_CASE("split determinism, seed sensitivity and errors") {
    std::mt19937_64 gen(8);
    const auto c = labeled(50, 50, gen);
    const SplitSpec spec{Fraction::parse("0.25"), 99};
    CHECK(serialize_corpus(stratified_split(c, spec).test, CorpusFormat::Csv) ==
          serialize_corpus(stratified_split(c, spec).test, CorpusFormat::Csv));
    CHECK(stratified_split(c, spec).test != stratified_split(c, {Fraction::parse("0.25"), 100}).test);

    Corpus unl = c;
    unl.add({"u", "t", std::nullopt});
    CHECK_THROWS_AS(stratified_split(unl, spec), DataError);
    CHECK_THROWS_AS(stratified_split(labeled(5, 0, gen), spec), DataError);
}

TEST_CASE("split manifest records seed, fraction and per-class counts") {
    std::mt19937_64 gen(1);
    const SplitSpec spec{Fraction::parse("0.5"), 42};
    const auto r = stratified_split(labeled(300, 300, gen), spec);
    const auto j = nlohmann::json::parse(split_manifest_json(spec, r));
    CHECK(j["seed"] == 42);
    CHECK(j["generator"] == "splitmix64");
    CHECK(j["test_fraction"] == "0.5");
    CHECK(j["test"]["per_class"]["0"] == 150);
    CHECK(j["test"]["per_class"]["1"] == 150);
    CHECK(j["train"]["documents"] == 300);
}

TEST_CASE("synthetic generator is deterministic with the requested counts") {
    CHECK(generate_synthetic_corpus(1, 7) == generate_synthetic_corpus(1, 7));
    CHECK(generate_synthetic_corpus(5, 7) != generate_synthetic_corpus(5, 8));
    const auto c = generate_synthetic_corpus(300, 42);
    CHECK(c.size() == 600);
    CHECK(c.label_counts() == std::array<std::size_t, 2>{300, 300});
    CHECK_THROWS_AS(generate_synthetic_corpus(0, 1), InvalidArgument);
    SyntheticParams bad;
    bad.overlap = 1.5;
    CHECK_THROWS_AS(generate_synthetic_corpus(3, 1, bad), InvalidArgument);
}

TEST_CASE("overlap 0 makes one marker token a perfect class test") {
    SyntheticParams p;
    p.overlap = 0.0;
    p.digit_rate = 0.0;
    const auto c = generate_synthetic_corpus(100, 3, p);
    const auto ai = synthetic_marker_terms(p, 1);
    const auto human = synthetic_marker_terms(p, 0);
    const std::set<std::string> ai_set(ai.begin(), ai.end()), human_set(human.begin(), human.end());
    for (const auto& t : ai) CHECK_FALSE(human_set.contains(t));
    for (const auto& d : c) {
        bool has_ai = false, has_human = false;
        for (const auto& tok : preprocess(d.text, {}).tokens) {
            has_ai |= ai_set.contains(tok);
            has_human |= human_set.contains(tok);
        }
        CHECK(has_ai == (*d.label == 1));
        CHECK(has_human == (*d.label == 0));
    }
}
