#include "aitd/error.hpp"
#include "aitd/metrics.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <random>

using namespace aitd;

namespace {

std::string two(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Precision, recall and F1 of one class formatted as in the published table.
std::string row(const ClassMetrics& m) { return two(m.precision) + "/" + two(m.recall) + "/" + two(m.f1); }

ConfusionMatrix swapped(const ConfusionMatrix& cm) { return {cm.tp, cm.fn, cm.fp, cm.tn}; }

ConfusionMatrix random_matrix(std::mt19937_64& gen) {
    std::uniform_int_distribution<std::uint64_t> d(0, 400);
    ConfusionMatrix cm;
    do {
        // Mix in zero cells so 0/0 conventions are exercised too.
        const auto pick = [&] { return gen() % 5 == 0 ? 0 : d(gen); };
        cm = {pick(), pick(), pick(), pick()};
    } while (cm.total() == 0);
    return cm;
}

} // namespace

TEST_CASE("boosted-tree confusion counts reproduce the published row") {
    const auto r = report({246, 54, 40, 260});
    CHECK(r.accuracy == doctest::Approx(0.84333).epsilon(1e-5));
    CHECK(std::abs(r.accuracy - 0.8433) <= 1e-4);
    CHECK(r.classes[0].precision == doctest::Approx(246.0 / 286.0));
    CHECK(r.classes[0].recall == doctest::Approx(0.82));
    CHECK(r.classes[1].precision == doctest::Approx(260.0 / 314.0));
    CHECK(r.classes[1].recall == doctest::Approx(260.0 / 300.0));
    CHECK(row(r.classes[0]) == "0.86/0.82/0.84");
    CHECK(row(r.classes[1]) == "0.83/0.87/0.85");
    CHECK(two(r.accuracy) == "0.84");
    CHECK(r.classes[0].support == 300);
    CHECK(r.classes[1].support == 300);
}

TEST_CASE("linear classifier confusion counts reproduce the published row") {
    const auto r = report({249, 51, 65, 235});
    CHECK(r.accuracy == doctest::Approx(0.80667).epsilon(1e-5));
    CHECK(std::abs(r.accuracy - 0.8067) <= 1e-4);
    CHECK(r.classes[0].precision == doctest::Approx(249.0 / 314.0));
    CHECK(r.classes[0].f1 == doctest::Approx(0.811).epsilon(1e-3));
    CHECK(r.classes[1].f1 == doctest::Approx(0.802).epsilon(1e-3));
    CHECK(row(r.classes[0]) == "0.79/0.83/0.81");
    CHECK(row(r.classes[1]) == "0.82/0.78/0.80");
    CHECK(two(r.accuracy) == "0.81");
}

TEST_CASE("perfect and degenerate matrices") {
    const auto r = report({5, 0, 0, 5});
    for (const auto& c : r.classes) {
        CHECK(c.precision == 1.0);
        CHECK(c.recall == 1.0);
        CHECK(c.f1 == 1.0);
    }
    CHECK(r.accuracy == 1.0);
    CHECK(r.macro == MacroMetrics{1.0, 1.0, 1.0});

    // Nothing predicted positive: class-1 precision is 0/0.
    const auto z = report({3, 0, 4, 0});
    CHECK(z.classes[1].precision == 0.0);
    CHECK(z.classes[1].recall == 0.0);
    CHECK(z.classes[1].f1 == 0.0);
    CHECK(z.classes[0].recall == 1.0);
    CHECK_THROWS_AS(report({}), DataError);
}

TEST_CASE("confusion examples and errors") {
    CHECK(confusion(std::vector<int>{0, 1}, std::vector<int>{0, 1}) == ConfusionMatrix{1, 0, 0, 1});
    CHECK(confusion(std::vector<int>{0, 0, 1}, std::vector<int>{1, 1, 1}) == ConfusionMatrix{0, 2, 0, 1});
    CHECK_THROWS_AS(confusion(std::vector<int>{0, 1}, std::vector<int>{0}), DataError);
    CHECK_THROWS_AS(confusion(std::vector<int>{}, std::vector<int>{}), DataError);
    CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{0}), DataError);
    CHECK_THROWS_AS(confusion(std::vector<int>{0}, std::vector<int>{-1}), DataError);
}

TEST_CASE("confusion agrees with a brute-force tally") {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> t(1000), p(1000);
        std::uint64_t cells[2][2] = {};
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = static_cast<int>(gen() % 2);
            p[i] = static_cast<int>(gen() % 2);
            ++cells[t[i]][p[i]];
        }
        const auto cm = confusion(t, p);
        CHECK(cm.tn == cells[0][0]);
        CHECK(cm.fp == cells[0][1]);
        CHECK(cm.fn == cells[1][0]);
        CHECK(cm.tp == cells[1][1]);
    }
}

TEST_CASE("class swap, count scaling and micro averages") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 1500; ++trial) {
        const auto cm = random_matrix(gen);
        const auto r = report(cm);
        const auto s = report(swapped(cm));
        CHECK(s.classes[0] == r.classes[1]);
        CHECK(s.classes[1] == r.classes[0]);
        CHECK(s.accuracy == r.accuracy);
        CHECK(s.macro.precision == doctest::Approx(r.macro.precision));
        CHECK(s.macro.recall == doctest::Approx(r.macro.recall));
        CHECK(s.macro.f1 == doctest::Approx(r.macro.f1));

        const std::uint64_t k = 1 + gen() % 50;
        const auto scaled = report({cm.tn * k, cm.fp * k, cm.fn * k, cm.tp * k});
        for (std::size_t c = 0; c < 2; ++c) {
            CHECK(scaled.classes[c].precision == doctest::Approx(r.classes[c].precision).epsilon(1e-12));
            CHECK(scaled.classes[c].recall == doctest::Approx(r.classes[c].recall).epsilon(1e-12));
            CHECK(scaled.classes[c].f1 == doctest::Approx(r.classes[c].f1).epsilon(1e-12));
            CHECK(scaled.classes[c].support == k * r.classes[c].support);
        }
        CHECK(scaled.accuracy == doctest::Approx(r.accuracy).epsilon(1e-12));

        CHECK(r.accuracy == static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total()));
        CHECK(micro_precision(cm) == r.accuracy);
        CHECK(micro_recall(cm) == r.accuracy);

        for (const auto& c : r.classes) {
            CHECK(c.precision >= 0.0);
            CHECK(c.precision <= 1.0);
            CHECK(c.recall >= 0.0);
            CHECK(c.recall <= 1.0);
            if (c.precision + c.recall == 0.0) {
                CHECK(c.f1 == 0.0);
            } else {
                CHECK(c.f1 >= std::min(c.precision, c.recall) - 1e-15);
                CHECK(c.f1 <= std::max(c.precision, c.recall) + 1e-15);
            }
        }
        CHECK(r.classes[0].support == cm.tn + cm.fp);
        CHECK(r.classes[1].support == cm.tp + cm.fn);
    }
}

TEST_CASE("model ranking") {
    const auto two_models = compare_models({{"svm", 0.8067}, {"gbdt", 0.8433}});
    CHECK(two_models == std::vector<RankedModel>{{"gbdt", 0.8433}, {"svm", 0.8067}});
    CHECK(compare_models({{"only", 0.5}}) == std::vector<RankedModel>{{"only", 0.5}});
    const auto with_external = compare_models({{"gbdt", 0.8433}, {"svm", 0.8067}, {"bert", 0.93}});
    CHECK(with_external.front().name == "bert");
    CHECK(with_external[1].name == "gbdt");
    const auto tie = compare_models({{"zeta", 0.9}, {"alpha", 0.9}, {"mid", 0.95}});
    CHECK(tie == std::vector<RankedModel>{{"mid", 0.95}, {"alpha", 0.9}, {"zeta", 0.9}});
}

TEST_CASE("report JSON schema and round trip") {
    const auto r = report({246, 54, 40, 260});
    const std::vector<RankedModel> ranking = {{"gbdt", r.accuracy}, {"svm", 0.8067}};
    const auto text = report_to_json(r, ranking);
    const auto j = nlohmann::ordered_json::parse(text);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"confusion", "classes", "accuracy", "macro", "ranking"});
    CHECK(j["confusion"]["tn"] == 246);
    CHECK(j["classes"]["1"]["support"] == 300);
    CHECK(j["ranking"][1]["name"] == "svm");
    // Full precision survives the trip.
    CHECK(j["accuracy"].get<double>() == r.accuracy);
    CHECK(report_from_json(text) == r);
    CHECK_FALSE(nlohmann::json::parse(report_to_json(r)).contains("ranking"));

    std::mt19937_64 gen(2);
    for (int i = 0; i < 200; ++i) {
        const auto x = report(random_matrix(gen));
        CHECK(report_from_json(report_to_json(x)) == x);
    }
    CHECK_THROWS_AS(report_from_json("{}"), DataError);
    CHECK_THROWS_AS(report_from_json("not json"), DataError);
}

TEST_CASE("rendered table mirrors the published layout") {
    const auto t = render_table(report({246, 54, 40, 260}), "XGB Classifier");
    CHECK(t == "Algorithm Name   Class Precision Recall F1 Score Accuracy\n"
               "XGB Classifier   0          0.86   0.82     0.84     0.84\n"
               "                 1          0.83   0.87     0.85\n");
    const auto perfect = render_table(report({5, 0, 0, 5}), "gbdt");
    CHECK(perfect.find("1.00   1.00     1.00     1.00") != std::string::npos);
}
