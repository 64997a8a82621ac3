#include "aitd/metrics.hpp"

#include "aitd/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>

namespace aitd {

using json = nlohmann::ordered_json;

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) {
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

} // namespace

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size())
        throw DataError("label vectors differ in length (" + std::to_string(y_true.size()) + " vs " +
                        std::to_string(y_pred.size()) + ")");
    if (y_true.empty()) throw DataError("confusion matrix needs at least one label");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw DataError("labels must be 0 or 1");
        if (t == 1) (p == 1 ? cm.tp : cm.fn)++;
        else (p == 1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

EvalReport report(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("cannot report on an empty confusion matrix");
    EvalReport r;
    r.confusion = cm;
    auto& c0 = r.classes[0];
    auto& c1 = r.classes[1];
    c1.precision = ratio(cm.tp, cm.tp + cm.fp);
    c1.recall = ratio(cm.tp, cm.tp + cm.fn);
    c0.precision = ratio(cm.tn, cm.tn + cm.fn);
    c0.recall = ratio(cm.tn, cm.tn + cm.fp);
    c0.f1 = harmonic(c0.precision, c0.recall);
    c1.f1 = harmonic(c1.precision, c1.recall);
    c0.support = cm.tn + cm.fp;
    c1.support = cm.tp + cm.fn;
    r.accuracy = ratio(cm.tp + cm.tn, cm.total());
    r.macro.precision = (c0.precision + c1.precision) / 2.0;
    r.macro.recall = (c0.recall + c1.recall) / 2.0;
    r.macro.f1 = (c0.f1 + c1.f1) / 2.0;
    return r;
}

double micro_precision(const ConfusionMatrix& cm) {
    // Correct predictions of each class over all predictions of each class.
    return ratio(cm.tp + cm.tn, (cm.tp + cm.fp) + (cm.tn + cm.fn));
}

double micro_recall(const ConfusionMatrix& cm) {
    return ratio(cm.tp + cm.tn, (cm.tp + cm.fn) + (cm.tn + cm.fp));
}

std::vector<RankedModel> compare_models(std::vector<RankedModel> entries) {
    std::stable_sort(entries.begin(), entries.end(), [](const RankedModel& a, const RankedModel& b) {
        return a.accuracy != b.accuracy ? a.accuracy > b.accuracy : a.name < b.name;
    });
    return entries;
}

std::string report_to_json(const EvalReport& r, std::span<const RankedModel> ranking) {
    const auto cls = [](const ClassMetrics& c) {
        json j;
        j["precision"] = c.precision;
        j["recall"] = c.recall;
        j["f1"] = c.f1;
        j["support"] = c.support;
        return j;
    };
    json j;
    j["confusion"] = {{"tn", r.confusion.tn}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn},
                      {"tp", r.confusion.tp}};
    j["classes"] = {{"0", cls(r.classes[0])}, {"1", cls(r.classes[1])}};
    j["accuracy"] = r.accuracy;
    j["macro"] = {{"precision", r.macro.precision}, {"recall", r.macro.recall}, {"f1", r.macro.f1}};
    if (!ranking.empty()) {
        json rows = json::array();
        for (const auto& m : ranking) rows.push_back({{"name", m.name}, {"accuracy", m.accuracy}});
        j["ranking"] = std::move(rows);
    }
    return j.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view json_text) {
    try {
        const auto j = json::parse(json_text);
        EvalReport r;
        const auto& cm = j.at("confusion");
        r.confusion = {cm.at("tn").get<std::uint64_t>(), cm.at("fp").get<std::uint64_t>(),
                       cm.at("fn").get<std::uint64_t>(), cm.at("tp").get<std::uint64_t>()};
        for (int c = 0; c < 2; ++c) {
            const auto& k = j.at("classes").at(std::to_string(c));
            r.classes[static_cast<std::size_t>(c)] = {k.at("precision").get<double>(), k.at("recall").get<double>(),
                                                      k.at("f1").get<double>(), k.at("support").get<std::uint64_t>()};
        }
        r.accuracy = j.at("accuracy").get<double>();
        const auto& m = j.at("macro");
        r.macro = {m.at("precision").get<double>(), m.at("recall").get<double>(), m.at("f1").get<double>()};
        return r;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed report JSON: ") + e.what());
    }
}

std::string render_table(const EvalReport& r, std::string_view algorithm) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "%-16s %-5s %9s %6s %8s %8s\n", "Algorithm Name", "Class",
                  "Precision", "Recall", "F1 Score", "Accuracy");
    out += buf;
    for (int c = 0; c < 2; ++c) {
        const auto& m = r.classes[static_cast<std::size_t>(c)];
        std::snprintf(buf, sizeof(buf), "%-16.16s %-5d %9.2f %6.2f %8.2f", c == 0 ? std::string(algorithm).c_str() : "",
                      c, m.precision, m.recall, m.f1);
        out += buf;
        if (c == 0) {
            std::snprintf(buf, sizeof(buf), " %8.2f", r.accuracy);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace aitd
