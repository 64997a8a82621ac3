#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aitd {

/// Class 1 (AI-generated) is the positive class.
struct ConfusionMatrix {
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tp = 0;

    std::uint64_t total() const noexcept { return tn + fp + fn + tp; }
    bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;

    bool operator==(const ClassMetrics&) const = default;
};

struct MacroMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const MacroMetrics&) const = default;
};

struct EvalReport {
    ConfusionMatrix confusion;
    std::array<ClassMetrics, 2> classes;
    double accuracy = 0.0;
    MacroMetrics macro;

    bool operator==(const EvalReport&) const = default;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

/// Per-class precision, recall and F1, accuracy, and unweighted macro means.
/// A 0/0 ratio is defined as 0.
EvalReport report(const ConfusionMatrix& cm);

/// Pooled over both classes; equal to accuracy for single-label binary data.
double micro_precision(const ConfusionMatrix& cm);
double micro_recall(const ConfusionMatrix& cm);

struct RankedModel {
    std::string name;
    double accuracy = 0.0;

    bool operator==(const RankedModel&) const = default;
};

/// Descending accuracy, ties by name ascending.
std::vector<RankedModel> compare_models(std::vector<RankedModel> entries);

/// `{"confusion": {...}, "classes": {"0": {...}, "1": {...}}, "accuracy": ..,
/// "macro": {...}}` with full double precision, plus a "ranking" array when
/// one is given.
std::string report_to_json(const EvalReport& r, std::span<const RankedModel> ranking = {});
EvalReport report_from_json(std::string_view json_text);

/// Two-decimal table with one row per class (precision, recall, F1) and the
/// accuracy on the first row.
std::string render_table(const EvalReport& r, std::string_view algorithm);

} // namespace aitd
