#pragma once

#include "aitd/features.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace aitd {

struct SvmParams {
    double lambda = 1e-4;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const SvmParams&) const = default;
};

/// Columns [begin, begin + mean.size()) are mapped to (x - mean) / scale
/// before the dot product. Zero-variance columns get scale 1.
struct Standardization {
    std::size_t begin = 0;
    std::vector<double> mean;
    std::vector<double> scale;

    bool empty() const noexcept { return mean.empty(); }
    bool operator==(const Standardization&) const = default;
};

struct SvmModel {
    SvmParams params;
    std::vector<double> weights;
    double bias = 0.0;
    Standardization standardization;

    bool operator==(const SvmModel&) const = default;
};

inline constexpr std::size_t kNoStandardization = std::numeric_limits<std::size_t>::max();

/// Primal linear SVM, labels mapped 0 -> -1 and 1 -> +1. Minimizes
///   (lambda / 2) |w|^2 + (1 / n) sum max(0, 1 - y (w.x + b))
/// with Pegasos steps 1 / (lambda t), projection onto the ball of radius
/// 1 / sqrt(lambda), an unregularized bias that follows its own subgradient
/// and is clipped to 1 + max|x| / sqrt(lambda), and a fresh SplitMix64 shuffle every epoch. The returned (w, b) is the
/// average of all per-step iterates.
///
/// Columns from `standardize_from` to the end are standardized with
/// training-set mean and population standard deviation.
SvmModel train_svm(const SparseMatrix& X, std::span<const int> y, const SvmParams& params,
                   std::size_t standardize_from = kNoStandardization);

/// Applies the model's standardization; the block becomes dense.
SparseMatrix apply_standardization(const Standardization& s, const SparseMatrix& X);

/// w.x + b per row, on standardized inputs.
std::vector<double> decision_function(const SvmModel& model, const SparseMatrix& X);

/// Label 1 iff decision >= threshold (a zero decision goes to class 1).
std::vector<int> predict_label_svm(const SvmModel& model, const SparseMatrix& X, double threshold = 0.0);

/// Regularized hinge objective of the model on (X, y); the zero model scores 1.
double svm_objective(const SvmModel& model, const SparseMatrix& X, std::span<const int> y);

} // namespace aitd
