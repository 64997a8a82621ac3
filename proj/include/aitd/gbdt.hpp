#pragma once

#include "aitd/features.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aitd {

struct GbdtParams {
    std::size_t n_rounds = 100;
    std::size_t max_depth = 3;
    double learning_rate = 0.3;
    /// L2 penalty on leaf weights.
    double lambda = 1.0;
    /// Minimum gain a split must clear.
    double gamma = 0.0;
    double min_child_hessian = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const GbdtParams&) const = default;
};

/// Internal nodes send `value <= threshold` left. Leaves carry the raw Newton
/// weight -G / (H + lambda); the learning rate is applied at prediction.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double weight = 0.0;
    double gain = 0.0;
    double cover = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    /// Nodes in breadth-first creation order; node 0 is the root.
    std::vector<TreeNode> nodes;

    /// Weight of the leaf reached by a row given as a dense lookup.
    double leaf_weight(std::span<const double> dense_row) const;
    std::size_t depth() const;

    bool operator==(const Tree&) const = default;
};

struct GbdtModel {
    GbdtParams params;
    std::size_t n_features = 0;
    /// Log-odds of the class-1 prior.
    double base_score = 0.0;
    std::vector<Tree> trees;

    bool operator==(const GbdtModel&) const = default;
};

struct GbdtTrace {
    /// Mean training log-loss before the first tree and after every round.
    std::vector<double> train_logloss;
};

/// Second-order boosting on the logistic loss with exact greedy splits.
/// Candidate thresholds are midpoints between consecutive distinct values of
/// a feature within a node (implicit zeros form one bucket). Gains within a
/// relative 1e-10 of each other are ties, resolved toward the lower feature
/// index and then the lower threshold.
GbdtModel train_gbdt(const SparseMatrix& X, std::span<const int> y, const GbdtParams& params,
                     GbdtTrace* trace = nullptr);
GbdtModel train_gbdt(const DenseMatrix& X, std::span<const int> y, const GbdtParams& params,
                     GbdtTrace* trace = nullptr);

/// base_score + learning_rate * sum of leaf weights, per row.
std::vector<double> predict_margin_gbdt(const GbdtModel& model, const SparseMatrix& X);
std::vector<double> predict_proba_gbdt(const GbdtModel& model, const SparseMatrix& X);
std::vector<double> predict_proba_gbdt(const GbdtModel& model, const DenseMatrix& X);
/// Label 1 iff probability >= threshold.
std::vector<int> predict_label_gbdt(const GbdtModel& model, const SparseMatrix& X, double threshold = 0.5);

/// Total split gain per feature across the ensemble.
std::vector<double> feature_gain(const GbdtModel& model);

double sigmoid(double x) noexcept;

} // namespace aitd
