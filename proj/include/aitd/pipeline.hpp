#pragma once

#include "aitd/corpus.hpp"
#include "aitd/features.hpp"
#include "aitd/gbdt.hpp"
#include "aitd/metrics.hpp"
#include "aitd/svm.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aitd {

enum class ModelKind { Gbdt, Svm };

ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind);

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::uint64_t corpus_fingerprint = 0;
    std::uint64_t stopword_hash = 0;
    std::size_t n_train_docs = 0;

    bool operator==(const TrainingMeta&) const = default;
};

/// Everything needed to reproduce predictions: fitted feature space plus the
/// classifier parameters.
struct TrainedModel {
    FeatureExtractor features;
    std::variant<GbdtModel, SvmModel> classifier;
    TrainingMeta meta;

    ModelKind kind() const noexcept;
    /// "probability" for gbdt, "decision" for svm.
    std::string_view score_kind() const noexcept;
    /// 0.5 on probabilities, 0.0 on decision values.
    double default_threshold() const noexcept;

    std::vector<double> scores(const SparseMatrix& X) const;
    std::vector<double> scores(const Corpus& docs) const;
    std::vector<double> scores(const DenseMatrix& embeddings) const;
};

std::vector<int> threshold_scores(std::span<const double> scores, double threshold);

struct TrainOptions {
    ModelKind algo = ModelKind::Gbdt;
    PreprocessConfig preprocess;
    FeatureSpec features;
    GbdtParams gbdt;
    SvmParams svm;
    /// Overrides the per-classifier seeds.
    std::uint64_t seed = 42;
};

/// Fits preprocessing and vocabulary on `train` only, then the classifier.
TrainedModel train_model(const Corpus& train, const TrainOptions& options, const FitObserver& observer = {});

/// Trains on precomputed embeddings. `options.features.kind` must be Dense.
TrainedModel train_model_dense(const DenseFeatures& embeddings, std::span<const int> labels,
                               const TrainOptions& options);

/// Anything that labels a corpus; lets evaluation run on stub predictors.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::vector<int> predict_labels(const Corpus& docs) const = 0;
};

class ModelPredictor final : public Predictor {
public:
    ModelPredictor(const TrainedModel& model, double threshold) : model_(model), threshold_(threshold) {}
    std::vector<int> predict_labels(const Corpus& docs) const override;

private:
    const TrainedModel& model_;
    double threshold_;
};

/// Predicts the labeled corpus and reports. Throws DataError on unlabeled rows.
EvalReport evaluate(const Predictor& predictor, const Corpus& labeled);

} // namespace aitd
