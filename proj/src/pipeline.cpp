#include "aitd/pipeline.hpp"

#include "aitd/error.hpp"

namespace aitd {

ModelKind parse_model_kind(std::string_view name) {
    if (name == "gbdt") return ModelKind::Gbdt;
    if (name == "svm") return ModelKind::Svm;
    throw InvalidArgument("unknown algorithm '" + std::string(name) + "' (expected gbdt or svm)");
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Gbdt ? "gbdt" : "svm"; }

ModelKind TrainedModel::kind() const noexcept {
    return std::holds_alternative<GbdtModel>(classifier) ? ModelKind::Gbdt : ModelKind::Svm;
}

std::string_view TrainedModel::score_kind() const noexcept {
    return kind() == ModelKind::Gbdt ? "probability" : "decision";
}

double TrainedModel::default_threshold() const noexcept { return kind() == ModelKind::Gbdt ? 0.5 : 0.0; }

std::vector<double> TrainedModel::scores(const SparseMatrix& X) const {
    if (const auto* g = std::get_if<GbdtModel>(&classifier)) return predict_proba_gbdt(*g, X);
    return decision_function(std::get<SvmModel>(classifier), X);
}

std::vector<double> TrainedModel::scores(const Corpus& docs) const {
    return scores(features.transform(docs));
}

std::vector<double> TrainedModel::scores(const DenseMatrix& embeddings) const {
    return scores(features.transform_dense(embeddings));
}

std::vector<int> threshold_scores(std::span<const double> scores, double threshold) {
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= threshold ? 1 : 0;
    return out;
}

namespace {

TrainedModel fit_classifier(FeatureExtractor features, const SparseMatrix& X, std::span<const int> y,
                            const TrainOptions& options) {
    TrainedModel model;
    if (options.algo == ModelKind::Gbdt) {
        auto params = options.gbdt;
        params.seed = options.seed;
        // Trees are scale-invariant; no standardization.
        model.classifier = train_gbdt(X, y, params);
    } else {
        auto params = options.svm;
        params.seed = options.seed;
        const auto from = features.standardize_from();
        model.classifier = train_svm(X, y, params, from < X.n_cols ? from : kNoStandardization);
    }
    model.features = std::move(features);
    model.meta.seed = options.seed;
    model.meta.stopword_hash = stopword_hash(model.features.config().stopword_list);
    model.meta.n_train_docs = X.n_rows;
    return model;
}

} // namespace

TrainedModel train_model(const Corpus& train, const TrainOptions& options, const FitObserver& observer) {
    if (options.features.kind == FeatureKind::Dense)
        throw InvalidArgument("dense features require an embeddings file");
    const auto labels = train.labels();
    auto features = FeatureExtractor::fit(train, options.preprocess, options.features, observer);
    const auto X = features.transform(train);
    auto model = fit_classifier(std::move(features), X, labels, options);
    model.meta.corpus_fingerprint = corpus_fingerprint(train);
    return model;
}

TrainedModel train_model_dense(const DenseFeatures& embeddings, std::span<const int> labels,
                               const TrainOptions& options) {
    if (options.features.kind != FeatureKind::Dense)
        throw InvalidArgument("train_model_dense needs the dense feature kind");
    if (labels.size() != embeddings.matrix.n_rows) throw DataError("one label per embedding row required");
    auto features = FeatureExtractor::for_dense(embeddings.matrix.n_cols);
    const auto X = features.transform_dense(embeddings.matrix);
    auto model = fit_classifier(std::move(features), X, labels, options);

    Corpus ids;
    for (std::size_t i = 0; i < embeddings.ids.size(); ++i) ids.add({embeddings.ids[i], {}, labels[i]});
    model.meta.corpus_fingerprint = corpus_fingerprint(ids);
    return model;
}

std::vector<int> ModelPredictor::predict_labels(const Corpus& docs) const {
    return threshold_scores(model_.scores(docs), threshold_);
}

EvalReport evaluate(const Predictor& predictor, const Corpus& labeled) {
    const auto truth = labeled.labels();
    const auto predicted = predictor.predict_labels(labeled);
    return report(confusion(truth, predicted));
}

} // namespace aitd
