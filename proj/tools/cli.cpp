#include "cli.hpp"

#include "aitd/error.hpp"
#include "aitd/features.hpp"
#include "aitd/model_store.hpp"
#include "aitd/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace aitd::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct PreprocessFlags {
    bool keep_punct = false;
    bool no_lowercase = false;
    bool remove_stopwords = false;
    bool stem = false;
    std::string stopwords_path;

    void attach(CLI::App& app) {
        app.add_flag("--keep-punct", keep_punct, "Keep punctuation tokens");
        app.add_flag("--no-lowercase", no_lowercase, "Disable lowercasing");
        app.add_flag("--remove-stopwords", remove_stopwords, "Drop stopwords before counting");
        app.add_flag("--stem", stem, "Apply the Porter stemmer");
        app.add_option("--stopwords", stopwords_path, "Stopword list file (default: bundled English list)")
            ->check(CLI::ExistingFile);
    }

    PreprocessConfig config() const {
        PreprocessConfig c;
        c.lowercase = !no_lowercase;
        c.strip_punct_tokens = !keep_punct;
        c.remove_stopwords = remove_stopwords;
        c.stem = stem;
        if (!stopwords_path.empty()) c.stopword_list = load_stopwords(stopwords_path);
        return c;
    }
};

CorpusFormat resolve_format(const std::string& flag, const fs::path& path) {
    return flag.empty() ? corpus_format_for(path) : parse_corpus_format(flag);
}

std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f s", s);
    return buf;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

double accuracy_of(std::span<const int> truth, std::span<const int> predicted) {
    return report(confusion(truth, predicted)).accuracy;
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const std::string& flag) {
    const auto eq = text.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
        throw InvalidArgument(flag + " expects NAME=VALUE, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

/// Labels for dense rows: taken from the embeddings file, falling back to the
/// corpus row with the same id.
std::vector<int> dense_labels(const DenseFeatures& dense, const Corpus* corpus) {
    std::unordered_map<std::string_view, int> by_id;
    if (corpus)
        for (const auto& d : *corpus)
            if (d.label) by_id.emplace(d.id, *d.label);
    std::vector<int> labels;
    labels.reserve(dense.ids.size());
    for (std::size_t i = 0; i < dense.ids.size(); ++i) {
        if (dense.labels[i]) {
            labels.push_back(*dense.labels[i]);
            continue;
        }
        const auto it = by_id.find(dense.ids[i]);
        if (it == by_id.end()) throw DataError("no label for embedding row '" + dense.ids[i] + "'");
        labels.push_back(it->second);
    }
    return labels;
}

std::string describe_params(const TrainedModel& m) {
    std::ostringstream os;
    if (const auto* g = std::get_if<GbdtModel>(&m.classifier)) {
        os << "n_rounds " << g->params.n_rounds << ", max_depth " << g->params.max_depth << ", learning_rate "
           << format_double(g->params.learning_rate) << ", lambda " << format_double(g->params.lambda)
           << ", gamma " << format_double(g->params.gamma) << ", min_child_hessian "
           << format_double(g->params.min_child_hessian);
    } else {
        const auto& s = std::get<SvmModel>(m.classifier);
        os << "lambda " << format_double(s.params.lambda) << ", epochs " << s.params.epochs;
    }
    return os.str();
}

// ---------------------------------------------------------------- commands

struct SplitArgs {
    std::string input, format, test_fraction = "0.2", out_train, out_test, manifest;
    std::uint64_t seed = 42;
};

int cmd_split(const SplitArgs& a, std::ostream& out) {
    const SplitSpec spec{Fraction::parse(a.test_fraction), a.seed};
    const auto format = resolve_format(a.format, a.input);
    const auto corpus = load_corpus(a.input, format);
    const auto result = stratified_split(corpus, spec);
    save_corpus(result.train, a.out_train, format);
    save_corpus(result.test, a.out_test, format);
    const fs::path manifest =
        a.manifest.empty() ? fs::path(a.out_test).parent_path() / "split_manifest.json" : fs::path(a.manifest);
    write_file_atomic(manifest, split_manifest_json(spec, result));
    out << "split " << corpus.size() << " documents: train " << result.train.size() << ", test "
        << result.test.size() << " (manifest " << manifest.string() << ")\n";
    return kOk;
}

struct TrainArgs {
    std::string input, format, algo = "gbdt", features = "counts", dense, model;
    std::uint64_t seed = 42;
    std::size_t min_df = 1;
    std::optional<std::size_t> max_vocab;
    PreprocessFlags pre;
    GbdtParams gbdt;
    SvmParams svm;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    TrainOptions options;
    options.algo = parse_model_kind(a.algo);
    options.features.kind = parse_feature_kind(a.features);
    options.features.min_df = a.min_df;
    options.features.max_vocab = a.max_vocab;
    options.features.validate();
    options.gbdt = a.gbdt;
    options.svm = a.svm;
    options.seed = a.seed;

    const auto started = std::chrono::steady_clock::now();
    TrainedModel model;
    double train_accuracy = 0;
    std::size_t n_docs = 0;
    if (options.features.kind == FeatureKind::Dense) {
        if (a.dense.empty())
            throw InvalidArgument("--features dense requires --dense <embeddings.jsonl> "
                                  "(rows {\"id\": str, \"vec\": [numbers], \"label\": 0|1})");
        const auto dense = load_dense_features(a.dense);
        std::optional<Corpus> corpus;
        if (!a.input.empty()) corpus = load_corpus(a.input, resolve_format(a.format, a.input));
        const auto labels = dense_labels(dense, corpus ? &*corpus : nullptr);
        model = train_model_dense(dense, labels, options);
        train_accuracy = accuracy_of(labels, threshold_scores(model.scores(dense.matrix), model.default_threshold()));
        n_docs = labels.size();
    } else {
        if (!a.dense.empty()) throw InvalidArgument("--dense is only valid with --features dense");
        if (a.input.empty()) throw InvalidArgument("--input is required");
        options.preprocess = a.pre.config();
        const auto corpus = load_corpus(a.input, resolve_format(a.format, a.input));
        model = train_model(corpus, options);
        train_accuracy =
            accuracy_of(corpus.labels(), threshold_scores(model.scores(corpus), model.default_threshold()));
        n_docs = corpus.size();
    }
    save_model(model, a.model);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    out << "trained " << to_string(model.kind()) << " on " << n_docs << " documents, "
        << model.features.n_cols() << " features: ";
    if (const auto* g = std::get_if<GbdtModel>(&model.classifier)) out << g->trees.size() << " rounds";
    else out << std::get<SvmModel>(model.classifier).params.epochs << " epochs";
    out << ", train accuracy " << fixed4(train_accuracy) << ", " << format_seconds(elapsed) << " -> " << a.model
        << "\n";
    return kOk;
}

struct PredictArgs {
    std::string model, input, format, output;
    std::optional<double> threshold;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    const auto model = load_model(a.model);
    const double threshold = a.threshold.value_or(model.default_threshold());
    std::vector<std::string> ids;
    std::vector<double> scores;
    if (model.features.spec().kind == FeatureKind::Dense) {
        const auto dense = load_dense_features(a.input);
        ids = dense.ids;
        scores = model.scores(dense.matrix);
    } else {
        const auto corpus = load_corpus(a.input, resolve_format(a.format, a.input));
        for (const auto& d : corpus) ids.push_back(d.id);
        scores = model.scores(corpus);
    }
    const auto labels = threshold_scores(scores, threshold);

    std::string text;
    text += json{{"model_kind", to_string(model.kind())},
                 {"score_kind", model.score_kind()},
                 {"threshold", threshold}}
                .dump();
    text += "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        text += json{{"id", ids[i]}, {"score", scores[i]}, {"label", labels[i]}}.dump();
        text += "\n";
    }
    if (a.output.empty()) out << text;
    else write_file_atomic(a.output, text);
    return kOk;
}

struct EvaluateArgs {
    std::string model, input, format, report, name;
    std::optional<double> threshold;
    std::vector<std::string> external, compare;
};

std::vector<RankedModel> comparison_rows(const EvaluateArgs& a) {
    std::vector<RankedModel> rows;
    for (const auto& e : a.external) {
        const auto [name, value] = split_assignment(e, "--external");
        double acc = 0;
        try {
            std::size_t used = 0;
            acc = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::logic_error&) {
            throw InvalidArgument("--external accuracy '" + value + "' is not a number");
        }
        if (!(acc >= 0.0 && acc <= 1.0)) throw InvalidArgument("--external accuracy must lie in [0, 1]");
        rows.push_back({name, acc});
    }
    for (const auto& c : a.compare) {
        const auto [name, path] = split_assignment(c, "--compare");
        rows.push_back({name, report_from_json(read_file(path)).accuracy});
    }
    return rows;
}

Evaluation finish(const EvalReport& r, const std::string& name, std::vector<RankedModel> others) {
    Evaluation e;
    e.report = r;
    others.push_back({name, r.accuracy});
    e.ranking = compare_models(std::move(others));
    e.report_json = report_to_json(r, e.ranking);
    e.table = render_table(r, name);
    if (e.ranking.size() > 1) {
        e.table += "\nRanking by accuracy\n";
        for (std::size_t i = 0; i < e.ranking.size(); ++i) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%2zu. %-16s %.4f\n", i + 1, e.ranking[i].name.c_str(),
                          e.ranking[i].accuracy);
            e.table += buf;
        }
    }
    return e;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const auto others = comparison_rows(a);
    const auto model = load_model(a.model);
    const double threshold = a.threshold.value_or(model.default_threshold());
    const std::string name = a.name.empty() ? std::string(to_string(model.kind())) : a.name;
    Evaluation e;
    if (model.features.spec().kind == FeatureKind::Dense) {
        const auto dense = load_dense_features(a.input);
        const auto truth = dense_labels(dense, nullptr);
        e = finish(report(confusion(truth, threshold_scores(model.scores(dense.matrix), threshold))), name, others);
    } else {
        const auto corpus = load_corpus(a.input, resolve_format(a.format, a.input));
        e = evaluate_corpus(ModelPredictor(model, threshold), corpus, name, others);
    }
    if (!a.report.empty()) write_file_atomic(a.report, e.report_json);
    out << e.table;
    return kOk;
}

struct TermfreqArgs {
    std::string input, format, out_path;
    std::size_t top = 20;
    PreprocessFlags pre;
};

int cmd_termfreq(const TermfreqArgs& a, std::ostream& out) {
    if (a.top < 1) throw InvalidArgument("--top must be at least 1");
    const auto corpus = load_corpus(a.input, resolve_format(a.format, a.input));
    const auto table = term_frequency_report(corpus, a.pre.config(), a.top);
    if (a.out_path.empty()) {
        out << table.to_json();
        return kOk;
    }
    const auto ext = fs::path(a.out_path).extension().string();
    if (ext == ".csv") write_file_atomic(a.out_path, table.to_csv());
    else if (ext == ".json") write_file_atomic(a.out_path, table.to_json());
    else throw InvalidArgument("--out must end in .json or .csv");
    return kOk;
}

struct InspectArgs {
    std::string model;
    std::size_t top = 20;
};

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
    const auto m = load_model(a.model);
    const auto& fx = m.features;
    const auto onoff = [](bool b) { return b ? "on" : "off"; };
    out << "model_kind: " << to_string(m.kind()) << "\n";
    out << "features: " << to_string(fx.spec().kind) << " (min_df " << fx.spec().min_df << ", max_vocab "
        << (fx.spec().max_vocab ? std::to_string(*fx.spec().max_vocab) : std::string("none")) << "), "
        << fx.n_cols() << " columns\n";
    out << "vocabulary: " << fx.vocabulary().size() << " terms fitted on " << fx.vocabulary().n_docs_fitted()
        << " documents\n";
    out << "preprocess: lowercase " << onoff(fx.config().lowercase) << ", strip_punct_tokens "
        << onoff(fx.config().strip_punct_tokens) << ", remove_stopwords " << onoff(fx.config().remove_stopwords)
        << ", stem " << onoff(fx.config().stem) << ", stopwords " << fx.config().stopword_list.size() << " ("
        << hex64(m.meta.stopword_hash) << ")\n";
    out << "hyperparameters: " << describe_params(m) << "\n";
    out << "training: seed " << m.meta.seed << ", generator splitmix64, documents " << m.meta.n_train_docs
        << ", corpus " << hex64(m.meta.corpus_fingerprint) << "\n";

    std::vector<double> importance;
    if (const auto* g = std::get_if<GbdtModel>(&m.classifier)) {
        out << "trees: " << g->trees.size() << "\n";
        out << "top features by total gain:\n";
        importance = feature_gain(*g);
    } else {
        const auto& s = std::get<SvmModel>(m.classifier);
        out << "bias: " << format_double(s.bias) << "\n";
        out << "top features by |weight|:\n";
        for (const double w : s.weights) importance.push_back(std::abs(w));
    }
    std::vector<std::size_t> order(importance.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto k = std::min(a.top, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t x, std::size_t y) {
                          return importance[x] != importance[y] ? importance[x] > importance[y] : x < y;
                      });
    for (std::size_t i = 0; i < k; ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6g", importance[order[i]]);
        out << "  " << (i + 1) << ". " << fx.feature_name(order[i]) << " " << buf << "\n";
    }
    return kOk;
}

struct GenerateArgs {
    std::string out_path, format;
    std::size_t n_per_class = 300;
    std::uint64_t seed = 42;
    SyntheticParams params;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    if (a.n_per_class < 1) throw InvalidArgument("--n-per-class must be at least 1");
    const auto corpus = generate_synthetic_corpus(a.n_per_class, a.seed, a.params);
    save_corpus(corpus, a.out_path, resolve_format(a.format, a.out_path));
    out << "generated " << corpus.size() << " documents -> " << a.out_path << "\n";
    return kOk;
}

void add_format(CLI::App& app, std::string& target) {
    app.add_option("--format", target, "Corpus format (default: from the file extension)")
        ->check(CLI::IsMember({"csv", "jsonl"}));
}

} // namespace

Evaluation evaluate_corpus(const Predictor& predictor, const Corpus& labeled, const std::string& name,
                           std::vector<RankedModel> others) {
    return finish(evaluate(predictor, labeled), name, std::move(others));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Detects AI-generated text with boosted trees or a linear SVM.", "aitd"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    SplitArgs split;
    auto* s = app.add_subcommand("split", "Stratified train/test split with a manifest");
    s->add_option("--input", split.input, "Labeled corpus")->required();
    add_format(*s, split.format);
    s->add_option("--test-fraction", split.test_fraction, "Test fraction in (0, 1), decimal or a/b");
    s->add_option("--seed", split.seed, "Shuffle seed");
    s->add_option("--out-train", split.out_train, "Training split output")->required();
    s->add_option("--out-test", split.out_test, "Test split output")->required();
    s->add_option("--manifest", split.manifest, "Manifest path (default: split_manifest.json beside --out-test)");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Fit features and a classifier, then save the model");
    t->add_option("--input", train.input, "Labeled training corpus");
    add_format(*t, train.format);
    t->add_option("--algo", train.algo, "Classifier")->check(CLI::IsMember({"gbdt", "svm"}));
    t->add_option("--features", train.features, "Feature kind")
        ->check(CLI::IsMember({"counts", "tfidf", "stylo", "counts+stylo", "tfidf+stylo", "dense"}));
    t->add_option("--dense", train.dense, "Embeddings JSONL for --features dense");
    t->add_option("--model", train.model, "Output model file")->required();
    t->add_option("--seed", train.seed, "Seed for all training randomness");
    t->add_option("--min-df", train.min_df, "Minimum document frequency");
    t->add_option("--max-vocab", train.max_vocab, "Vocabulary cap (default: none)");
    train.pre.attach(*t);
    t->add_option("--rounds", train.gbdt.n_rounds, "gbdt: boosting rounds");
    t->add_option("--max-depth", train.gbdt.max_depth, "gbdt: maximum tree depth");
    t->add_option("--learning-rate", train.gbdt.learning_rate, "gbdt: shrinkage");
    t->add_option("--lambda", train.gbdt.lambda, "gbdt: L2 penalty on leaf weights");
    t->add_option("--gamma", train.gbdt.gamma, "gbdt: minimum split gain");
    t->add_option("--min-child-hessian", train.gbdt.min_child_hessian, "gbdt: minimum hessian per child");
    t->add_option("--svm-lambda", train.svm.lambda, "svm: regularization strength");
    t->add_option("--epochs", train.svm.epochs, "svm: passes over the data");

    PredictArgs predict;
    auto* p = app.add_subcommand("predict", "Score a corpus as JSONL");
    p->add_option("--model", predict.model, "Model file")->required();
    p->add_option("--input", predict.input, "Corpus (or embeddings JSONL for dense models)")->required();
    add_format(*p, predict.format);
    p->add_option("--output", predict.output, "Output JSONL (default: stdout)");
    p->add_option("--threshold", predict.threshold, "Decision threshold (default: 0.5 gbdt, 0 svm)");

    EvaluateArgs evaluate_args;
    auto* e = app.add_subcommand("evaluate", "Metrics on a labeled corpus");
    e->add_option("--model", evaluate_args.model, "Model file")->required();
    e->add_option("--input", evaluate_args.input, "Labeled corpus (or embeddings JSONL)")->required();
    add_format(*e, evaluate_args.format);
    e->add_option("--report", evaluate_args.report, "Report JSON output");
    e->add_option("--threshold", evaluate_args.threshold, "Decision threshold (default: 0.5 gbdt, 0 svm)");
    e->add_option("--name", evaluate_args.name, "Row name in the table (default: model kind)");
    e->add_option("--external", evaluate_args.external, "Extra ranking row NAME=ACCURACY (repeatable)");
    e->add_option("--compare", evaluate_args.compare, "Extra ranking row NAME=report.json (repeatable)");

    TermfreqArgs termfreq;
    auto* f = app.add_subcommand("termfreq", "Top terms overall and per label");
    f->add_option("--input", termfreq.input, "Corpus")->required();
    add_format(*f, termfreq.format);
    f->add_option("--top", termfreq.top, "Terms per table");
    f->add_option("--out", termfreq.out_path, "Output .json or .csv (default: JSON to stdout)");
    termfreq.pre.attach(*f);

    InspectArgs inspect;
    auto* i = app.add_subcommand("inspect", "Describe a model file");
    i->add_option("--model", inspect.model, "Model file")->required();
    i->add_option("--top", inspect.top, "Features to list");

    GenerateArgs generate;
    auto* g = app.add_subcommand("generate", "Write a synthetic two-class corpus");
    g->add_option("--out", generate.out_path, "Output corpus")->required();
    add_format(*g, generate.format);
    g->add_option("--n-per-class", generate.n_per_class, "Documents per class");
    g->add_option("--seed", generate.seed, "Generator seed");
    g->add_option("--overlap", generate.params.overlap, "Probability of drawing from the shared vocabulary");
    g->add_option("--shared-vocab", generate.params.shared_vocab, "Shared vocabulary size");
    g->add_option("--markers", generate.params.markers_per_class, "Marker terms per class");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*s) return cmd_split(split, out);
        if (*t) return cmd_train(train, out);
        if (*p) return cmd_predict(predict, out);
        if (*e) return cmd_evaluate(evaluate_args, out);
        if (*f) return cmd_termfreq(termfreq, out);
        if (*i) return cmd_inspect(inspect, out);
        if (*g) return cmd_generate(generate, out);
        return kUsage;
    } catch (const InvalidArgument& ex) {
        err << "error: " << ex.what() << "\n";
        return kUsage;
    } catch (const DataError& ex) {
        err << "error: " << ex.what() << "\n";
        return kData;
    } catch (const std::exception& ex) {
        err << "internal error: " << ex.what() << "\n";
        return kInternal;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace aitd::cli
