#include "aitd/corpus.hpp"
#include "aitd/error.hpp"
#include "aitd/model_store.hpp"
#include "aitd/pipeline.hpp"
#include "aitd/preprocess.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

namespace py = pybind11;
using namespace aitd;

namespace {

PreprocessConfig make_config(bool lowercase, bool strip_punct, bool remove_stopwords, bool stem) {
    PreprocessConfig c;
    c.lowercase = lowercase;
    c.strip_punct_tokens = strip_punct;
    c.remove_stopwords = remove_stopwords;
    c.stem = stem;
    return c;
}

Corpus corpus_from_records(const py::iterable& records) {
    Corpus c;
    for (const auto& item : records) {
        const auto t = item.cast<py::tuple>();
        if (t.size() != 2 && t.size() != 3) throw InvalidArgument("records are (id, text) or (id, text, label)");
        std::optional<int> label;
        if (t.size() == 3 && !t[2].is_none()) label = t[2].cast<int>();
        c.add({t[0].cast<std::string>(), t[1].cast<std::string>(), label});
    }
    return c;
}

py::list corpus_records(const Corpus& c) {
    py::list out;
    for (const auto& d : c) out.append(py::make_tuple(d.id, d.text, d.label ? py::cast(*d.label) : py::none()));
    return out;
}

py::dict report_dict(const EvalReport& r) {
    const auto cls = [](const ClassMetrics& m) {
        py::dict d;
        d["precision"] = m.precision;
        d["recall"] = m.recall;
        d["f1"] = m.f1;
        d["support"] = m.support;
        return d;
    };
    py::dict confusion, classes, macro, out;
    confusion["tn"] = r.confusion.tn;
    confusion["fp"] = r.confusion.fp;
    confusion["fn"] = r.confusion.fn;
    confusion["tp"] = r.confusion.tp;
    classes["0"] = cls(r.classes[0]);
    classes["1"] = cls(r.classes[1]);
    macro["precision"] = r.macro.precision;
    macro["recall"] = r.macro.recall;
    macro["f1"] = r.macro.f1;
    out["confusion"] = confusion;
    out["classes"] = classes;
    out["accuracy"] = r.accuracy;
    out["macro"] = macro;
    return out;
}

// Owns a trained model; the Python-facing detector.
struct Detector {
    TrainedModel model;

    double threshold_or_default(std::optional<double> t) const { return t.value_or(model.default_threshold()); }
};

} // namespace

PYBIND11_MODULE(_aitd, m) {
    m.doc() = "Text-origin detection: preprocessing, features, boosted trees, linear SVM, metrics";

    static py::exception<Error> base_error(m, "Error", PyExc_RuntimeError);
    static py::exception<DataError> data_error(m, "DataError", base_error.ptr());
    static py::exception<ModelFormatError> format_error(m, "ModelFormatError", data_error.ptr());
    // Derived types are caught before their bases.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const InvalidArgument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const ModelFormatError& e) {
            format_error(e.what());
        } catch (const DataError& e) {
            data_error(e.what());
        } catch (const Error& e) {
            base_error(e.what());
        }
    });

    m.def("normalize", &normalize, py::arg("text"), py::arg("lowercase") = true);
    m.def(
        "tokenize",
        [](const std::string& text, bool strip_punct) {
            auto s = tokenize(normalize(text), make_config(true, strip_punct, false, false));
            return py::make_tuple(s.tokens, s.sentence_boundaries);
        },
        py::arg("text"), py::arg("strip_punct") = true,
        "Normalizes, then splits into (tokens, sentence_boundaries).");
    m.def(
        "preprocess",
        [](const std::string& text, bool lowercase, bool strip_punct, bool remove_stopwords, bool stem) {
            return preprocess(text, make_config(lowercase, strip_punct, remove_stopwords, stem)).tokens;
        },
        py::arg("text"), py::arg("lowercase") = true, py::arg("strip_punct") = true,
        py::arg("remove_stopwords") = false, py::arg("stem") = false);
    m.def("porter_stem", &porter_stem, py::arg("word"));

    py::class_<Corpus>(m, "Corpus")
        .def(py::init([](const py::iterable& records) { return corpus_from_records(records); }), py::arg("records"))
        .def_static(
            "load", [](const std::filesystem::path& p) { return load_corpus(p, corpus_format_for(p)); },
            py::arg("path"))
        .def(
            "save", [](const Corpus& c, const std::filesystem::path& p) { save_corpus(c, p, corpus_format_for(p)); },
            py::arg("path"))
        .def("records", &corpus_records)
        .def("labels", &Corpus::labels)
        .def("fingerprint", &corpus_fingerprint)
        .def("__len__", &Corpus::size);

    m.def(
        "generate_corpus",
        [](std::size_t n_per_class, std::uint64_t seed, double overlap) {
            SyntheticParams p;
            p.overlap = overlap;
            return generate_synthetic_corpus(n_per_class, seed, p);
        },
        py::arg("n_per_class") = 300, py::arg("seed") = 42, py::arg("overlap") = 0.85);
    m.def(
        "split",
        [](const Corpus& c, const std::string& test_fraction, std::uint64_t seed) {
            auto r = stratified_split(c, {Fraction::parse(test_fraction), seed});
            return py::make_tuple(std::move(r.train), std::move(r.test));
        },
        py::arg("corpus"), py::arg("test_fraction") = "0.2", py::arg("seed") = 42,
        "Stratified split into (train, test); the fraction is a decimal or a/b string.");

    py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
        .def(py::init<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>(), py::arg("tn"), py::arg("fp"),
             py::arg("fn"), py::arg("tp"))
        .def_readwrite("tn", &ConfusionMatrix::tn)
        .def_readwrite("fp", &ConfusionMatrix::fp)
        .def_readwrite("fn", &ConfusionMatrix::fn)
        .def_readwrite("tp", &ConfusionMatrix::tp)
        .def("__eq__", &ConfusionMatrix::operator==)
        .def("__repr__", [](const ConfusionMatrix& c) {
            return "ConfusionMatrix(tn=" + std::to_string(c.tn) + ", fp=" + std::to_string(c.fp) +
                   ", fn=" + std::to_string(c.fn) + ", tp=" + std::to_string(c.tp) + ")";
        });
    m.def(
        "confusion",
        [](const std::vector<int>& y_true, const std::vector<int>& y_pred) { return confusion(y_true, y_pred); },
        py::arg("y_true"), py::arg("y_pred"));
    m.def(
        "report", [](const ConfusionMatrix& cm) { return report_dict(report(cm)); }, py::arg("confusion"),
        "Per-class precision/recall/F1, accuracy and macro means as a dict.");
    m.def(
        "render_table", [](const ConfusionMatrix& cm, const std::string& name) { return render_table(report(cm), name); },
        py::arg("confusion"), py::arg("algorithm"));
    m.def(
        "compare_models",
        [](const std::vector<std::pair<std::string, double>>& rows) {
            std::vector<RankedModel> in;
            for (const auto& [n, a] : rows) in.push_back({n, a});
            std::vector<std::pair<std::string, double>> out;
            for (const auto& r : compare_models(std::move(in))) out.emplace_back(r.name, r.accuracy);
            return out;
        },
        py::arg("rows"), "Sorts (name, accuracy) pairs by accuracy descending, then name.");

    py::class_<Detector>(m, "Detector")
        .def_static(
            "train",
            [](const Corpus& train, const std::string& algo, const std::string& features, std::uint64_t seed,
               std::optional<std::size_t> rounds, std::optional<std::size_t> max_depth,
               std::optional<double> learning_rate, std::optional<double> svm_lambda,
               std::optional<std::size_t> epochs, bool remove_stopwords, bool stem) {
                TrainOptions o;
                o.algo = parse_model_kind(algo);
                o.features.kind = parse_feature_kind(features);
                if (o.features.kind == FeatureKind::Dense)
                    throw InvalidArgument("dense features need precomputed embeddings; use the command line");
                o.seed = seed;
                o.preprocess.remove_stopwords = remove_stopwords;
                o.preprocess.stem = stem;
                if (rounds) o.gbdt.n_rounds = *rounds;
                if (max_depth) o.gbdt.max_depth = *max_depth;
                if (learning_rate) o.gbdt.learning_rate = *learning_rate;
                if (svm_lambda) o.svm.lambda = *svm_lambda;
                if (epochs) o.svm.epochs = *epochs;
                py::gil_scoped_release release;
                return Detector{train_model(train, o)};
            },
            py::arg("train"), py::arg("algo") = "gbdt", py::arg("features") = "counts", py::arg("seed") = 42,
            py::arg("rounds") = py::none(), py::arg("max_depth") = py::none(), py::arg("learning_rate") = py::none(),
            py::arg("svm_lambda") = py::none(), py::arg("epochs") = py::none(), py::arg("remove_stopwords") = false,
            py::arg("stem") = false)
        .def_static(
            "load", [](const std::filesystem::path& p) { return Detector{load_model(p)}; }, py::arg("path"))
        .def(
            "save", [](const Detector& d, const std::filesystem::path& p) { save_model(d.model, p); }, py::arg("path"))
        .def("to_bytes", [](const Detector& d) { return py::bytes(serialize_model(d.model)); })
        .def_static(
            "from_bytes", [](const py::bytes& b) { return Detector{deserialize_model(std::string(b))}; },
            py::arg("data"))
        .def_property_readonly("kind", [](const Detector& d) { return std::string(to_string(d.model.kind())); })
        .def_property_readonly("score_kind", [](const Detector& d) { return std::string(d.model.score_kind()); })
        .def_property_readonly("default_threshold", [](const Detector& d) { return d.model.default_threshold(); })
        .def("scores", [](const Detector& d, const Corpus& c) { return d.model.scores(c); }, py::arg("corpus"))
        .def(
            "predict",
            [](const Detector& d, const Corpus& c, std::optional<double> t) {
                return threshold_scores(d.model.scores(c), d.threshold_or_default(t));
            },
            py::arg("corpus"), py::arg("threshold") = py::none())
        .def(
            "evaluate",
            [](const Detector& d, const Corpus& c, std::optional<double> t) {
                return report_dict(evaluate(ModelPredictor(d.model, d.threshold_or_default(t)), c));
            },
            py::arg("corpus"), py::arg("threshold") = py::none());
}
