#include "aitd/model_store.hpp"

#include "aitd/error.hpp"
#include "aitd/hash.hpp"
#include "aitd/util.hpp"

#include <json.hpp>

#include <bit>
#include <cstdio>
#include <map>
#include <set>

namespace aitd {

using json = nlohmann::ordered_json;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::string_view in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[at + static_cast<std::size_t>(i)]);
    return v;
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[at + static_cast<std::size_t>(i)]);
    return v;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    if (s.size() != 18 || s.substr(0, 2) != "0x") throw ModelFormatError("malformed hex field '" + s + "'");
    return std::stoull(s.substr(2), nullptr, 16);
}

// Collects named f64 arrays into the binary block.
class ArrayWriter {
public:
    void add(const std::string& name, std::span<const double> values) {
        index_.push_back({{"name", name}, {"offset", block_.size()}, {"count", values.size()}});
        for (const double v : values) put_u64(block_, std::bit_cast<std::uint64_t>(v));
    }

    const std::string& block() const { return block_; }
    json index() const { return index_; }

private:
    std::string block_;
    json index_ = json::array();
};

class ArrayReader {
public:
    ArrayReader(const json& index, std::string_view block) : block_(block) {
        for (const auto& entry : index) {
            const auto name = entry.at("name").get<std::string>();
            const auto offset = entry.at("offset").get<std::uint64_t>();
            const auto count = entry.at("count").get<std::uint64_t>();
            if (offset > block.size() || count > (block.size() - offset) / 8)
                throw TruncatedModelError("array '" + name + "' runs past the binary block");
            if (!arrays_.emplace(name, std::pair{offset, count}).second)
                throw ModelFormatError("duplicate array '" + name + "'");
        }
    }

    std::vector<double> get(const std::string& name) const {
        const auto it = arrays_.find(name);
        if (it == arrays_.end()) throw ModelFormatError("missing array '" + name + "'");
        std::vector<double> out(it->second.second);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = std::bit_cast<double>(get_u64(block_, it->second.first + 8 * i));
        return out;
    }

private:
    std::string_view block_;
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> arrays_;
};

void require_keys(const json& obj, std::initializer_list<std::string_view> keys, const std::string& where) {
    if (!obj.is_object()) throw ModelFormatError(where + " must be an object");
    std::set<std::string, std::less<>> expected(keys.begin(), keys.end());
    for (const auto& [k, _] : obj.items())
        if (!expected.contains(k)) throw ModelFormatError("unknown field '" + k + "' in " + where);
    for (const auto k : keys)
        if (!obj.contains(std::string(k)))
            throw ModelFormatError("missing field '" + std::string(k) + "' in " + where);
}

json preprocess_json(const PreprocessConfig& c) {
    json stop = json::array();
    for (const auto& w : c.stopword_list) stop.push_back(w);
    return {{"lowercase", c.lowercase},
            {"strip_punct_tokens", c.strip_punct_tokens},
            {"remove_stopwords", c.remove_stopwords},
            {"stem", c.stem},
            {"stopwords", std::move(stop)}};
}

PreprocessConfig preprocess_from(const json& j) {
    require_keys(j, {"lowercase", "strip_punct_tokens", "remove_stopwords", "stem", "stopwords"}, "preprocess");
    PreprocessConfig c;
    c.lowercase = j.at("lowercase").get<bool>();
    c.strip_punct_tokens = j.at("strip_punct_tokens").get<bool>();
    c.remove_stopwords = j.at("remove_stopwords").get<bool>();
    c.stem = j.at("stem").get<bool>();
    c.stopword_list.clear();
    for (const auto& w : j.at("stopwords")) c.stopword_list.insert(w.get<std::string>());
    return c;
}

} // namespace

std::string serialize_model(const TrainedModel& model) {
    const auto& fx = model.features;
    ArrayWriter arrays;
    json header;
    header["model_kind"] = to_string(model.kind());
    header["preprocess"] = preprocess_json(fx.config());
    header["features"] = {{"kind", to_string(fx.spec().kind)},
                          {"min_df", fx.spec().min_df},
                          {"max_vocab", fx.spec().max_vocab ? json(*fx.spec().max_vocab) : json(nullptr)},
                          {"dense_dim", fx.dense_dim()},
                          {"n_cols", fx.n_cols()}};
    json terms = json::array();
    for (const auto& t : fx.vocabulary().terms()) terms.push_back(t);
    header["vocabulary"] = {{"n_docs_fitted", fx.vocabulary().n_docs_fitted()},
                            {"terms", std::move(terms)},
                            {"doc_freq", fx.vocabulary().doc_freq()}};

    json classifier;
    json standardization = nullptr;
    if (const auto* g = std::get_if<GbdtModel>(&model.classifier)) {
        const auto& p = g->params;
        classifier = {{"n_rounds", p.n_rounds},
                      {"max_depth", p.max_depth},
                      {"learning_rate", p.learning_rate},
                      {"lambda", p.lambda},
                      {"gamma", p.gamma},
                      {"min_child_hessian", p.min_child_hessian},
                      {"seed", p.seed},
                      {"n_features", g->n_features},
                      {"n_trees", g->trees.size()}};
        std::vector<double> sizes, feature, threshold, left, right, weight, gain, cover;
        for (const auto& t : g->trees) {
            sizes.push_back(static_cast<double>(t.nodes.size()));
            for (const auto& n : t.nodes) {
                feature.push_back(n.feature);
                threshold.push_back(n.threshold);
                left.push_back(n.left);
                right.push_back(n.right);
                weight.push_back(n.weight);
                gain.push_back(n.gain);
                cover.push_back(n.cover);
            }
        }
        const double scalars[] = {g->base_score, p.learning_rate};
        arrays.add("gbdt.scalars", scalars);
        arrays.add("gbdt.tree_sizes", sizes);
        arrays.add("gbdt.feature", feature);
        arrays.add("gbdt.threshold", threshold);
        arrays.add("gbdt.left", left);
        arrays.add("gbdt.right", right);
        arrays.add("gbdt.weight", weight);
        arrays.add("gbdt.gain", gain);
        arrays.add("gbdt.cover", cover);
    } else {
        const auto& s = std::get<SvmModel>(model.classifier);
        classifier = {{"lambda", s.params.lambda},
                      {"epochs", s.params.epochs},
                      {"seed", s.params.seed},
                      {"n_features", s.weights.size()}};
        const double scalars[] = {s.bias, s.params.lambda};
        arrays.add("svm.scalars", scalars);
        arrays.add("svm.weights", s.weights);
        if (!s.standardization.empty()) {
            standardization = {{"begin", s.standardization.begin}, {"width", s.standardization.mean.size()}};
            arrays.add("svm.std_mean", s.standardization.mean);
            arrays.add("svm.std_scale", s.standardization.scale);
        }
    }
    header["standardization"] = std::move(standardization);
    header["classifier"] = std::move(classifier);
    header["training"] = {{"seed", model.meta.seed},
                          {"generator", "splitmix64"},
                          {"corpus_fingerprint", hex64(model.meta.corpus_fingerprint)},
                          {"stopword_hash", hex64(model.meta.stopword_hash)},
                          {"n_train_docs", model.meta.n_train_docs}};
    header["arrays"] = arrays.index();

    const std::string header_text = header.dump(1);
    std::string out;
    out.append(kModelMagic);
    put_u32(out, kModelFormatVersion);
    put_u64(out, header_text.size());
    out.append(header_text);
    put_u64(out, arrays.block().size());
    out.append(arrays.block());
    put_u64(out, fnv1a64(out));
    return out;
}

TrainedModel deserialize_model(std::string_view bytes, const std::string& source) {
    const auto fail_trunc = [&](const std::string& what) {
        return TruncatedModelError(source + ": truncated model file (" + what + ")");
    };
    if (bytes.size() < 4) throw fail_trunc("missing magic");
    if (bytes.substr(0, 4) != kModelMagic) throw BadMagicError(source + ": not a model file (bad magic)");
    if (bytes.size() < 16) throw fail_trunc("missing header length");
    const auto version = get_u32(bytes, 4);
    if (version != kModelFormatVersion)
        throw UnsupportedVersionError(source + ": unsupported model format version " + std::to_string(version));
    const auto header_len = get_u64(bytes, 8);
    if (header_len > bytes.size() - 16 || bytes.size() - 16 - header_len < 8) throw fail_trunc("header");
    const std::size_t block_len_at = 16 + static_cast<std::size_t>(header_len);
    const auto block_len = get_u64(bytes, block_len_at);
    const std::size_t block_at = block_len_at + 8;
    if (block_len > bytes.size() - block_at || bytes.size() - block_at - block_len < 8)
        throw fail_trunc("binary block");
    const std::size_t checksum_at = block_at + static_cast<std::size_t>(block_len);
    if (bytes.size() != checksum_at + 8)
        throw ModelFormatError(source + ": unexpected bytes after the checksum");
    if (get_u64(bytes, checksum_at) != fnv1a64(bytes.substr(0, checksum_at)))
        throw ChecksumMismatchError(source + ": checksum mismatch");

    try {
        const auto header = json::parse(bytes.substr(16, static_cast<std::size_t>(header_len)));
        require_keys(header, {"model_kind", "preprocess", "features", "vocabulary", "standardization",
                              "classifier", "training", "arrays"},
                     "header");
        const ArrayReader arrays(header.at("arrays"), bytes.substr(block_at, static_cast<std::size_t>(block_len)));

        const auto& fj = header.at("features");
        require_keys(fj, {"kind", "min_df", "max_vocab", "dense_dim", "n_cols"}, "features");
        FeatureSpec spec;
        spec.kind = parse_feature_kind(fj.at("kind").get<std::string>());
        spec.min_df = fj.at("min_df").get<std::size_t>();
        if (!fj.at("max_vocab").is_null()) spec.max_vocab = fj.at("max_vocab").get<std::size_t>();

        const auto& vj = header.at("vocabulary");
        require_keys(vj, {"n_docs_fitted", "terms", "doc_freq"}, "vocabulary");
        Vocabulary vocab;
        if (!vj.at("terms").empty())
            vocab = Vocabulary(vj.at("terms").get<std::vector<std::string>>(),
                               vj.at("doc_freq").get<std::vector<std::size_t>>(),
                               vj.at("n_docs_fitted").get<std::size_t>());

        TrainedModel model;
        model.features = FeatureExtractor::restore(preprocess_from(header.at("preprocess")), spec,
                                                   std::move(vocab), fj.at("dense_dim").get<std::size_t>());
        if (model.features.n_cols() != fj.at("n_cols").get<std::size_t>())
            throw ModelFormatError("feature column count does not match the vocabulary");

        const auto kind = parse_model_kind(header.at("model_kind").get<std::string>());
        const auto& cj = header.at("classifier");
        if (kind == ModelKind::Gbdt) {
            require_keys(cj, {"n_rounds", "max_depth", "learning_rate", "lambda", "gamma", "min_child_hessian",
                              "seed", "n_features", "n_trees"},
                         "classifier");
            GbdtModel g;
            g.params.n_rounds = cj.at("n_rounds").get<std::size_t>();
            g.params.max_depth = cj.at("max_depth").get<std::size_t>();
            g.params.lambda = cj.at("lambda").get<double>();
            g.params.gamma = cj.at("gamma").get<double>();
            g.params.min_child_hessian = cj.at("min_child_hessian").get<double>();
            g.params.seed = cj.at("seed").get<std::uint64_t>();
            g.n_features = cj.at("n_features").get<std::size_t>();
            const auto scalars = arrays.get("gbdt.scalars");
            if (scalars.size() != 2) throw ModelFormatError("gbdt.scalars must hold 2 values");
            g.base_score = scalars[0];
            g.params.learning_rate = scalars[1];
            const auto sizes = arrays.get("gbdt.tree_sizes");
            const auto feature = arrays.get("gbdt.feature"), threshold = arrays.get("gbdt.threshold"),
                       left = arrays.get("gbdt.left"), right = arrays.get("gbdt.right"),
                       weight = arrays.get("gbdt.weight"), gain = arrays.get("gbdt.gain"),
                       cover = arrays.get("gbdt.cover");
            if (sizes.size() != cj.at("n_trees").get<std::size_t>())
                throw ModelFormatError("tree count does not match gbdt.tree_sizes");
            std::size_t at = 0;
            for (const double sz : sizes) {
                Tree t;
                const auto n = static_cast<std::size_t>(sz);
                if (n == 0 || at + n > feature.size() || threshold.size() != feature.size() ||
                    left.size() != feature.size() || right.size() != feature.size() ||
                    weight.size() != feature.size() || gain.size() != feature.size() ||
                    cover.size() != feature.size())
                    throw ModelFormatError("tree node arrays are inconsistent");
                for (std::size_t k = 0; k < n; ++k, ++at) {
                    TreeNode node{static_cast<std::int32_t>(feature[at]), threshold[at],
                                  static_cast<std::int32_t>(left[at]),    static_cast<std::int32_t>(right[at]),
                                  weight[at],                             gain[at],
                                  cover[at]};
                    if (!node.is_leaf() &&
                        (node.left <= static_cast<std::int32_t>(k) || node.right <= static_cast<std::int32_t>(k) ||
                         node.left >= static_cast<std::int32_t>(n) || node.right >= static_cast<std::int32_t>(n) ||
                         static_cast<std::size_t>(node.feature) >= g.n_features))
                        throw ModelFormatError("tree node references out of range");
                    t.nodes.push_back(node);
                }
                g.trees.push_back(std::move(t));
            }
            if (at != feature.size()) throw ModelFormatError("tree node arrays have trailing entries");
            if (!header.at("standardization").is_null()) throw ModelFormatError("gbdt models carry no standardization");
            model.classifier = std::move(g);
        } else {
            require_keys(cj, {"lambda", "epochs", "seed", "n_features"}, "classifier");
            SvmModel s;
            s.params.epochs = cj.at("epochs").get<std::size_t>();
            s.params.seed = cj.at("seed").get<std::uint64_t>();
            const auto scalars = arrays.get("svm.scalars");
            if (scalars.size() != 2) throw ModelFormatError("svm.scalars must hold 2 values");
            s.bias = scalars[0];
            s.params.lambda = scalars[1];
            s.weights = arrays.get("svm.weights");
            if (s.weights.size() != cj.at("n_features").get<std::size_t>())
                throw ModelFormatError("weight count does not match n_features");
            if (const auto& sj = header.at("standardization"); !sj.is_null()) {
                require_keys(sj, {"begin", "width"}, "standardization");
                s.standardization.begin = sj.at("begin").get<std::size_t>();
                s.standardization.mean = arrays.get("svm.std_mean");
                s.standardization.scale = arrays.get("svm.std_scale");
                if (s.standardization.mean.size() != sj.at("width").get<std::size_t>() ||
                    s.standardization.scale.size() != s.standardization.mean.size() ||
                    s.standardization.begin + s.standardization.mean.size() != s.weights.size())
                    throw ModelFormatError("standardization block is inconsistent");
            }
            model.classifier = std::move(s);
        }
        const auto expected_cols = model.kind() == ModelKind::Gbdt
                                       ? std::get<GbdtModel>(model.classifier).n_features
                                       : std::get<SvmModel>(model.classifier).weights.size();
        if (expected_cols != model.features.n_cols())
            throw ModelFormatError("classifier dimension does not match the feature space");

        const auto& tj = header.at("training");
        require_keys(tj, {"seed", "generator", "corpus_fingerprint", "stopword_hash", "n_train_docs"}, "training");
        model.meta.seed = tj.at("seed").get<std::uint64_t>();
        model.meta.corpus_fingerprint = parse_hex64(tj.at("corpus_fingerprint").get<std::string>());
        model.meta.stopword_hash = parse_hex64(tj.at("stopword_hash").get<std::string>());
        model.meta.n_train_docs = tj.at("n_train_docs").get<std::size_t>();
        return model;
    } catch (const json::exception& e) {
        throw ModelFormatError(source + ": malformed model header: " + e.what());
    } catch (const InvalidArgument& e) {
        throw ModelFormatError(source + ": invalid model header: " + e.what());
    }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    try {
        write_file_atomic(path, serialize_model(model));
    } catch (const Error& e) {
        throw DataError("saving model to '" + path.string() + "': " + e.what());
    }
}

TrainedModel load_model(const std::filesystem::path& path) {
    return deserialize_model(read_file(path), path.string());
}

} // namespace aitd
