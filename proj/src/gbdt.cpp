#include "aitd/gbdt.hpp"

#include "aitd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aitd {

void GbdtParams::validate() const {
    if (n_rounds < 1) throw InvalidArgument("n_rounds must be >= 1");
    if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw InvalidArgument("learning_rate must be positive");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be >= 0");
    if (!(gamma >= 0.0) || std::isnan(gamma)) throw InvalidArgument("gamma must be >= 0");
    if (!(min_child_hessian >= 0.0) || !std::isfinite(min_child_hessian))
        throw InvalidArgument("min_child_hessian must be >= 0");
}

double sigmoid(double x) noexcept {
    // Clamped so probabilities stay strictly inside (0, 1).
    static constexpr double lo = std::numeric_limits<double>::min();
    static const double hi = std::nextafter(1.0, 0.0);
    double p;
    if (x >= 0) {
        p = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double e = std::exp(x);
        p = e / (1.0 + e);
    }
    return std::clamp(p, lo, hi);
}

double Tree::leaf_weight(std::span<const double> dense_row) const {
    std::size_t n = 0;
    while (!nodes[n].is_leaf()) {
        const auto& node = nodes[n];
        n = static_cast<std::size_t>(dense_row[static_cast<std::size_t>(node.feature)] <= node.threshold
                                         ? node.left
                                         : node.right);
    }
    return nodes[n].weight;
}

std::size_t Tree::depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

namespace {

constexpr double kTieTolerance = 1e-10;

struct ColumnEntry {
    double value;
    std::uint32_t row;
};

// Nonzero entries of every column sorted by (value, row).
std::vector<std::vector<ColumnEntry>> sorted_columns(const SparseMatrix& X) {
    std::vector<std::vector<ColumnEntry>> cols(X.n_cols);
    for (std::size_t r = 0; r < X.n_rows; ++r) {
        const auto row = X.row(r);
        for (std::size_t k = 0; k < row.size(); ++k)
            cols[row.cols[k]].push_back({row.vals[k], static_cast<std::uint32_t>(r)});
    }
    for (auto& c : cols)
        std::sort(c.begin(), c.end(), [](const ColumnEntry& a, const ColumnEntry& b) {
            return a.value != b.value ? a.value < b.value : a.row < b.row;
        });
    return cols;
}

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    std::size_t n = 0;
};

struct SplitCandidate {
    bool valid = false;
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double midpoint(double a, double b) {
    const double m = a + (b - a) / 2.0;
    return m < b ? m : a;
}

// Scans one node's buckets for one feature in ascending value order.
struct BucketScan {
    bool started = false;
    bool zero_done = false;
    double cur_value = 0.0;
    NodeStats cur;
    NodeStats left;
};

class SplitFinder {
public:
    SplitFinder(const GbdtParams& p) : p_(p) {}

    double score(const NodeStats& s) const { return s.g * s.g / (s.h + p_.lambda); }

    void consider(const NodeStats& parent, const NodeStats& left, std::int32_t feature,
                  double threshold, SplitCandidate& best) const {
        const NodeStats right{parent.g - left.g, parent.h - left.h, parent.n - left.n};
        if (left.n == 0 || right.n == 0) return;
        if (left.h < p_.min_child_hessian || right.h < p_.min_child_hessian) return;
        const double gain = 0.5 * (score(left) + score(right) - score(parent)) - p_.gamma;
        const double eps = kTieTolerance * (1.0 + score(parent));
        if (!(gain > eps)) return;
        if (best.valid && !(gain > best.gain + eps * std::max(1.0, std::abs(best.gain)))) return;
        best = {true, feature, threshold, gain};
    }

    void feed(BucketScan& s, const NodeStats& parent, double value, const NodeStats& add,
              std::int32_t feature, SplitCandidate& best) const {
        if (s.started && value != s.cur_value) {
            s.left.g += s.cur.g;
            s.left.h += s.cur.h;
            s.left.n += s.cur.n;
            consider(parent, s.left, feature, midpoint(s.cur_value, value), best);
            s.cur = add;
            s.cur_value = value;
        } else if (s.started) {
            s.cur.g += add.g;
            s.cur.h += add.h;
            s.cur.n += add.n;
        } else {
            s.started = true;
            s.cur = add;
            s.cur_value = value;
        }
    }

private:
    const GbdtParams& p_;
};

void check_inputs(const SparseMatrix& X, std::span<const int> y) {
    if (X.n_rows != y.size()) throw DataError("feature rows and labels differ in length");
    if (X.n_rows < 2) throw DataError("training needs at least 2 rows");
    std::size_t pos = 0;
    for (const int label : y) {
        if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
        pos += static_cast<std::size_t>(label);
    }
    if (pos == 0 || pos == y.size()) throw DataError("training labels contain a single class");
    for (const double v : X.values)
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
}

double mean_logloss(std::span<const double> margin, std::span<const int> y) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        // log(1 + e^m) - y m, evaluated stably.
        const double m = margin[i];
        const double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
        total += softplus - (y[i] ? m : 0.0);
    }
    return total / static_cast<double>(y.size());
}

Tree grow_tree(const SparseMatrix& X, const std::vector<std::vector<ColumnEntry>>& columns,
               std::span<const double> grad, std::span<const double> hess, const GbdtParams& params,
               std::vector<std::int32_t>& pos) {
    const SplitFinder finder(params);
    const std::size_t n_rows = X.n_rows;
    Tree tree;
    tree.nodes.emplace_back();
    std::fill(pos.begin(), pos.end(), 0);

    std::vector<NodeStats> stats(1);
    for (std::size_t i = 0; i < n_rows; ++i) {
        stats[0].g += grad[i];
        stats[0].h += hess[i];
        ++stats[0].n;
    }

    std::vector<std::size_t> level{0};
    for (std::size_t depth = 0; depth < params.max_depth && !level.empty(); ++depth) {
        // Node id -> slot among this level's nodes.
        std::vector<std::int32_t> slot(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < level.size(); ++s) slot[level[s]] = static_cast<std::int32_t>(s);

        std::vector<SplitCandidate> best(level.size());
        std::vector<NodeStats> nonzero(level.size());
        std::vector<BucketScan> scans(level.size());

        for (std::size_t f = 0; f < columns.size(); ++f) {
            const auto& col = columns[f];
            const auto feature = static_cast<std::int32_t>(f);
            std::fill(nonzero.begin(), nonzero.end(), NodeStats{});
            std::fill(scans.begin(), scans.end(), BucketScan{});
            for (const auto& e : col) {
                const auto s = slot[static_cast<std::size_t>(pos[e.row])];
                if (s < 0 || e.value == 0.0) continue;
                auto& nz = nonzero[static_cast<std::size_t>(s)];
                nz.g += grad[e.row];
                nz.h += hess[e.row];
                ++nz.n;
            }
            const auto zero_bucket = [&](std::size_t s) {
                const auto& parent = stats[level[s]];
                const auto& nz = nonzero[s];
                return NodeStats{parent.g - nz.g, parent.h - nz.h, parent.n - nz.n};
            };
            for (const auto& e : col) {
                const auto si = slot[static_cast<std::size_t>(pos[e.row])];
                if (si < 0 || e.value == 0.0) continue;
                const auto s = static_cast<std::size_t>(si);
                const auto& parent = stats[level[s]];
                auto& scan = scans[s];
                if (e.value > 0.0 && !scan.zero_done) {
                    scan.zero_done = true;
                    if (const auto z = zero_bucket(s); z.n > 0) finder.feed(scan, parent, 0.0, z, feature, best[s]);
                }
                finder.feed(scan, parent, e.value, {grad[e.row], hess[e.row], 1}, feature, best[s]);
            }
            for (std::size_t s = 0; s < level.size(); ++s) {
                if (scans[s].zero_done) continue;
                if (const auto z = zero_bucket(s); z.n > 0)
                    finder.feed(scans[s], stats[level[s]], 0.0, z, feature, best[s]);
            }
        }

        // Expand, left child before right, in level order.
        std::vector<std::size_t> next;
        std::vector<std::int32_t> old_pos = pos;
        for (std::size_t s = 0; s < level.size(); ++s) {
            if (!best[s].valid) continue;
            const std::size_t id = level[s];
            const auto left = static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[id];
            node.feature = best[s].feature;
            node.threshold = best[s].threshold;
            node.gain = best[s].gain;
            node.left = left;
            node.right = left + 1;
            next.push_back(static_cast<std::size_t>(left));
            next.push_back(static_cast<std::size_t>(left + 1));
        }
        if (next.empty()) break;

        // Route rows: implicit zeros first, then the feature's nonzeros.
        for (std::size_t i = 0; i < n_rows; ++i) {
            const auto& node = tree.nodes[static_cast<std::size_t>(old_pos[i])];
            if (slot[static_cast<std::size_t>(old_pos[i])] >= 0 && !node.is_leaf())
                pos[i] = 0.0 <= node.threshold ? node.left : node.right;
        }
        for (const auto id : level) {
            const auto& node = tree.nodes[id];
            if (node.is_leaf()) continue;
            for (const auto& e : columns[static_cast<std::size_t>(node.feature)])
                if (old_pos[e.row] == static_cast<std::int32_t>(id))
                    pos[e.row] = e.value <= node.threshold ? node.left : node.right;
        }

        stats.resize(tree.nodes.size());
        for (const auto id : next) stats[id] = {};
        for (std::size_t i = 0; i < n_rows; ++i) {
            const auto id = static_cast<std::size_t>(pos[i]);
            if (std::find(next.begin(), next.end(), id) == next.end()) continue;
            stats[id].g += grad[i];
            stats[id].h += hess[i];
            ++stats[id].n;
        }
        level = std::move(next);
    }

    stats.resize(tree.nodes.size());
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
        auto& node = tree.nodes[id];
        node.cover = stats[id].h;
        if (node.is_leaf()) node.weight = -stats[id].g / (stats[id].h + params.lambda);
    }
    return tree;
}

} // namespace

GbdtModel train_gbdt(const SparseMatrix& X, std::span<const int> y, const GbdtParams& params,
                     GbdtTrace* trace) {
    params.validate();
    check_inputs(X, y);
    const std::size_t n = X.n_rows;

    GbdtModel model;
    model.params = params;
    model.n_features = X.n_cols;
    const double prior = static_cast<double>(std::accumulate(y.begin(), y.end(), std::size_t{0})) /
                         static_cast<double>(n);
    model.base_score = std::log(prior / (1.0 - prior));

    const auto columns = sorted_columns(X);
    std::vector<double> margin(n, model.base_score), grad(n), hess(n);
    std::vector<std::int32_t> pos(n, 0);
    if (trace) trace->train_logloss = {mean_logloss(margin, y)};

    for (std::size_t round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = p - y[i];
            hess[i] = p * (1.0 - p);
        }
        auto tree = grow_tree(X, columns, grad, hess, params, pos);
        for (std::size_t i = 0; i < n; ++i)
            margin[i] += params.learning_rate * tree.nodes[static_cast<std::size_t>(pos[i])].weight;
        model.trees.push_back(std::move(tree));
        if (trace) trace->train_logloss.push_back(mean_logloss(margin, y));
    }
    return model;
}

GbdtModel train_gbdt(const DenseMatrix& X, std::span<const int> y, const GbdtParams& params,
                     GbdtTrace* trace) {
    return train_gbdt(SparseMatrix::from_dense(X), y, params, trace);
}

std::vector<double> predict_margin_gbdt(const GbdtModel& model, const SparseMatrix& X) {
    if (X.n_cols != model.n_features)
        throw DataError("feature matrix has " + std::to_string(X.n_cols) + " columns, model expects " +
                        std::to_string(model.n_features));
    std::vector<double> out(X.n_rows, model.base_score);
    std::vector<double> dense(model.n_features, 0.0);
    for (std::size_t r = 0; r < X.n_rows; ++r) {
        const auto row = X.row(r);
        for (std::size_t k = 0; k < row.size(); ++k) dense[row.cols[k]] = row.vals[k];
        double sum = 0.0;
        for (const auto& t : model.trees) sum += t.leaf_weight(dense);
        out[r] += model.params.learning_rate * sum;
        for (std::size_t k = 0; k < row.size(); ++k) dense[row.cols[k]] = 0.0;
    }
    return out;
}

std::vector<double> predict_proba_gbdt(const GbdtModel& model, const SparseMatrix& X) {
    auto m = predict_margin_gbdt(model, X);
    for (auto& v : m) v = sigmoid(v);
    return m;
}

std::vector<double> predict_proba_gbdt(const GbdtModel& model, const DenseMatrix& X) {
    return predict_proba_gbdt(model, SparseMatrix::from_dense(X));
}

std::vector<int> predict_label_gbdt(const GbdtModel& model, const SparseMatrix& X, double threshold) {
    const auto p = predict_proba_gbdt(model, X);
    std::vector<int> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= threshold ? 1 : 0;
    return out;
}

std::vector<double> feature_gain(const GbdtModel& model) {
    std::vector<double> gain(model.n_features, 0.0);
    for (const auto& t : model.trees)
        for (const auto& n : t.nodes)
            if (!n.is_leaf()) gain[static_cast<std::size_t>(n.feature)] += n.gain;
    return gain;
}

} // namespace aitd
