#include "aitd/svm.hpp"

#include "aitd/error.hpp"
#include "aitd/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aitd {

void SvmParams::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("svm lambda must be > 0");
    if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
}

namespace {

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

Standardization fit_standardization(const SparseMatrix& X, std::size_t begin) {
    Standardization s;
    if (begin >= X.n_cols) return s;
    s.begin = begin;
    const std::size_t width = X.n_cols - begin;
    s.mean.assign(width, 0.0);
    s.scale.assign(width, 0.0);
    const auto n = static_cast<double>(X.n_rows);
    for (std::size_t r = 0; r < X.n_rows; ++r) {
        const auto row = X.row(r);
        for (std::size_t k = 0; k < row.size(); ++k)
            if (row.cols[k] >= begin) s.mean[row.cols[k] - begin] += row.vals[k];
    }
    for (auto& m : s.mean) m /= n;
    // Second pass for the variance, counting implicit zeros.
    std::vector<std::size_t> nnz(width, 0);
    for (std::size_t r = 0; r < X.n_rows; ++r) {
        const auto row = X.row(r);
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row.cols[k] < begin) continue;
            const auto j = row.cols[k] - begin;
            const double d = row.vals[k] - s.mean[j];
            s.scale[j] += d * d;
            ++nnz[j];
        }
    }
    for (std::size_t j = 0; j < width; ++j) {
        const double zeros = static_cast<double>(X.n_rows - nnz[j]);
        const double var = (s.scale[j] + zeros * s.mean[j] * s.mean[j]) / n;
        const double sd = std::sqrt(var);
        s.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

double sparse_dot(std::span<const double> w, const SparseMatrix::Row& row) {
    double acc = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) acc += w[row.cols[k]] * row.vals[k];
    return acc;
}

} // namespace

SparseMatrix apply_standardization(const Standardization& s, const SparseMatrix& X) {
    if (s.empty()) return X;
    if (s.begin + s.mean.size() != X.n_cols)
        throw DataError("standardization block does not match the feature matrix");
    SparseMatrix out(X.n_cols);
    out.col_idx.reserve(X.nnz() + X.n_rows * s.mean.size());
    out.values.reserve(X.nnz() + X.n_rows * s.mean.size());
    for (std::size_t r = 0; r < X.n_rows; ++r) {
        const auto row = X.row(r);
        std::size_t k = 0;
        for (; k < row.size() && row.cols[k] < s.begin; ++k) {
            out.col_idx.push_back(row.cols[k]);
            out.values.push_back(row.vals[k]);
        }
        for (std::size_t j = 0; j < s.mean.size(); ++j) {
            const auto col = static_cast<std::uint32_t>(s.begin + j);
            double x = 0.0;
            if (k < row.size() && row.cols[k] == col) x = row.vals[k++];
            const double z = (x - s.mean[j]) / s.scale[j];
            if (z != 0.0) {
                out.col_idx.push_back(col);
                out.values.push_back(z);
            }
        }
        out.row_ptr.push_back(out.values.size());
        ++out.n_rows;
    }
    return out;
}

SvmModel train_svm(const SparseMatrix& X_raw, std::span<const int> y, const SvmParams& params,
                   std::size_t standardize_from) {
    params.validate();
    check_inputs(X_raw, y);

    SvmModel model;
    model.params = params;
    model.standardization = fit_standardization(X_raw, standardize_from);
    const SparseMatrix X = apply_standardization(model.standardization, X_raw);
    const std::size_t n = X.n_rows, d = X.n_cols;
    const double lambda = params.lambda;
    const double radius = 1.0 / std::sqrt(lambda);
    // Past this bound every margin lies on one side, so the optimal intercept is inside it.
    double max_row_norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = X.row(r);
        double acc = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) acc += row.vals[k] * row.vals[k];
        max_row_norm = std::max(max_row_norm, std::sqrt(acc));
    }
    const double bias_bound = 1.0 + radius * max_row_norm;

    // w = s * v. Coordinate j holds v[j] fixed between touches, so its share of
    // the iterate sum is v[j] * (P - mark[j]) with P the running sum of s since
    // the last rescale. Every term is a sum of positive scales: nothing cancels.
    std::vector<double> v(d, 0.0), sum(d, 0.0), mark(d, 0.0);
    double s = 1.0, P = 0.0, v_norm2 = 0.0;
    double b = 0.0, b_sum = 0.0;

    const auto flush = [&](std::size_t j) {
        sum[j] += v[j] * (P - mark[j]);
        mark[j] = P;
    };
    const auto rescale = [&] {
        for (std::size_t j = 0; j < d; ++j) {
            flush(j);
            v[j] *= s;
            mark[j] = 0.0;
        }
        P = 0.0;
        s = 1.0;
        v_norm2 = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
    };

    std::vector<std::size_t> order(n);
    SplitMix64 rng(params.seed);
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(std::span<std::size_t>(order), rng);
        for (const auto i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double yi = y[i] ? 1.0 : -1.0;
            const auto row = X.row(i);
            const double margin = yi * (s * sparse_dot(v, row) + b);

            if (t > 1) s *= 1.0 - 1.0 / static_cast<double>(t);
            if (margin < 1.0) {
                for (std::size_t k = 0; k < row.size(); ++k) {
                    const auto j = row.cols[k];
                    flush(j);
                    const double delta = eta * yi * row.vals[k] / s;
                    v_norm2 += delta * (2.0 * v[j] + delta);
                    v[j] += delta;
                }
                b = std::clamp(b + eta * yi, -bias_bound, bias_bound);
            }
            const double w_norm = s * std::sqrt(std::max(v_norm2, 0.0));
            if (w_norm > radius) s *= radius / w_norm;

            P += s;
            b_sum += b;
            if (s < 1e-6) rescale();
        }
        rescale();
    }

    model.weights.resize(d);
    const auto T = static_cast<double>(t);
    for (std::size_t j = 0; j < d; ++j) model.weights[j] = sum[j] / T;
    model.bias = b_sum / T;
    return model;
}

std::vector<double> decision_function(const SvmModel& model, const SparseMatrix& X_raw) {
    if (X_raw.n_cols != model.weights.size())
        throw DataError("feature matrix has " + std::to_string(X_raw.n_cols) + " columns, model expects " +
                        std::to_string(model.weights.size()));
    const SparseMatrix X = apply_standardization(model.standardization, X_raw);
    std::vector<double> out(X.n_rows);
    for (std::size_t r = 0; r < X.n_rows; ++r) out[r] = sparse_dot(model.weights, X.row(r)) + model.bias;
    return out;
}

std::vector<int> predict_label_svm(const SvmModel& model, const SparseMatrix& X, double threshold) {
    const auto f = decision_function(model, X);
    std::vector<int> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] >= threshold ? 1 : 0;
    return out;
}

double svm_objective(const SvmModel& model, const SparseMatrix& X, std::span<const int> y) {
    if (X.n_rows != y.size() || y.empty()) throw DataError("objective needs labels for every row");
    const auto f = decision_function(model, X);
    double hinge = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        hinge += std::max(0.0, 1.0 - (y[i] ? 1.0 : -1.0) * f[i]);
    const double w2 = std::inner_product(model.weights.begin(), model.weights.end(), model.weights.begin(), 0.0);
    return 0.5 * model.params.lambda * w2 + hinge / static_cast<double>(f.size());
}

} // namespace aitd
