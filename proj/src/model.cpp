#include "paynet/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <type_traits>

namespace paynet {

FeatureMatrix FeatureMatrix::slice(std::size_t first, std::size_t count) const {
    FeatureMatrix out = *this;
    out.values = values.subspan(first * cols, count * cols);
    out.rows = count;
    return out;
}

double RegressionTree::predict(std::span<const double> x) const {
    if (nodes_.empty()) return 0.0;
    std::size_t k = 0;
    while (!nodes_[k].is_leaf()) {
        const TreeNode& node = nodes_[k];
        const double v = x[static_cast<std::size_t>(node.feature)];
        bool left;
        if (node.categories.empty()) {
            left = v <= node.threshold;
        } else {
            left = v >= 0.0 && v == std::floor(v) && v <= std::numeric_limits<std::uint32_t>::max() &&
                   std::binary_search(node.categories.begin(), node.categories.end(), static_cast<std::uint32_t>(v));
        }
        k = static_cast<std::size_t>(left ? node.left : node.right);
    }
    return nodes_[k].value;
}

std::size_t RegressionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [k, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes_[k].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes_[k].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes_[k].right), d + 1);
        }
    }
    return deepest;
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

// Training rows in canonical order with every feature pre-binned.
struct Prepared {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<std::uint32_t> order;                 // canonical position -> input row
    std::vector<std::vector<std::uint16_t>> bins;     // [feature][canonical position]
    std::vector<std::vector<double>> cuts;            // numeric: thresholds; categorical: codes
    std::vector<ColumnKind> kinds;
    std::vector<double> y;                            // canonical order
};

double split_point(double a, double b) {
    const double m = std::midpoint(a, b);
    return m < b ? m : a;
}

std::vector<double> numeric_cuts(std::vector<double> values, std::size_t max_bins) {
    std::sort(values.begin(), values.end());
    std::vector<double> uniq;
    std::vector<std::size_t> upto;  // rows with value <= uniq[i]
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (uniq.empty() || values[i] != uniq.back()) {
            uniq.push_back(values[i]);
            upto.push_back(0);
        }
        upto.back() = i + 1;
    }
    std::vector<double> cuts;
    if (uniq.size() <= max_bins) {
        for (std::size_t i = 0; i + 1 < uniq.size(); ++i) cuts.push_back(split_point(uniq[i], uniq[i + 1]));
        return cuts;
    }
    const std::size_t n = values.size();
    std::size_t u = 0;
    for (std::size_t k = 1; k < max_bins; ++k) {
        const std::size_t pos = k * n / max_bins;
        while (u < uniq.size() && upto[u] < pos) ++u;
        if (u + 1 >= uniq.size()) break;
        const double c = split_point(uniq[u], uniq[u + 1]);
        if (cuts.empty() || c > cuts.back()) cuts.push_back(c);
    }
    return cuts;
}

void check_inputs(const FeatureMatrix& x, std::span<const double> y) {
    if (x.values.size() != x.rows * x.cols || x.kinds.size() != x.cols)
        throw DataError("model: feature matrix shape mismatch");
    if (y.size() != x.rows) throw DataError("model: target length differs from row count");
    if (x.rows == 0) throw DataError("model: no training rows");
    if (x.rows > std::numeric_limits<std::uint32_t>::max()) throw DataError("model: too many rows");
    for (double v : x.values)
        if (!std::isfinite(v)) throw DataError("model: non-finite feature value");
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("model: non-finite target");
}

void check_params(const TreeParams& p) {
    if (p.min_leaf < 1) throw ConfigError("model: min_leaf must be >= 1");
    if (!(p.feature_subsample > 0.0 && p.feature_subsample <= 1.0))
        throw ConfigError("model: feature_subsample must lie in (0, 1]");
    if (p.max_bins < 2 || p.max_bins > 65536) throw ConfigError("model: max_bins must lie in [2, 65536]");
}

Prepared prepare(const FeatureMatrix& x, std::span<const double> y, std::size_t max_bins) {
    check_inputs(x, y);
    Prepared d;
    d.n = x.rows;
    d.p = x.cols;
    d.kinds.assign(x.kinds.begin(), x.kinds.end());
    d.order.resize(d.n);
    std::iota(d.order.begin(), d.order.end(), 0U);
    std::sort(d.order.begin(), d.order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const auto ra = x.row(a);
        const auto rb = x.row(b);
        for (std::size_t f = 0; f < d.p; ++f)
            if (ra[f] != rb[f]) return ra[f] < rb[f];
        if (y[a] != y[b]) return y[a] < y[b];
        return false;
    });
    d.y.resize(d.n);
    for (std::size_t r = 0; r < d.n; ++r) d.y[r] = y[d.order[r]];

    d.bins.assign(d.p, std::vector<std::uint16_t>(d.n));
    d.cuts.resize(d.p);
    std::vector<double> column(d.n);
    for (std::size_t f = 0; f < d.p; ++f) {
        for (std::size_t r = 0; r < d.n; ++r) column[r] = x.row(d.order[r])[f];
        auto& cuts = d.cuts[f];
        if (d.kinds[f] == ColumnKind::categorical) {
            for (double v : column)
                if (v < 0.0 || v != std::floor(v) || v > std::numeric_limits<std::uint32_t>::max())
                    throw DataError("model: categorical value is not a non-negative integer");
            cuts = column;
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            if (cuts.size() > 65536) throw DataError("model: too many categories");
            for (std::size_t r = 0; r < d.n; ++r)
                d.bins[f][r] = static_cast<std::uint16_t>(std::lower_bound(cuts.begin(), cuts.end(), column[r]) -
                                                          cuts.begin());
        } else {
            cuts = numeric_cuts(column, max_bins);
            for (std::size_t r = 0; r < d.n; ++r)
                d.bins[f][r] = static_cast<std::uint16_t>(std::lower_bound(cuts.begin(), cuts.end(), column[r]) -
                                                          cuts.begin());
        }
    }
    return d;
}

std::size_t bin_count(const Prepared& d, std::size_t f) {
    return d.kinds[f] == ColumnKind::categorical ? d.cuts[f].size() : d.cuts[f].size() + 1;
}

class Grower {
public:
    Grower(const Prepared& data, std::span<const double> targets, const TreeParams& params, Rng& rng)
        : d_(data), t_(targets), params_(params), rng_(rng) {
        std::size_t widest = 1;
        for (std::size_t f = 0; f < d_.p; ++f) widest = std::max(widest, bin_count(d_, f));
        count_.resize(widest);
        sum_.resize(widest);
        hist_.resize(widest);
        left_.resize(widest);
        all_features_.resize(d_.p);
        std::iota(all_features_.begin(), all_features_.end(), 0U);
        const auto m = std::llround(static_cast<double>(d_.p) * params_.feature_subsample);
        tried_ = static_cast<std::size_t>(
            std::clamp<long long>(m, 1, static_cast<long long>(std::max<std::size_t>(d_.p, 1))));
    }

    /// `weights[r]` is how many times canonical row r was drawn; rows with
    /// weight zero are left out.
    RegressionTree grow(std::span<const std::uint32_t> weights) {
        rows_.clear();
        weighted_.assign(d_.n, Cell{});
        for (std::size_t r = 0; r < d_.n; ++r) {
            if (weights[r] == 0) continue;
            rows_.push_back(static_cast<std::uint32_t>(r));
            weighted_[r].count = weights[r];
            weighted_[r].sum = weighted_[r].count * t_[r];
        }
        scratch_.resize(rows_.size());
        nodes_.clear();
        if (!rows_.empty()) node(0, rows_.size(), 0);
        return RegressionTree(std::move(nodes_));
    }

private:
    struct Candidate {
        double gain = 0.0;
        std::size_t feature = 0;
        std::size_t bin = 0;                   // numeric: last bin going left
        std::vector<std::uint16_t> left_bins;  // categorical
        bool found = false;
    };

    std::int32_t node(std::size_t begin, std::size_t end, std::size_t depth) {
        double count = 0.0;
        double sum = 0.0;
        double lo = t_[rows_[begin]];
        double hi = lo;
        for (std::size_t k = begin; k < end; ++k) {
            const std::uint32_t r = rows_[k];
            count += weighted_[r].count;
            sum += weighted_[r].sum;
            lo = std::min(lo, t_[r]);
            hi = std::max(hi, t_[r]);
        }
        const auto index = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_.back().value = lo == hi ? lo : std::clamp(sum / count, lo, hi);

        if (lo == hi || (params_.max_depth > 0 && depth >= params_.max_depth) ||
            count < 2.0 * static_cast<double>(params_.min_leaf))
            return index;
        Candidate best = search(begin, end, count, sum);
        if (!best.found) return index;

        std::fill(left_.begin(), left_.end(), 0);
        TreeNode split;
        split.feature = static_cast<std::int32_t>(best.feature);
        if (d_.kinds[best.feature] == ColumnKind::categorical) {
            for (auto b : best.left_bins) {
                left_[b] = 1;
                split.categories.push_back(static_cast<std::uint32_t>(d_.cuts[best.feature][b]));
            }
            std::sort(split.categories.begin(), split.categories.end());
        } else {
            for (std::size_t b = 0; b <= best.bin; ++b) left_[b] = 1;
            split.threshold = d_.cuts[best.feature][best.bin];
        }
        // stable partition of rows_[begin, end) into left, then right
        const auto& bins = d_.bins[best.feature];
        std::size_t middle = begin;
        std::size_t spill = 0;
        for (std::size_t k = begin; k < end; ++k) {
            const std::uint32_t r = rows_[k];
            if (left_[bins[r]])
                rows_[middle++] = r;
            else
                scratch_[spill++] = r;
        }
        std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(spill),
                  rows_.begin() + static_cast<std::ptrdiff_t>(middle));

        split.left = node(begin, middle, depth + 1);
        split.right = node(middle, end, depth + 1);
        split.value = nodes_[static_cast<std::size_t>(index)].value;
        nodes_[static_cast<std::size_t>(index)] = std::move(split);
        return index;
    }

    std::vector<std::size_t> pick_features() {
        if (tried_ >= d_.p) return all_features_;
        std::vector<std::size_t> pool = all_features_;
        for (std::size_t k = 0; k < tried_; ++k) {
            const auto j = k + static_cast<std::size_t>(rng_.below(pool.size() - k));
            std::swap(pool[k], pool[j]);
        }
        pool.resize(tried_);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    Candidate search(std::size_t begin, std::size_t end, double n, double total) {
        const double parent = total * total / n;
        const auto min_leaf = static_cast<double>(params_.min_leaf);
        Candidate best;
        for (std::size_t f : pick_features()) {
            const std::size_t nb = bin_count(d_, f);
            if (nb < 2) continue;
            std::fill(hist_.begin(), hist_.begin() + static_cast<std::ptrdiff_t>(nb), Cell{});
            const std::uint16_t* bins = d_.bins[f].data();
            for (std::size_t k = begin; k < end; ++k) {
                const std::uint32_t r = rows_[k];
                Cell& c = hist_[bins[r]];
                c.count += weighted_[r].count;
                c.sum += weighted_[r].sum;
            }
            for (std::size_t b = 0; b < nb; ++b) {
                count_[b] = hist_[b].count;
                sum_[b] = hist_[b].sum;
            }
            auto consider = [&](double cl, double sl, auto&& record) {
                const double cr = n - cl;
                if (cl < min_leaf || cr < min_leaf) return;
                const double sr = total - sl;
                const double gain = sl * sl / cl + sr * sr / cr - parent;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = f;
                    best.found = true;
                    record();
                }
            };
            if (d_.kinds[f] == ColumnKind::numeric) {
                double cl = 0.0, sl = 0.0;
                for (std::size_t b = 0; b + 1 < nb; ++b) {
                    cl += count_[b];
                    sl += sum_[b];
                    if (count_[b] == 0.0) continue;  // same partition as the previous cut
                    consider(cl, sl, [&] {
                        best.bin = b;
                        best.left_bins.clear();
                    });
                }
            } else {
                present_.clear();
                for (std::size_t b = 0; b < nb; ++b)
                    if (count_[b] > 0.0) present_.push_back(static_cast<std::uint16_t>(b));
                std::stable_sort(present_.begin(), present_.end(), [&](std::uint16_t a, std::uint16_t b) {
                    return sum_[a] / count_[a] < sum_[b] / count_[b];
                });
                double cl = 0.0, sl = 0.0;
                for (std::size_t k = 0; k + 1 < present_.size(); ++k) {
                    cl += count_[present_[k]];
                    sl += sum_[present_[k]];
                    consider(cl, sl, [&] {
                        best.left_bins.assign(present_.begin(), present_.begin() + static_cast<std::ptrdiff_t>(k + 1));
                    });
                }
            }
        }
        return best;
    }

    const Prepared& d_;
    std::span<const double> t_;
    const TreeParams& params_;
    Rng& rng_;
    std::vector<std::uint32_t> rows_, scratch_;
    struct Cell {
        double count = 0.0;
        double sum = 0.0;
    };
    std::vector<Cell> weighted_;  // per canonical row: weight, weight * target
    std::vector<Cell> hist_;
    std::vector<TreeNode> nodes_;
    std::vector<double> count_, sum_;
    std::vector<char> left_;
    std::vector<std::uint16_t> present_;
    std::vector<std::size_t> all_features_;
    std::size_t tried_ = 1;
};

std::vector<std::uint32_t> unit_weights(std::size_t n) { return std::vector<std::uint32_t>(n, 1); }

double mean_squared(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

}  // namespace

RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> y, const TreeParams& params, Rng& rng) {
    check_params(params);
    const Prepared d = prepare(x, y, params.max_bins);
    Grower grower(d, d.y, params, rng);
    return grower.grow(unit_weights(d.n));
}

EnsembleModel fit_forest(const FeatureMatrix& x, std::span<const double> y, const ForestParams& params,
                         std::size_t jobs) {
    if (params.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    check_params(params.tree);
    const Prepared d = prepare(x, y, params.tree.max_bins);

    EnsembleModel model;
    model.kind = ModelKind::forest;
    model.schema_hash = x.schema_hash;
    model.feature_count = x.cols;
    model.seed = params.seed;
    model.forest_params = params;
    model.target_min = *std::min_element(d.y.begin(), d.y.end());
    model.target_max = *std::max_element(d.y.begin(), d.y.end());
    model.trees.resize(params.n_trees);
    parallel_for(params.n_trees, jobs, [&](std::size_t i) {
        Rng rng(forest_tree_seed(params.seed, i));
        std::vector<std::uint32_t> weights;
        if (params.bootstrap) {
            weights.assign(d.n, 0);
            for (std::size_t k = 0; k < d.n; ++k) ++weights[rng.below(d.n)];
        } else {
            weights = unit_weights(d.n);
        }
        Grower grower(d, d.y, params.tree, rng);
        model.trees[i] = grower.grow(weights);
    });
    return model;
}

EnsembleModel fit_boosted(const FeatureMatrix& x, std::span<const double> y, const BoostParams& params) {
    if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0))
        throw ConfigError("boosting: learning_rate must lie in (0, 1]");
    check_params(params.tree);
    if (params.patience > 0 && !(params.validation_fraction > 0.0 && params.validation_fraction < 1.0))
        throw ConfigError("boosting: validation_fraction must lie in (0, 1)");
    check_inputs(x, y);

    std::size_t train_rows = x.rows;
    std::size_t held_out = 0;
    if (params.patience > 0) {
        held_out = static_cast<std::size_t>(std::ceil(static_cast<double>(x.rows) * params.validation_fraction));
        if (held_out == 0 || held_out >= x.rows) throw DataError("boosting: too few rows for a validation split");
        train_rows = x.rows - held_out;
    }
    const FeatureMatrix train = x.slice(0, train_rows);
    const Prepared d = prepare(train, y.first(train_rows), params.tree.max_bins);

    EnsembleModel model;
    model.kind = ModelKind::boosted;
    model.schema_hash = x.schema_hash;
    model.feature_count = x.cols;
    model.seed = params.seed;
    model.boost_params = params;
    model.learning_rate = params.learning_rate;
    model.target_min = *std::min_element(d.y.begin(), d.y.end());
    model.target_max = *std::max_element(d.y.begin(), d.y.end());
    double total = 0.0;
    for (double v : d.y) total += v;
    model.base = total / static_cast<double>(d.n);

    std::vector<double> fitted(d.n, model.base);
    std::vector<double> residual(d.n);
    model.train_mse.push_back(mean_squared(fitted, d.y));

    std::vector<double> valid_fit(held_out, model.base);
    const auto valid_y = y.subspan(train_rows);
    double best_valid = held_out ? mean_squared(valid_fit, valid_y) : 0.0;
    std::size_t best_rounds = 0;

    const auto ones = unit_weights(d.n);
    for (std::size_t round = 0; round < params.n_rounds; ++round) {
        for (std::size_t r = 0; r < d.n; ++r) residual[r] = d.y[r] - fitted[r];
        Rng rng(derive_seed(params.seed, round));
        Grower grower(d, residual, params.tree, rng);
        model.trees.push_back(grower.grow(ones));
        const RegressionTree& tree = model.trees.back();
        for (std::size_t r = 0; r < d.n; ++r)
            fitted[r] += params.learning_rate * tree.predict(train.row(d.order[r]));
        model.train_mse.push_back(mean_squared(fitted, d.y));

        if (params.patience > 0) {
            for (std::size_t r = 0; r < held_out; ++r)
                valid_fit[r] += params.learning_rate * tree.predict(x.row(train_rows + r));
            const double mse = mean_squared(valid_fit, valid_y);
            if (mse < best_valid) {
                best_valid = mse;
                best_rounds = model.trees.size();
            } else if (model.trees.size() - best_rounds >= params.patience) {
                break;
            }
        }
    }
    if (params.patience > 0) {
        model.trees.resize(best_rounds);
        model.train_mse.resize(best_rounds + 1);
    }
    return model;
}

double EnsembleModel::predict_row(std::span<const double> x) const {
    if (kind == ModelKind::boosted) {
        double f = base;
        for (const auto& t : trees) f += learning_rate * t.predict(x);
        return f;
    }
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return std::clamp(s / static_cast<double>(trees.size()), target_min, target_max);
}

std::vector<double> EnsembleModel::predict(const FeatureMatrix& x) const {
    if (x.schema_hash != schema_hash || x.cols != feature_count)
        throw DataError("model: feature schema " + hex64(x.schema_hash) + " does not match training schema " +
                        hex64(schema_hash));
    std::vector<double> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict_row(x.row(r));
    return out;
}

bool EnsembleModel::operator==(const EnsembleModel& o) const {
    auto same_tree = [](const TreeParams& a, const TreeParams& b) {
        return a.max_depth == b.max_depth && a.min_leaf == b.min_leaf && a.feature_subsample == b.feature_subsample &&
               a.max_bins == b.max_bins;
    };
    const auto& fa = forest_params;
    const auto& fb = o.forest_params;
    const auto& ba = boost_params;
    const auto& bb = o.boost_params;
    return kind == o.kind && trees == o.trees && base == o.base && learning_rate == o.learning_rate &&
           schema_hash == o.schema_hash && feature_count == o.feature_count && seed == o.seed &&
           target_min == o.target_min && target_max == o.target_max && train_mse == o.train_mse &&
           fa.n_trees == fb.n_trees && fa.bootstrap == fb.bootstrap && fa.seed == fb.seed &&
           same_tree(fa.tree, fb.tree) && ba.n_rounds == bb.n_rounds && ba.learning_rate == bb.learning_rate &&
           ba.seed == bb.seed && ba.patience == bb.patience && ba.validation_fraction == bb.validation_fraction &&
           same_tree(ba.tree, bb.tree);
}

MetricSet evaluate_metrics(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw DataError("metrics: length mismatch");
    if (targets.size() < 2) throw DataError("metrics: need at least 2 observations");
    const auto n = static_cast<double>(targets.size());
    double mean = 0.0;
    for (double v : targets) mean += v;
    mean /= n;
    double ss_res = 0.0, ss_tot = 0.0, abs_err = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double e = targets[i] - predictions[i];
        ss_res += e * e;
        abs_err += std::fabs(e);
        ss_tot += (targets[i] - mean) * (targets[i] - mean);
    }
    MetricSet m;
    m.count = targets.size();
    if (ss_tot > 0.0) m.r2 = 1.0 - ss_res / ss_tot;
    m.rmse = std::sqrt(ss_res / n) * 100.0;
    m.mae = abs_err / n * 100.0;
    return m;
}

// Serialization

namespace {

std::string hexfloat(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double read_double(std::istream& in) {
    std::string token;
    if (!(in >> token)) throw DataError("model file: unexpected end of input");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) throw DataError("model file: bad number '" + token + "'");
    return v;
}

template <typename T>
T read_int(std::istream& in) {
    long long v = 0;
    unsigned long long u = 0;
    if constexpr (std::is_signed_v<T>) {
        if (!(in >> v)) throw DataError("model file: expected integer");
        return static_cast<T>(v);
    } else {
        if (!(in >> u)) throw DataError("model file: expected integer");
        return static_cast<T>(u);
    }
}

void expect(std::istream& in, const char* word) {
    std::string token;
    if (!(in >> token) || token != word)
        throw DataError(std::string("model file: expected '") + word + "', got '" + token + "'");
}

void write_tree_params(std::ostream& out, const TreeParams& p) {
    out << p.max_depth << ' ' << p.min_leaf << ' ' << hexfloat(p.feature_subsample) << ' ' << p.max_bins;
}

TreeParams read_tree_params(std::istream& in) {
    TreeParams p;
    p.max_depth = read_int<std::size_t>(in);
    p.min_leaf = read_int<std::size_t>(in);
    p.feature_subsample = read_double(in);
    p.max_bins = read_int<std::size_t>(in);
    return p;
}

}  // namespace

void save_model(const EnsembleModel& m, std::ostream& out) {
    out << "paynet-model 1\n";
    out << "kind " << (m.kind == ModelKind::forest ? "forest" : "boosted") << '\n';
    out << "seed " << m.seed << '\n';
    out << "schema " << m.schema_hash << ' ' << m.feature_count << '\n';
    out << "base " << hexfloat(m.base) << '\n';
    out << "learning_rate " << hexfloat(m.learning_rate) << '\n';
    out << "target_range " << hexfloat(m.target_min) << ' ' << hexfloat(m.target_max) << '\n';
    const auto& f = m.forest_params;
    out << "forest " << f.n_trees << ' ' << (f.bootstrap ? 1 : 0) << ' ' << f.seed << ' ';
    write_tree_params(out, f.tree);
    out << '\n';
    const auto& b = m.boost_params;
    out << "boost " << b.n_rounds << ' ' << hexfloat(b.learning_rate) << ' ' << b.seed << ' ' << b.patience << ' '
        << hexfloat(b.validation_fraction) << ' ';
    write_tree_params(out, b.tree);
    out << '\n';
    out << "train_mse " << m.train_mse.size();
    for (double v : m.train_mse) out << ' ' << hexfloat(v);
    out << '\n';
    out << "trees " << m.trees.size() << '\n';
    for (const auto& t : m.trees) {
        out << "tree " << t.nodes().size() << '\n';
        for (const auto& n : t.nodes()) {
            out << n.feature << ' ' << hexfloat(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
                << hexfloat(n.value) << ' ' << n.categories.size();
            for (auto c : n.categories) out << ' ' << c;
            out << '\n';
        }
    }
    out << "end\n";
}

EnsembleModel load_model(std::istream& in) {
    expect(in, "paynet-model");
    if (read_int<int>(in) != 1) throw DataError("model file: unsupported version");
    EnsembleModel m;
    expect(in, "kind");
    std::string kind;
    in >> kind;
    if (kind == "forest")
        m.kind = ModelKind::forest;
    else if (kind == "boosted")
        m.kind = ModelKind::boosted;
    else
        throw DataError("model file: unknown kind '" + kind + "'");
    expect(in, "seed");
    m.seed = read_int<std::uint64_t>(in);
    expect(in, "schema");
    m.schema_hash = read_int<std::uint64_t>(in);
    m.feature_count = read_int<std::size_t>(in);
    expect(in, "base");
    m.base = read_double(in);
    expect(in, "learning_rate");
    m.learning_rate = read_double(in);
    expect(in, "target_range");
    m.target_min = read_double(in);
    m.target_max = read_double(in);
    expect(in, "forest");
    m.forest_params.n_trees = read_int<std::size_t>(in);
    m.forest_params.bootstrap = read_int<int>(in) != 0;
    m.forest_params.seed = read_int<std::uint64_t>(in);
    m.forest_params.tree = read_tree_params(in);
    expect(in, "boost");
    m.boost_params.n_rounds = read_int<std::size_t>(in);
    m.boost_params.learning_rate = read_double(in);
    m.boost_params.seed = read_int<std::uint64_t>(in);
    m.boost_params.patience = read_int<std::size_t>(in);
    m.boost_params.validation_fraction = read_double(in);
    m.boost_params.tree = read_tree_params(in);
    expect(in, "train_mse");
    m.train_mse.resize(read_int<std::size_t>(in));
    for (auto& v : m.train_mse) v = read_double(in);
    expect(in, "trees");
    const auto tree_count = read_int<std::size_t>(in);
    for (std::size_t t = 0; t < tree_count; ++t) {
        expect(in, "tree");
        std::vector<TreeNode> nodes(read_int<std::size_t>(in));
        for (auto& n : nodes) {
            n.feature = read_int<std::int32_t>(in);
            n.threshold = read_double(in);
            n.left = read_int<std::int32_t>(in);
            n.right = read_int<std::int32_t>(in);
            n.value = read_double(in);
            n.categories.resize(read_int<std::size_t>(in));
            for (auto& c : n.categories) c = read_int<std::uint32_t>(in);
        }
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const auto& n = nodes[k];
            if (n.is_leaf()) continue;
            if (n.left <= static_cast<std::int32_t>(k) || n.right <= static_cast<std::int32_t>(k) ||
                n.left >= static_cast<std::int32_t>(nodes.size()) || n.right >= static_cast<std::int32_t>(nodes.size()))
                throw DataError("model file: bad child index");
            if (static_cast<std::size_t>(n.feature) >= m.feature_count) throw DataError("model file: bad feature index");
        }
        m.trees.emplace_back(std::move(nodes));
    }
    expect(in, "end");
    return m;
}

}  // namespace paynet
