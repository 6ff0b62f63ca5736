#include "bugmine/learn.hpp"

#include "rng.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bugmine::learn {

namespace {

double hyper_or(const Hyperparameters& h, const char* key, double fallback)
{
    auto it = h.find(key);
    return it == h.end() ? fallback : it->second;
}

class ConstantModel : public Model {
public:
    explicit ConstantModel(bool label) : label_(label) {}
    bool predict(std::span<const double>) const override { return label_; }

private:
    bool label_;
};

/// Majority label; an exact tie is broken by the coin so no class is favored.
bool majority(double buggy, double total, Rng& rng)
{
    const double clean = total - buggy;
    if (buggy != clean)
        return buggy > clean;
    return rng.coin();
}

// ---- OneR

class OneRModel : public Model {
public:
    OneRModel(std::size_t feature, double threshold, bool low, bool high)
        : feature_(feature), threshold_(threshold), low_(low), high_(high) {}

    bool predict(std::span<const double> x) const override { return x[feature_] <= threshold_ ? low_ : high_; }

private:
    std::size_t feature_;
    double threshold_;
    bool low_, high_;
};

std::unique_ptr<Model> train_one_r(const std::vector<LabeledInstance>& data, Rng& rng)
{
    const auto d = data.front().features.size();
    const auto n = data.size();
    std::size_t total_buggy = 0;
    for (const auto& x : data)
        total_buggy += x.buggy;

    std::optional<std::tuple<std::size_t, std::size_t, double, bool, bool>> best;  // correct, feature, t, low, high
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return data[a].features[j] < data[b].features[j]; });
        std::size_t left_buggy = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_buggy += data[order[i]].buggy;
            const double v = data[order[i]].features[j], next = data[order[i + 1]].features[j];
            if (v == next)
                continue;
            const auto left_n = i + 1, right_n = n - left_n;
            const auto right_buggy = total_buggy - left_buggy;
            const bool low = 2 * left_buggy > left_n;
            const bool high = 2 * right_buggy >= right_n;
            const auto correct = (low ? left_buggy : left_n - left_buggy) + (high ? right_buggy : right_n - right_buggy);
            if (!best || correct > std::get<0>(*best))
                best = std::make_tuple(correct, j, v + (next - v) / 2, low, high);
        }
    }
    if (!best)
        return std::make_unique<ConstantModel>(majority(static_cast<double>(total_buggy), static_cast<double>(n), rng));
    auto [correct, j, t, low, high] = *best;
    return std::make_unique<OneRModel>(j, t, low, high);
}

// ---- Gaussian naive Bayes

class NaiveBayesModel : public Model {
public:
    struct ClassStats {
        double log_prior = 0;
        std::vector<double> mean, var;
    };

    NaiveBayesModel(ClassStats buggy, ClassStats clean) : buggy_(std::move(buggy)), clean_(std::move(clean)) {}

    bool predict(std::span<const double> x) const override { return score(buggy_, x) > score(clean_, x); }

private:
    static double score(const ClassStats& c, std::span<const double> x)
    {
        double s = c.log_prior;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double dx = x[j] - c.mean[j];
            s += -0.5 * std::log(2 * M_PI * c.var[j]) - dx * dx / (2 * c.var[j]);
        }
        return s;
    }

    ClassStats buggy_, clean_;
};

std::unique_ptr<Model> train_naive_bayes(const std::vector<LabeledInstance>& data)
{
    const auto d = data.front().features.size();
    // Variance floor relative to the overall spread of each feature.
    std::vector<double> mean_all(d, 0), var_all(d, 0);
    for (const auto& x : data)
        for (std::size_t j = 0; j < d; ++j)
            mean_all[j] += x.features[j] / static_cast<double>(data.size());
    for (const auto& x : data)
        for (std::size_t j = 0; j < d; ++j)
            var_all[j] += std::pow(x.features[j] - mean_all[j], 2) / static_cast<double>(data.size());

    auto stats = [&](bool label) {
        NaiveBayesModel::ClassStats c;
        c.mean.assign(d, 0);
        c.var.assign(d, 0);
        double n = 0;
        for (const auto& x : data)
            if (x.buggy == label)
                ++n;
        for (const auto& x : data)
            if (x.buggy == label)
                for (std::size_t j = 0; j < d; ++j)
                    c.mean[j] += x.features[j] / n;
        for (const auto& x : data)
            if (x.buggy == label)
                for (std::size_t j = 0; j < d; ++j)
                    c.var[j] += std::pow(x.features[j] - c.mean[j], 2) / n;
        for (std::size_t j = 0; j < d; ++j)
            c.var[j] += 1e-9 * std::max(var_all[j], 1.0);
        c.log_prior = std::log(n / static_cast<double>(data.size()));
        return c;
    };
    return std::make_unique<NaiveBayesModel>(stats(true), stats(false));
}

// ---- L2-regularized logistic regression

class LogisticModel : public Model {
public:
    LogisticModel(std::vector<double> mean, std::vector<double> scale, std::vector<double> w, double b)
        : mean_(std::move(mean)), scale_(std::move(scale)), w_(std::move(w)), b_(b) {}

    bool predict(std::span<const double> x) const override
    {
        double z = b_;
        for (std::size_t j = 0; j < x.size(); ++j)
            z += w_[j] * (x[j] - mean_[j]) / scale_[j];
        return z > 0;
    }

private:
    std::vector<double> mean_, scale_, w_;
    double b_;
};

std::unique_ptr<Model> train_logistic(const std::vector<LabeledInstance>& data, const Hyperparameters& hyper)
{
    const double lambda = hyper_or(hyper, "ridge", 1e-4);
    const double rate = hyper_or(hyper, "learning_rate", 0.5);
    const auto iterations = static_cast<int>(hyper_or(hyper, "iterations", 500));
    const auto d = data.front().features.size();
    const auto n = static_cast<double>(data.size());

    std::vector<double> mean(d, 0), scale(d, 0);
    for (const auto& x : data)
        for (std::size_t j = 0; j < d; ++j)
            mean[j] += x.features[j] / n;
    for (const auto& x : data)
        for (std::size_t j = 0; j < d; ++j)
            scale[j] += std::pow(x.features[j] - mean[j], 2) / n;
    for (auto& s : scale)
        s = s > 0 ? std::sqrt(s) : 1.0;

    std::vector<std::vector<double>> z(data.size(), std::vector<double>(d));
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < d; ++j)
            z[i][j] = (data[i].features[j] - mean[j]) / scale[j];

    std::vector<double> w(d, 0), grad(d);
    double b = 0;
    for (int it = 0; it < iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double gb = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            double s = b;
            for (std::size_t j = 0; j < d; ++j)
                s += w[j] * z[i][j];
            const double err = 1 / (1 + std::exp(-s)) - (data[i].buggy ? 1.0 : 0.0);
            for (std::size_t j = 0; j < d; ++j)
                grad[j] += err * z[i][j] / n;
            gb += err / n;
        }
        double norm = gb * gb;
        for (std::size_t j = 0; j < d; ++j) {
            grad[j] += lambda * w[j];
            norm += grad[j] * grad[j];
        }
        for (std::size_t j = 0; j < d; ++j)
            w[j] -= rate * grad[j];
        b -= rate * gb;
        if (norm < 1e-12)
            break;
    }
    return std::make_unique<LogisticModel>(std::move(mean), std::move(scale), std::move(w), b);
}

// ---- trees

struct Node {
    int feature = -1;  ///< -1 for leaves
    double threshold = 0;
    int left = -1, right = -1;
    double n = 0, n_buggy = 0;
    bool label = false;
};

class TreeModel : public Model {
public:
    explicit TreeModel(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    bool predict(std::span<const double> x) const override
    {
        int i = 0;
        while (nodes_[i].feature >= 0)
            i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
        return nodes_[i].label;
    }

    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

double entropy(double buggy, double total)
{
    if (total <= 0)
        return 0;
    double h = 0;
    for (double c : {buggy, total - buggy})
        if (c > 0)
            h -= c / total * std::log2(c / total);
    return h;
}

struct TreeParams {
    int min_leaf = 1;
    int features_per_node = 0;  ///< 0 = all features
    bool gain_ratio = false;    ///< C4.5 selection: gain ratio among above-average gains
    int max_depth = 0;          ///< 0 = unlimited
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0;
    double gain = 0;
    double split_info = 0;
    double ratio = 0;
};

class TreeBuilder {
public:
    TreeBuilder(const std::vector<LabeledInstance>& data, const TreeParams& params, Rng& rng)
        : data_(data), params_(params), rng_(rng)
    {}

    std::vector<Node> build(std::vector<std::size_t> rows)
    {
        grow(rows, 0);
        return std::move(nodes_);
    }

private:
    int grow(std::vector<std::size_t>& rows, int depth)
    {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        Node node;
        node.n = static_cast<double>(rows.size());
        for (auto r : rows)
            node.n_buggy += data_[r].buggy;
        node.label = majority(node.n_buggy, node.n, rng_);

        const bool pure = node.n_buggy == 0 || node.n_buggy == node.n;
        const bool deep = params_.max_depth > 0 && depth >= params_.max_depth;
        std::optional<Split> split;
        if (!pure && !deep && rows.size() >= static_cast<std::size_t>(2 * params_.min_leaf))
            split = best_split(rows, node);
        if (!split) {
            nodes_[id] = node;
            return id;
        }
        std::vector<std::size_t> left, right;
        for (auto r : rows)
            (data_[r].features[split->feature] <= split->threshold ? left : right).push_back(r);
        node.feature = static_cast<int>(split->feature);
        node.threshold = split->threshold;
        rows.clear();
        rows.shrink_to_fit();
        node.left = grow(left, depth + 1);
        node.right = grow(right, depth + 1);
        nodes_[id] = node;
        return id;
    }

    std::vector<std::size_t> candidate_features()
    {
        const auto d = data_.front().features.size();
        std::vector<std::size_t> f(d);
        std::iota(f.begin(), f.end(), 0);
        if (params_.features_per_node > 0 && static_cast<std::size_t>(params_.features_per_node) < d) {
            rng_.partial_shuffle(f, static_cast<std::size_t>(params_.features_per_node));
            f.resize(static_cast<std::size_t>(params_.features_per_node));
            std::sort(f.begin(), f.end());
        }
        return f;
    }

    std::optional<Split> best_split(std::vector<std::size_t>& rows, const Node& node)
    {
        const double parent_h = entropy(node.n_buggy, node.n);
        std::vector<Split> per_feature;
        for (auto j : candidate_features()) {
            std::stable_sort(rows.begin(), rows.end(),
                             [&](auto a, auto b) { return data_[a].features[j] < data_[b].features[j]; });
            std::optional<Split> best;
            std::size_t distinct = 1;
            for (std::size_t i = 1; i < rows.size(); ++i)
                distinct += data_[rows[i]].features[j] != data_[rows[i - 1]].features[j];
            double left_buggy = 0;
            for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
                left_buggy += data_[rows[i]].buggy;
                const double v = data_[rows[i]].features[j], next = data_[rows[i + 1]].features[j];
                if (v == next)
                    continue;
                const double ln = static_cast<double>(i + 1), rn = node.n - ln;
                if (ln < params_.min_leaf || rn < params_.min_leaf)
                    continue;
                const double h = (ln * entropy(left_buggy, ln) + rn * entropy(node.n_buggy - left_buggy, rn)) / node.n;
                const double gain = parent_h - h;
                if (!best || gain > best->gain)
                    best = Split{j, v + (next - v) / 2, gain, entropy(ln, node.n), 0};
            }
            if (!best)
                continue;
            if (params_.gain_ratio) {
                // C4.5 penalty for choosing among many numeric thresholds.
                best->gain -= std::log2(static_cast<double>(distinct - 1)) / node.n;
                best->ratio = best->split_info > 0 ? best->gain / best->split_info : 0;
            }
            if (best->gain > 1e-12)
                per_feature.push_back(*best);
        }
        if (per_feature.empty())
            return std::nullopt;
        if (!params_.gain_ratio) {
            return *std::max_element(per_feature.begin(), per_feature.end(),
                                     [](const Split& a, const Split& b) { return a.gain < b.gain; });
        }
        double avg = 0;
        for (const auto& s : per_feature)
            avg += s.gain / static_cast<double>(per_feature.size());
        std::optional<Split> chosen;
        for (const auto& s : per_feature)
            if (s.gain >= avg - 1e-12 && (!chosen || s.ratio > chosen->ratio))
                chosen = s;
        return chosen;
    }

    const std::vector<LabeledInstance>& data_;
    TreeParams params_;
    Rng& rng_;
    std::vector<Node> nodes_;
};

/// Upper confidence bound on errors at a leaf, as in C4.5's pessimistic pruning.
double added_errors(double n, double e, double cf)
{
    constexpr double z = 0.6744897501960817;  // normal quantile at 1 - 0.25
    if (cf != 0.25)
        throw ValidationError("decision_tree supports confidence 0.25 only", {"confidence"});
    if (e < 1) {
        const double base = n * (1 - std::pow(cf, 1 / n));
        if (e == 0)
            return base;
        return base + e * (added_errors(n, 1, cf) - base);
    }
    if (e + 0.5 >= n)
        return std::max(n - e, 0.0);
    const double f = (e + 0.5) / n;
    const double r =
        (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n);
    return r * n - e;
}

double leaf_errors(const Node& n)
{
    return n.n - std::max(n.n_buggy, n.n - n.n_buggy);
}

/// Subtree replacement, bottom-up. Returns the estimated errors of the kept subtree.
double prune(std::vector<Node>& nodes, int i, double cf)
{
    auto& node = nodes[i];
    const double as_leaf = leaf_errors(node) + added_errors(node.n, leaf_errors(node), cf);
    if (node.feature < 0)
        return as_leaf;
    const double subtree = prune(nodes, node.left, cf) + prune(nodes, node.right, cf);
    if (as_leaf <= subtree + 0.1) {
        nodes[i].feature = -1;
        return as_leaf;
    }
    return subtree;
}

/// Drops nodes no longer reachable after pruning.
std::vector<Node> compact(const std::vector<Node>& nodes)
{
    std::vector<Node> out;
    auto copy = [&](auto& self, int i) -> int {
        const int id = static_cast<int>(out.size());
        out.push_back(nodes[i]);
        if (nodes[i].feature >= 0) {
            const int l = self(self, nodes[i].left);
            const int r = self(self, nodes[i].right);
            out[id].left = l;
            out[id].right = r;
        }
        return id;
    };
    copy(copy, 0);
    return out;
}

std::vector<std::size_t> all_rows(std::size_t n)
{
    std::vector<std::size_t> r(n);
    std::iota(r.begin(), r.end(), 0);
    return r;
}

std::unique_ptr<TreeModel> train_decision_tree(const std::vector<LabeledInstance>& data, const Hyperparameters& hyper,
                                               Rng& rng)
{
    TreeParams p;
    p.min_leaf = static_cast<int>(hyper_or(hyper, "min_leaf", 2));
    p.gain_ratio = true;
    auto nodes = TreeBuilder(data, p, rng).build(all_rows(data.size()));
    if (hyper_or(hyper, "unpruned", 0) == 0)
        prune(nodes, 0, hyper_or(hyper, "confidence", 0.25));
    return std::make_unique<TreeModel>(compact(nodes));
}

int default_features_per_node(std::size_t d)
{
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
}

/// Grows one random tree; with bootstrap the rows are drawn with replacement first.
std::unique_ptr<TreeModel> train_random_tree(const std::vector<LabeledInstance>& data, const Hyperparameters& hyper,
                                             std::uint64_t seed)
{
    Rng rng(seed);
    TreeParams p;
    p.min_leaf = static_cast<int>(hyper_or(hyper, "min_leaf", 1));
    p.max_depth = static_cast<int>(hyper_or(hyper, "max_depth", 0));
    const auto k = static_cast<int>(hyper_or(hyper, "features", 0));
    p.features_per_node = k > 0 ? k : default_features_per_node(data.front().features.size());
    std::vector<std::size_t> rows;
    if (hyper_or(hyper, "bootstrap", 0) != 0) {
        rows.resize(data.size());
        for (auto& r : rows)
            r = rng.below(data.size());
    } else {
        rows = all_rows(data.size());
    }
    return std::make_unique<TreeModel>(TreeBuilder(data, p, rng).build(std::move(rows)));
}

class ForestModel : public Model {
public:
    explicit ForestModel(std::vector<std::unique_ptr<TreeModel>> trees) : trees_(std::move(trees)) {}

    bool predict(std::span<const double> x) const override
    {
        std::size_t votes = 0;
        for (const auto& t : trees_)
            votes += t->predict(x);
        if (2 * votes != trees_.size())
            return 2 * votes > trees_.size();
        return trees_.front()->predict(x);
    }

private:
    std::vector<std::unique_ptr<TreeModel>> trees_;
};

std::unique_ptr<Model> train_random_forest(const std::vector<LabeledInstance>& data, const Hyperparameters& hyper,
                                           std::uint64_t seed)
{
    const auto n_trees = static_cast<int>(hyper_or(hyper, "trees", 100));
    if (n_trees < 1)
        throw ValidationError("random_forest needs at least one tree", {"trees"});
    auto tree_hyper = hyper;
    tree_hyper.erase("trees");
    tree_hyper["bootstrap"] = 1;
    std::vector<std::unique_ptr<TreeModel>> trees;
    for (int t = 0; t < n_trees; ++t)
        trees.push_back(train_random_tree(data, tree_hyper, t == 0 ? seed : mix_seed(seed, static_cast<std::uint64_t>(t))));
    return std::make_unique<ForestModel>(std::move(trees));
}

}  // namespace

bool is_algorithm(std::string_view id)
{
    return std::find(std::begin(algorithms), std::end(algorithms), id) != std::end(algorithms);
}

std::unique_ptr<Model> train(std::string_view algorithm, const std::vector<LabeledInstance>& instances,
                             const Hyperparameters& hyper, std::uint64_t seed)
{
    if (!is_algorithm(algorithm))
        throw ValidationError(fmt::format("unknown algorithm '{}'", algorithm), {std::string(algorithm)});
    Rng rng(seed);
    std::size_t buggy = 0;
    for (const auto& x : instances)
        buggy += x.buggy;
    if (buggy == 0 || buggy == instances.size()) {
        spdlog::warn("{}: training set has a single class, using a constant model", algorithm);
        return std::make_unique<ConstantModel>(buggy > 0);
    }
    if (algorithm == "one_r")
        return train_one_r(instances, rng);
    if (algorithm == "naive_bayes")
        return train_naive_bayes(instances);
    if (algorithm == "logistic")
        return train_logistic(instances, hyper);
    if (algorithm == "decision_tree")
        return train_decision_tree(instances, hyper, rng);
    if (algorithm == "random_tree")
        return train_random_tree(instances, hyper, seed);
    return train_random_forest(instances, hyper, seed);
}

}  // namespace bugmine::learn
