#include "bugmine/learn.hpp"

#include "rng.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <map>
#include <set>

namespace bugmine::learn {

LabeledSet label(const std::vector<DatasetEntry>& entries)
{
    LabeledSet out;
    if (entries.empty())
        return out;
    const auto level = entries.front().level;
    const auto cols = metrics::columns(level);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const bool complete = std::all_of(entries.begin(), entries.end(), [&](const DatasetEntry& e) {
            return e.level == level && c < e.metrics.values().size() && e.metrics.values()[c].has_value();
        });
        if (complete) {
            keep.push_back(c);
            out.feature_names.emplace_back(cols[c]);
        }
    }
    for (const auto& e : entries) {
        LabeledInstance li;
        li.features.reserve(keep.size());
        for (auto c : keep)
            li.features.push_back(*e.metrics.values()[c]);
        li.buggy = e.bug_count > 0;
        li.fqn = e.fqn;
        li.parent_fqn = e.parent_fqn;
        li.commit = e.commit_hash;
        out.instances.push_back(std::move(li));
    }
    return out;
}

std::vector<LabeledInstance> undersample(const std::vector<LabeledInstance>& instances, std::uint64_t seed)
{
    std::vector<std::size_t> buggy, clean;
    for (std::size_t i = 0; i < instances.size(); ++i)
        (instances[i].buggy ? buggy : clean).push_back(i);
    if (buggy.empty() || clean.empty())
        throw ValidationError("under-sampling needs both classes", {buggy.empty() ? "buggy" : "clean"});
    auto& major = buggy.size() > clean.size() ? buggy : clean;
    const auto target = std::min(buggy.size(), clean.size());
    Rng rng(seed);
    rng.partial_shuffle(major, target);
    std::vector<char> keep(instances.size(), 1);
    for (std::size_t i = target; i < major.size(); ++i)
        keep[major[i]] = 0;
    std::vector<LabeledInstance> out;
    out.reserve(2 * target);
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (keep[i])
            out.push_back(instances[i]);
    return out;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o)
{
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

void tally(ConfusionMatrix& m, bool predicted, bool actual)
{
    if (predicted)
        (actual ? m.tp : m.fp)++;
    else
        (actual ? m.fn : m.tn)++;
}

PRF prf(const ConfusionMatrix& m)
{
    PRF r;
    r.precision_undefined = m.tp + m.fp == 0;
    r.recall_undefined = m.tp + m.fn == 0;
    r.precision = r.precision_undefined ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    r.recall = r.recall_undefined ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    r.f_measure = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

std::vector<int> stratified_folds(const std::vector<LabeledInstance>& instances, int k, std::uint64_t seed)
{
    std::vector<std::size_t> buggy, clean;
    for (std::size_t i = 0; i < instances.size(); ++i)
        (instances[i].buggy ? buggy : clean).push_back(i);
    Rng rng(seed);
    rng.partial_shuffle(buggy, buggy.size());
    rng.partial_shuffle(clean, clean.size());
    std::vector<int> fold(instances.size(), 0);
    std::size_t dealt = 0;
    for (auto i : buggy)
        fold[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
    for (auto i : clean)
        fold[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
    return fold;
}

EvalResult cross_validate(const LearnerFactory& factory, const std::vector<LabeledInstance>& instances,
                          const CvOptions& options)
{
    std::size_t nb = 0;
    for (const auto& i : instances)
        nb += i.buggy ? 1 : 0;
    const auto smaller = static_cast<int>(std::min(nb, instances.size() - nb));
    if (smaller < 2)
        throw ValidationError(fmt::format("cross-validation needs at least 2 instances per class ({} buggy, {} clean)",
                                          nb, instances.size() - nb),
                              {});
    int k = options.k;
    if (k < 2)
        throw ValidationError(fmt::format("k must be at least 2, got {}", k), {});
    if (smaller < k) {
        spdlog::debug("cross-validation: smaller class has {} instances, using {} folds instead of {}", smaller,
                     smaller, k);
        k = smaller;
    }

    EvalResult res;
    res.k = k;
    res.repeats = options.repeats;
    for (int r = 0; r < options.repeats; ++r) {
        const auto folds = stratified_folds(instances, k, mix_seed(options.seed, static_cast<std::uint64_t>(r)));
        for (int f = 0; f < k; ++f) {
            std::vector<LabeledInstance> training;
            for (std::size_t i = 0; i < instances.size(); ++i)
                if (folds[i] != f)
                    training.push_back(instances[i]);
            if (options.undersample_training)
                training = undersample(training, mix_seed(options.seed, static_cast<std::uint64_t>(r),
                                                          static_cast<std::uint64_t>(f), 1));
            auto model = factory(training,
                                 mix_seed(options.seed, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(f), 2),
                                 f);
            ConfusionMatrix m;
            for (std::size_t i = 0; i < instances.size(); ++i) {
                if (folds[i] != f)
                    continue;
                const bool p = model->predict(instances[i].features);
                tally(m, p, instances[i].buggy);
                res.predictions.push_back({i, r, f, p});
            }
            res.folds.push_back(m);
            res.matrix += m;
        }
    }
    res.scores = prf(res.matrix);
    return res;
}

EvalResult cross_validate(std::string_view algorithm, const std::vector<LabeledInstance>& instances,
                          const CvOptions& options, const Hyperparameters& hyper)
{
    const std::string algo(algorithm);
    if (!is_algorithm(algo))
        throw ValidationError(fmt::format("unknown algorithm '{}'", algo), {algo});
    auto res = cross_validate(
        [&](const std::vector<LabeledInstance>& training, std::uint64_t seed, int) {
            return train(algo, training, hyper, seed);
        },
        instances, options);
    res.algorithm = algo;
    return res;
}

ConfusionMatrix project_to_class(const std::vector<MethodPrediction>& methods)
{
    std::map<std::pair<std::string, std::string>, std::pair<bool, bool>> classes;
    for (const auto& m : methods) {
        auto& c = classes[{m.commit, m.parent_fqn}];
        c.first = c.first || m.predicted;
        c.second = c.second || m.actual;
    }
    ConfusionMatrix out;
    for (const auto& [key, c] : classes)
        tally(out, c.first, c.second);
    return out;
}

EvalResult project_result(const EvalResult& method_result, const std::vector<LabeledInstance>& methods)
{
    EvalResult res;
    res.algorithm = method_result.algorithm;
    res.level = "projected";
    res.k = method_result.k;
    res.repeats = method_result.repeats;
    std::map<std::pair<int, int>, std::vector<MethodPrediction>> by_fold;
    for (const auto& p : method_result.predictions) {
        const auto& inst = methods.at(p.index);
        if (!inst.parent_fqn)
            throw ValidationError(fmt::format("method {} has no parent class", inst.fqn), {inst.fqn});
        by_fold[{p.repeat, p.fold}].push_back({inst.fqn, *inst.parent_fqn, p.predicted, inst.buggy, inst.commit});
    }
    for (const auto& [key, preds] : by_fold) {
        auto m = project_to_class(preds);
        res.folds.push_back(m);
        res.matrix += m;
    }
    res.scores = prf(res.matrix);
    return res;
}

}  // namespace bugmine::learn
