#pragma once

#include "bugmine/dataset.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bugmine::learn {

struct LabeledInstance {
    std::vector<double> features;
    bool buggy = false;
    std::string fqn;
    std::optional<std::string> parent_fqn;
    std::string commit;
};

struct LabeledSet {
    std::vector<std::string> feature_names;
    std::vector<LabeledInstance> instances;
};

/// bug_count > 0 is buggy. Metric columns missing in any entry are dropped.
LabeledSet label(const std::vector<DatasetEntry>& entries);

/// Majority class reduced at random to the minority size; order otherwise kept.
/// Throws ValidationError when a class is empty.
std::vector<LabeledInstance> undersample(const std::vector<LabeledInstance>& instances, std::uint64_t seed);

class Model {
public:
    virtual ~Model() = default;
    virtual bool predict(std::span<const double> features) const = 0;
};

using Hyperparameters = std::map<std::string, double>;

inline constexpr std::string_view algorithms[] = {"one_r",       "naive_bayes", "logistic",
                                                  "decision_tree", "random_tree", "random_forest"};

bool is_algorithm(std::string_view id);

/// Deterministic under seed. Throws ValidationError for an unknown id. A
/// training set with one class yields a constant model (with a warning).
std::unique_ptr<Model> train(std::string_view algorithm, const std::vector<LabeledInstance>& instances,
                             const Hyperparameters& hyper = {}, std::uint64_t seed = 1);

struct ConfusionMatrix {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
    bool operator==(const ConfusionMatrix&) const = default;
};

void tally(ConfusionMatrix& m, bool predicted, bool actual);

struct PRF {
    double precision = 0, recall = 0, f_measure = 0;
    bool precision_undefined = false;  ///< tp + fp = 0
    bool recall_undefined = false;     ///< tp + fn = 0
};

PRF prf(const ConfusionMatrix& m);

struct Prediction {
    std::size_t index = 0;  ///< into the evaluated instance list
    int repeat = 0;
    int fold = 0;
    bool predicted = false;
};

struct EvalResult {
    std::string algorithm;
    std::string level;
    ConfusionMatrix matrix;             ///< summed over folds and repeats
    std::vector<ConfusionMatrix> folds; ///< repeat-major
    int k = 0;
    int repeats = 0;
    PRF scores;
    std::vector<Prediction> predictions;
};

/// Called per training fold: (training set after under-sampling, seed, fold index).
using LearnerFactory =
    std::function<std::unique_ptr<Model>(const std::vector<LabeledInstance>&, std::uint64_t, int)>;

struct CvOptions {
    int k = 10;
    int repeats = 1;
    std::uint64_t seed = 1;
    bool undersample_training = true;
};

/// Stratified k-fold; k shrinks (with a warning) to the smaller class size.
EvalResult cross_validate(std::string_view algorithm, const std::vector<LabeledInstance>& instances,
                          const CvOptions& options = {}, const Hyperparameters& hyper = {});
EvalResult cross_validate(const LearnerFactory& factory, const std::vector<LabeledInstance>& instances,
                          const CvOptions& options = {});

/// Stratified fold index per instance for one repeat.
std::vector<int> stratified_folds(const std::vector<LabeledInstance>& instances, int k, std::uint64_t seed);

struct MethodPrediction {
    std::string fqn;
    std::string parent_fqn;
    bool predicted = false;
    bool actual = false;
    std::string commit;  ///< classes are distinct per commit
};

/// A class is predicted (actually) buggy iff any member method is.
ConfusionMatrix project_to_class(const std::vector<MethodPrediction>& methods);

/// Projection of a method-level cross-validation: per test fold, then summed.
EvalResult project_result(const EvalResult& method_result, const std::vector<LabeledInstance>& methods);

}  // namespace bugmine::learn
