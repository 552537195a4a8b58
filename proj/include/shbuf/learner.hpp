#pragma once

// Drop predictors: labeled traces from LQD runs, a small bagged forest of
// depth-limited Gini trees, and confusion-matrix metrics.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shbuf/core.hpp"
#include "shbuf/oracle.hpp"

namespace shbuf {

struct LabeledExample {
  FeatureVector features;
  PredictionLabel label = PredictionLabel::Negative;

  bool operator==(const LabeledExample&) const = default;
};

// Runs LQD over the sequence and returns one example per packet, in arrival
// order: the features seen at arrival and whether LQD eventually dropped it.
std::vector<LabeledExample> collect_trace(const SwitchConfig& config,
                                          const ArrivalSequence& sequence,
                                          std::uint32_t ewma_window = 16);

// CSV columns q,q_ewma,Q,Q_ewma,label (label 1 = drop).
void write_examples(std::ostream& out, std::span<const LabeledExample> examples);
std::vector<LabeledExample> read_examples(std::istream& in);

class DecisionTree {
 public:
  struct Node {
    // -1 marks a leaf.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;   // taken when x[feature] <= threshold
    int right = -1;
    PredictionLabel label = PredictionLabel::Negative;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  DecisionTree() : nodes_{Node{}} {}
  explicit DecisionTree(std::vector<Node> nodes);

  PredictionLabel predict(std::span<const double> x) const;
  // Number of edges on the longest root-to-leaf path.
  std::uint32_t depth() const;
  const std::vector<Node>& nodes() const { return nodes_; }
  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<Node> nodes_;
};

class ForestModel {
 public:
  static constexpr std::uint32_t kMaxTrees = 16;
  static constexpr int kFormatVersion = 1;

  ForestModel() = default;
  ForestModel(std::vector<DecisionTree> trees, std::uint32_t max_depth,
              std::uint32_t feature_count = kFeatureCount);

  // Majority vote; an even split goes to Negative.
  PredictionLabel predict(std::span<const double> x) const;
  PredictionLabel predict(const FeatureVector& f) const {
    auto a = f.as_array();
    return predict(std::span<const double>(a));
  }

  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::uint32_t max_depth() const { return max_depth_; }
  std::uint32_t feature_count() const { return feature_count_; }

  std::string to_json() const;
  static ForestModel from_json(const std::string& text);

  bool operator==(const ForestModel&) const = default;

 private:
  std::vector<DecisionTree> trees_;
  std::uint32_t max_depth_ = 0;
  std::uint32_t feature_count_ = kFeatureCount;
};

struct TrainParams {
  std::uint32_t trees = 4;
  std::uint32_t max_depth = 4;
  std::uint64_t seed = 1;
};

// Bagged Gini trees. Trees are grown in parallel; tree k always uses the
// bootstrap stream derived from (seed, k).
ForestModel train_forest(std::span<const LabeledExample> examples,
                         const TrainParams& params);

// Single tree on exactly the given examples (no bootstrap).
DecisionTree train_tree(std::span<const LabeledExample> examples,
                        std::uint32_t max_depth);

class ForestOracle final : public Oracle {
 public:
  explicit ForestOracle(ForestModel model);
  PredictionLabel predict(const ArrivalContext& ctx) const override {
    return model_.predict(ctx.features);
  }
  std::string_view name() const override { return "forest"; }
  const ForestModel& model() const { return model_; }

 private:
  ForestModel model_;
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  void add(PredictionLabel predicted, PredictionLabel actual);
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(const LabelTrace& predicted, const LabelTrace& truth);

// Ratios with a zero denominator are nullopt.
struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

Metrics metrics_from(const ConfusionCounts& c);

struct Split {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
};

// Seeded shuffle, then the first round(split * n) examples train.
Split split_examples(std::span<const LabeledExample> examples, double split,
                     std::uint64_t seed);

struct EvaluationReport {
  ConfusionCounts confusion;
  Metrics metrics;
};

EvaluationReport evaluate_on(const ForestModel& model,
                             std::span<const LabeledExample> examples);
// Scores the held-out part of split_examples(examples, split, seed).
EvaluationReport evaluate(const ForestModel& model,
                          std::span<const LabeledExample> examples, double split,
                          std::uint64_t seed);

}  // namespace shbuf
