#include "shbuf/learner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "shbuf/policies.hpp"
#include "shbuf/random.hpp"

namespace shbuf {
namespace {

using Row = std::array<double, kFeatureCount>;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("line " + std::to_string(line_no) + ": bad number '" +
                          std::string(s) + "'");
  }
  return v;
}

// Greedy tree grower over a fixed sample of rows.
class TreeBuilder {
 public:
  TreeBuilder(std::vector<Row> rows, std::vector<PredictionLabel> labels,
              std::uint32_t max_depth)
      : rows_(std::move(rows)), labels_(std::move(labels)), max_depth_(max_depth) {}

  DecisionTree build() {
    std::vector<std::size_t> idx(rows_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    nodes_.clear();
    grow(idx, 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    // Split score (aL^2 + bL^2) * nR + (aR^2 + bR^2) * nL over nL * nR, kept
    // as an exact fraction. Larger means lower weighted Gini impurity.
    __int128 score_num = 0;
    __int128 score_den = 1;
  };

  static bool better(const Candidate& a, const Candidate& b) {
    if (b.feature < 0) return true;
    return a.score_num * b.score_den > b.score_num * a.score_den;
  }

  int grow(const std::vector<std::size_t>& idx, std::uint32_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    std::int64_t pos = 0;
    for (auto i : idx) pos += labels_[i] == PredictionLabel::Positive;
    const std::int64_t neg = static_cast<std::int64_t>(idx.size()) - pos;
    nodes_[id].label = pos > neg ? PredictionLabel::Positive : PredictionLabel::Negative;
    if (pos == 0 || neg == 0 || depth >= max_depth_) return id;

    Candidate best;
    std::vector<std::size_t> order = idx;
    for (int f = 0; f < static_cast<int>(kFeatureCount); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rows_[a][f] < rows_[b][f];
      });
      std::int64_t left_pos = 0;
      std::int64_t left_n = 0;
      const std::int64_t n = static_cast<std::int64_t>(order.size());
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        left_pos += labels_[order[k]] == PredictionLabel::Positive;
        ++left_n;
        const double v = rows_[order[k]][f];
        const double next = rows_[order[k + 1]][f];
        if (!(v < next)) continue;
        const __int128 ln = left_n, lp = left_pos, lq = left_n - left_pos;
        const __int128 rn = n - left_n, rp = pos - left_pos, rq = rn - rp;
        Candidate c;
        c.feature = f;
        c.threshold = v + (next - v) / 2.0;
        c.score_num = (lp * lp + lq * lq) * rn + (rp * rp + rq * rq) * ln;
        c.score_den = ln * rn;
        // Strict improvement only: ties keep the lower feature index, then
        // the lower threshold.
        if (better(c, best)) best = c;
      }
    }
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      (rows_[i][best.feature] <= best.threshold ? left : right).push_back(i);
    }
    nodes_[id].feature = best.feature;
    nodes_[id].label = PredictionLabel::Negative;
    nodes_[id].threshold = best.threshold;
    int l = grow(left, depth + 1);
    int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<Row> rows_;
  std::vector<PredictionLabel> labels_;
  std::uint32_t max_depth_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

std::vector<LabeledExample> collect_trace(const SwitchConfig& config,
                                          const ArrivalSequence& sequence,
                                          std::uint32_t ewma_window) {
  std::vector<LabeledExample> examples;
  examples.reserve(sequence.packet_count());
  SimOptions opts;
  opts.ewma_window = ewma_window;
  opts.on_arrival = [&](const ArrivalContext& ctx, const Decision&) {
    examples.push_back({ctx.features, PredictionLabel::Negative});
  };
  LongestQueueDrop lqd;
  RunResult run = run_simulation(config, sequence, lqd, opts);
  // Push-outs are only known once the run is over.
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (run.outcomes[i].verdict != Verdict::Transmitted) {
      examples[i].label = PredictionLabel::Positive;
    }
  }
  return examples;
}

void write_examples(std::ostream& out, std::span<const LabeledExample> examples) {
  out << "q,q_ewma,Q,Q_ewma,label\n";
  for (const auto& e : examples) {
    out << e.features.queue_len << ',' << format_double(e.features.queue_len_ewma)
        << ',' << e.features.occupancy << ','
        << format_double(e.features.occupancy_ewma) << ','
        << (e.label == PredictionLabel::Positive ? 1 : 0) << '\n';
  }
}

std::vector<LabeledExample> read_examples(std::istream& in) {
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "q,q_ewma,Q,Q_ewma,label") {
        throw ValidationError("expected header 'q,q_ewma,Q,Q_ewma,label'");
      }
      header = true;
      continue;
    }
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      auto c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (f.size() != kFeatureCount + 1) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(kFeatureCount + 1) + " fields, got " +
                            std::to_string(f.size()));
    }
    LabeledExample e;
    double q = parse_double(f[0], line_no);
    double occ = parse_double(f[2], line_no);
    if (q < 0 || occ < 0) throw ValidationError("negative feature value");
    e.features.queue_len = static_cast<std::uint32_t>(q);
    e.features.queue_len_ewma = parse_double(f[1], line_no);
    e.features.occupancy = static_cast<std::uint32_t>(occ);
    e.features.occupancy_ewma = parse_double(f[3], line_no);
    if (f[4] == "1") {
      e.label = PredictionLabel::Positive;
    } else if (f[4] != "0") {
      throw ValidationError("line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    out.push_back(e);
  }
  if (!header) throw ValidationError("training data is missing its header");
  return out;
}

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ValidationError("tree has no nodes");
  for (const auto& n : nodes_) {
    if (n.is_leaf()) continue;
    auto bad = [&](int c) { return c <= 0 || c >= static_cast<int>(nodes_.size()); };
    if (bad(n.left) || bad(n.right)) throw ValidationError("tree child index out of range");
  }
}

PredictionLabel DecisionTree::predict(std::span<const double> x) const {
  const Node* n = &nodes_[0];
  for (std::size_t steps = 0; !n->is_leaf(); ++steps) {
    if (steps > nodes_.size()) throw ValidationError("tree contains a cycle");
    if (static_cast<std::size_t>(n->feature) >= x.size()) {
      throw ValidationError("feature index out of range");
    }
    n = &nodes_[x[n->feature] <= n->threshold ? n->left : n->right];
  }
  return n->label;
}

std::uint32_t DecisionTree::depth() const {
  std::uint32_t best = 0;
  std::vector<std::pair<int, std::uint32_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    if (d > nodes_.size()) throw ValidationError("tree contains a cycle");
    const Node& n = nodes_[id];
    if (n.is_leaf()) {
      best = std::max(best, d);
    } else {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

ForestModel::ForestModel(std::vector<DecisionTree> trees, std::uint32_t max_depth,
                         std::uint32_t feature_count)
    : trees_(std::move(trees)), max_depth_(max_depth), feature_count_(feature_count) {
  if (trees_.empty() || trees_.size() > kMaxTrees) {
    throw ValidationError("forest must have between 1 and 16 trees");
  }
  for (const auto& t : trees_) {
    if (t.depth() > max_depth_) throw ValidationError("tree deeper than max_depth");
    for (const auto& n : t.nodes()) {
      if (!n.is_leaf() && static_cast<std::uint32_t>(n.feature) >= feature_count_) {
        throw ValidationError("tree uses a feature outside the schema");
      }
    }
  }
}

PredictionLabel ForestModel::predict(std::span<const double> x) const {
  if (x.size() != feature_count_) {
    throw ValidationError("expected " + std::to_string(feature_count_) +
                          " features, got " + std::to_string(x.size()));
  }
  std::size_t votes = 0;
  for (const auto& t : trees_) votes += t.predict(x) == PredictionLabel::Positive;
  return 2 * votes > trees_.size() ? PredictionLabel::Positive : PredictionLabel::Negative;
}

std::string ForestModel::to_json() const {
  using nlohmann::json;
  json j;
  j["format_version"] = kFormatVersion;
  j["feature_count"] = feature_count_;
  j["features"] = {"q", "q_ewma", "Q", "Q_ewma"};
  j["max_depth"] = max_depth_;
  json trees = json::array();
  for (const auto& t : trees_) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
      if (n.is_leaf()) {
        nodes.push_back({{"label", n.label == PredictionLabel::Positive ? 1 : 0}});
      } else {
        nodes.push_back({{"feature_index", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right}});
      }
    }
    trees.push_back({{"nodes", nodes}});
  }
  j["trees"] = trees;
  return j.dump(1) + "\n";
}

ForestModel ForestModel::from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw ValidationError("unsupported model format_version");
    }
    std::vector<DecisionTree> trees;
    for (const auto& t : j.at("trees")) {
      std::vector<DecisionTree::Node> nodes;
      for (const auto& n : t.at("nodes")) {
        DecisionTree::Node node;
        if (n.contains("label")) {
          int label = n.at("label").get<int>();
          if (label != 0 && label != 1) throw ValidationError("leaf label must be 0 or 1");
          node.label = label ? PredictionLabel::Positive : PredictionLabel::Negative;
        } else {
          node.feature = n.at("feature_index").get<int>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<int>();
          node.right = n.at("right").get<int>();
          if (node.feature < 0) throw ValidationError("negative feature index");
        }
        nodes.push_back(node);
      }
      trees.emplace_back(std::move(nodes));
    }
    return ForestModel(std::move(trees), j.at("max_depth").get<std::uint32_t>(),
                       j.at("feature_count").get<std::uint32_t>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

DecisionTree train_tree(std::span<const LabeledExample> examples,
                        std::uint32_t max_depth) {
  std::vector<Row> rows;
  std::vector<PredictionLabel> labels;
  rows.reserve(examples.size());
  for (const auto& e : examples) {
    rows.push_back(e.features.as_array());
    labels.push_back(e.label);
  }
  return TreeBuilder(std::move(rows), std::move(labels), max_depth).build();
}

ForestModel train_forest(std::span<const LabeledExample> examples,
                         const TrainParams& params) {
  if (examples.empty()) throw ValidationError("no training examples");
  if (params.trees < 1 || params.trees > ForestModel::kMaxTrees) {
    throw ValidationError("trees must be in [1, 16]");
  }
  if (params.max_depth < 1) throw ValidationError("max_depth must be >= 1");

  auto grow_one = [&](std::uint32_t k) {
    std::mt19937_64 rng(derive_seed(params.seed, k));
    std::vector<Row> rows;
    std::vector<PredictionLabel> labels;
    rows.reserve(examples.size());
    labels.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const auto& e = examples[rng() % examples.size()];
      rows.push_back(e.features.as_array());
      labels.push_back(e.label);
    }
    return TreeBuilder(std::move(rows), std::move(labels), params.max_depth).build();
  };

  std::vector<std::future<DecisionTree>> jobs;
  for (std::uint32_t k = 0; k < params.trees; ++k) {
    jobs.push_back(std::async(std::launch::async, grow_one, k));
  }
  std::vector<DecisionTree> trees;
  for (auto& j : jobs) trees.push_back(j.get());
  return ForestModel(std::move(trees), params.max_depth);
}

ForestOracle::ForestOracle(ForestModel model) : model_(std::move(model)) {
  if (model_.feature_count() != kFeatureCount) {
    throw ValidationError("model feature schema does not match the simulator");
  }
}

void ConfusionCounts::add(PredictionLabel predicted, PredictionLabel actual) {
  const bool p = predicted == PredictionLabel::Positive;
  const bool a = actual == PredictionLabel::Positive;
  if (p && a) ++tp;
  else if (p) ++fp;
  else if (a) ++fn;
  else ++tn;
}

ConfusionCounts confusion(const LabelTrace& predicted, const LabelTrace& truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("prediction and truth traces differ in length");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) c.add(predicted.at_flat(i), truth.at_flat(i));
  return c;
}

Metrics metrics_from(const ConfusionCounts& c) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(c.tp + c.tn, c.total()), ratio(c.tp, c.tp + c.fp),
          ratio(c.tp, c.tp + c.fn), ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)};
}

Split split_examples(std::span<const LabeledExample> examples, double split,
                     std::uint64_t seed) {
  if (!(split > 0.0 && split < 1.0)) throw ValidationError("split must be in (0, 1)");
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng() % i]);
  }
  const auto n_train = static_cast<std::size_t>(std::llround(split * examples.size()));
  Split s;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? s.train : s.test).push_back(examples[order[k]]);
  }
  return s;
}

EvaluationReport evaluate_on(const ForestModel& model,
                             std::span<const LabeledExample> examples) {
  if (examples.empty()) throw ValidationError("empty evaluation set");
  EvaluationReport r;
  for (const auto& e : examples) r.confusion.add(model.predict(e.features), e.label);
  r.metrics = metrics_from(r.confusion);
  return r;
}

EvaluationReport evaluate(const ForestModel& model,
                          std::span<const LabeledExample> examples, double split,
                          std::uint64_t seed) {
  Split s = split_examples(examples, split, seed);
  if (s.test.empty()) throw ValidationError("test split is empty");
  return evaluate_on(model, s.test);
}

}  // namespace shbuf
