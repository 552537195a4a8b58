#include "shbuf/oracle.hpp"

#include <algorithm>

#include "shbuf/policies.hpp"
#include "shbuf/random.hpp"

namespace shbuf {

LabelTrace::LabelTrace(const ArrivalSequence& sequence,
                       std::vector<PredictionLabel> labels)
    : index_(sequence), labels_(std::move(labels)) {
  if (labels_.size() != index_.size()) {
    throw std::invalid_argument("label count does not match the sequence");
  }
}

std::size_t LabelTrace::positives() const {
  return static_cast<std::size_t>(
      std::count(labels_.begin(), labels_.end(), PredictionLabel::Positive));
}

GroundTruthTrace ground_truth_from_run(const ArrivalSequence& sequence,
                                       const RunResult& lqd_run) {
  std::vector<PredictionLabel> labels;
  labels.reserve(lqd_run.outcomes.size());
  for (const auto& o : lqd_run.outcomes) {
    labels.push_back(o.verdict == Verdict::Transmitted ? PredictionLabel::Negative
                                                       : PredictionLabel::Positive);
  }
  return GroundTruthTrace(sequence, std::move(labels));
}

GroundTruthTrace lqd_ground_truth(const SwitchConfig& config,
                                  const ArrivalSequence& sequence) {
  LongestQueueDrop lqd;
  return ground_truth_from_run(sequence, run_simulation(config, sequence, lqd));
}

PredictionTrace record_predictions(const Oracle& oracle, const SwitchConfig& config,
                                   const ArrivalSequence& sequence,
                                   std::uint32_t ewma_window) {
  std::vector<PredictionLabel> labels;
  labels.reserve(sequence.packet_count());
  SimOptions opts;
  opts.ewma_window = ewma_window;
  opts.on_arrival = [&](const ArrivalContext& ctx, const Decision&) {
    labels.push_back(oracle.predict(ctx));
  };
  LongestQueueDrop lqd;
  run_simulation(config, sequence, lqd, opts);
  return PredictionTrace(sequence, std::move(labels));
}

double packet_uniform(std::uint64_t seed, PacketId id) {
  std::uint64_t key = (static_cast<std::uint64_t>(id.slot) << 32) | id.pos;
  std::uint64_t h = splitmix64(splitmix64(seed) ^ key);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

FlipOracle::FlipOracle(std::shared_ptr<const Oracle> base, double p,
                       std::uint64_t seed)
    : base_(std::move(base)), p_(p), seed_(seed) {
  if (!base_) throw std::invalid_argument("flip oracle needs a base oracle");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("flip probability must be in [0, 1]");
  }
}

bool FlipOracle::flips(PacketId id) const {
  return packet_uniform(seed_, id) < p_;
}

PredictionLabel FlipOracle::predict(const ArrivalContext& ctx) const {
  auto label = base_->predict(ctx);
  return flips(ctx.packet) ? invert(label) : label;
}

}  // namespace shbuf
