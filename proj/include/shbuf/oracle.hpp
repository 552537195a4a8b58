#pragma once

// Drop-prediction oracles. A prediction is Positive when the oracle expects
// push-out LQD, serving the same arrival sequence, to eventually drop the
// packet (on arrival or by push-out), and Negative when it expects LQD to
// transmit it.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "shbuf/core.hpp"

namespace shbuf {

enum class PredictionLabel : std::uint8_t { Negative = 0, Positive = 1 };

inline PredictionLabel invert(PredictionLabel l) {
  return l == PredictionLabel::Positive ? PredictionLabel::Negative
                                        : PredictionLabel::Positive;
}

// Thrown by an oracle that cannot answer right now. Credence maps it to its
// configured fallback decision; every other exception propagates.
class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  // Must not depend on anything but ctx and the oracle's own immutable data.
  virtual PredictionLabel predict(const ArrivalContext& ctx) const = 0;
  virtual std::string_view name() const = 0;
};

// Per-packet labels over one arrival sequence, indexed in arrival order.
// Used both for LQD ground truth (Positive = dropped or pushed out by LQD)
// and for recorded oracle predictions.
class LabelTrace {
 public:
  LabelTrace() = default;
  LabelTrace(const ArrivalSequence& sequence, std::vector<PredictionLabel> labels);

  std::size_t size() const { return labels_.size(); }
  PredictionLabel at(PacketId id) const { return labels_[index_.flat(id)]; }
  PredictionLabel at_flat(std::size_t flat) const { return labels_.at(flat); }
  const std::vector<PredictionLabel>& labels() const { return labels_; }
  const PacketIndex& index() const { return index_; }
  std::size_t positives() const;

 private:
  PacketIndex index_;
  std::vector<PredictionLabel> labels_;
};

using GroundTruthTrace = LabelTrace;
using PredictionTrace = LabelTrace;

GroundTruthTrace ground_truth_from_run(const ArrivalSequence& sequence,
                                       const RunResult& lqd_run);
// Runs push-out LQD over the sequence and labels every packet.
GroundTruthTrace lqd_ground_truth(const SwitchConfig& config,
                                  const ArrivalSequence& sequence);

// Queries the oracle once per packet against the feature stream of an LQD run
// over the sequence, so the recorded predictions do not depend on whichever
// algorithm later consumes them.
PredictionTrace record_predictions(const Oracle& oracle, const SwitchConfig& config,
                                   const ArrivalSequence& sequence,
                                   std::uint32_t ewma_window = 16);

class PerfectOracle final : public Oracle {
 public:
  explicit PerfectOracle(GroundTruthTrace truth) : truth_(std::move(truth)) {}
  // Throws std::out_of_range when the packet is not covered by the trace.
  PredictionLabel predict(const ArrivalContext& ctx) const override {
    return truth_.at(ctx.packet);
  }
  std::string_view name() const override { return "perfect"; }

 private:
  GroundTruthTrace truth_;
};

class ConstantOracle final : public Oracle {
 public:
  explicit ConstantOracle(PredictionLabel label) : label_(label) {}
  PredictionLabel predict(const ArrivalContext&) const override { return label_; }
  std::string_view name() const override {
    return label_ == PredictionLabel::Positive ? "constant_drop" : "constant_accept";
  }

 private:
  PredictionLabel label_;
};

// Inverts the base prediction with probability p. The coin for each packet is
// a pure function of (seed, PacketId); for a fixed seed, the set of flipped
// packets at p is a subset of the set flipped at any larger p.
class FlipOracle final : public Oracle {
 public:
  FlipOracle(std::shared_ptr<const Oracle> base, double p, std::uint64_t seed);
  PredictionLabel predict(const ArrivalContext& ctx) const override;
  bool flips(PacketId id) const;
  std::string_view name() const override { return "flip"; }

 private:
  std::shared_ptr<const Oracle> base_;
  double p_;
  std::uint64_t seed_;
};

// Uniform double in [0, 1) derived from (seed, packet) by a SplitMix64 hash.
double packet_uniform(std::uint64_t seed, PacketId id);

}  // namespace shbuf
