#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shbuf/core.hpp"
#include "shbuf/oracle.hpp"

namespace shbuf {

struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 2;

  // Accepts "p/q" or a plain integer.
  static Rational parse(const std::string& text);
  std::string str() const;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

// Accept whenever the buffer has room.
class CompleteSharing final : public Policy {
 public:
  void reset(const SwitchConfig&) override {}
  Decision on_arrival(const ArrivalContext& ctx, const SwitchState& state) override;
  std::string_view name() const override { return "complete_sharing"; }
};

// Choudhury-Hahne dynamic thresholds: accept iff q < alpha * (B - Q) and the
// buffer has room, compared exactly by cross-multiplication.
class DynamicThresholds final : public Policy {
 public:
  explicit DynamicThresholds(Rational alpha = {1, 2});
  void reset(const SwitchConfig&) override {}
  Decision on_arrival(const ArrivalContext& ctx, const SwitchState& state) override;
  std::string_view name() const override { return "dynamic_thresholds"; }

 private:
  Rational alpha_;
};

// Push-out Longest Queue Drop. On a full buffer the tail packet of the longest
// queue (lowest index on ties) makes room; when that queue is the arriving
// packet's own queue, the arrival is dropped instead.
class LongestQueueDrop final : public Policy {
 public:
  void reset(const SwitchConfig&) override {}
  Decision on_arrival(const ArrivalContext& ctx, const SwitchState& state) override;
  bool preemptive() const override { return true; }
  std::string_view name() const override { return "lqd"; }
};

// Per-port thresholds that replay the queue lengths of a push-out LQD switch
// fed the same events, using only arithmetic on the thresholds themselves.
class ThresholdState {
 public:
  ThresholdState() = default;
  explicit ThresholdState(const SwitchConfig& config);

  void on_arrival(PortId port);
  void on_departure(PortId port);

  const std::vector<std::uint32_t>& thresholds() const { return thresholds_; }
  std::uint32_t at(PortId port) const { return thresholds_.at(port); }
  std::uint32_t sum() const { return sum_; }
  // Largest threshold; ties resolve to the lowest port index.
  PortId largest() const;

 private:
  std::uint32_t buffer_size_ = 0;
  std::vector<std::uint32_t> thresholds_;
  std::uint32_t sum_ = 0;
};

// Drop-tail policy that accepts iff q_port < T_port and the buffer has room.
class FollowLqd final : public Policy {
 public:
  void reset(const SwitchConfig& config) override;
  Decision on_arrival(const ArrivalContext& ctx, const SwitchState& state) override;
  void on_departure(PortId port, const SwitchState& state) override;
  std::string_view name() const override { return "follow_lqd"; }

  const ThresholdState& thresholds() const { return thresholds_; }

 private:
  ThresholdState thresholds_;
};

// FollowLQD augmented with a drop-prediction oracle and a safeguard that
// accepts unconditionally while every queue is shorter than B/N.
class Credence final : public Policy {
 public:
  struct Stats {
    std::uint64_t safeguard_accepts = 0;
    std::uint64_t oracle_queries = 0;
    std::uint64_t oracle_failures = 0;
    std::uint64_t predicted_drops = 0;
    std::uint64_t threshold_drops = 0;
  };

  explicit Credence(std::shared_ptr<const Oracle> oracle,
                    Decision fallback = Decision::accept());

  void reset(const SwitchConfig& config) override;
  Decision on_arrival(const ArrivalContext& ctx, const SwitchState& state) override;
  void on_departure(PortId port, const SwitchState& state) override;
  std::string_view name() const override { return "credence"; }

  const ThresholdState& thresholds() const { return thresholds_; }
  const Stats& stats() const { return stats_; }

 private:
  std::shared_ptr<const Oracle> oracle_;
  Decision fallback_;
  ThresholdState thresholds_;
  Stats stats_;
};

}  // namespace shbuf
