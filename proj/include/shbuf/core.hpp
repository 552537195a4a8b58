#pragma once

// Discrete-time shared-buffer switch model.
//
// Each timeslot has an arrival phase followed by a departure phase. During
// the arrival phase at most N unit-size packets arrive (in aggregate); during
// the departure phase every non-empty queue transmits its head packet.

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shbuf/features.hpp"

namespace shbuf {

using PortId = std::uint32_t;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SwitchConfig {
  std::uint32_t num_ports = 1;
  std::uint32_t buffer_size = 1;

  void validate() const;
  bool operator==(const SwitchConfig&) const = default;
};

// (slot, position within slot). Lexicographic order is arrival order.
struct PacketId {
  std::uint32_t slot = 0;
  std::uint32_t pos = 0;

  auto operator<=>(const PacketId&) const = default;
};

struct ArrivalSequence {
  // slots[t] lists destination ports in processing order.
  std::vector<std::vector<PortId>> slots;

  std::size_t packet_count() const;
  void validate(const SwitchConfig& config) const;
  bool operator==(const ArrivalSequence&) const = default;
};

// Maps PacketId to a dense index in arrival order.
class PacketIndex {
 public:
  PacketIndex() = default;
  explicit PacketIndex(const ArrivalSequence& sequence);

  std::size_t size() const { return total_; }
  bool contains(PacketId id) const;
  // Throws std::out_of_range for packets outside the sequence.
  std::size_t flat(PacketId id) const;
  PacketId id_at(std::size_t flat) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> sizes_;
  std::size_t total_ = 0;
};

enum class Verdict { Transmitted, DroppedOnArrival, PushedOut };

std::string_view to_string(Verdict verdict);

struct PacketOutcome {
  PacketId packet;
  PortId port = 0;
  Verdict verdict = Verdict::Transmitted;

  bool operator==(const PacketOutcome&) const = default;
};

struct RunResult {
  std::uint64_t transmitted = 0;
  std::uint64_t dropped = 0;
  // One entry per packet, in arrival order.
  std::vector<PacketOutcome> outcomes;
  // Occupancy after the arrival phase of every simulated slot, including the
  // departure-only slots appended to empty the buffer.
  std::vector<std::uint32_t> occupancy_series;
  std::uint32_t peak_occupancy = 0;

  bool operator==(const RunResult&) const = default;
};

struct SwitchState {
  std::uint32_t buffer_size = 0;
  std::vector<std::uint32_t> queue_len;
  std::uint32_t occupancy = 0;
  // Per-port FIFO of dense packet indices (see PacketIndex).
  std::vector<std::deque<std::size_t>> fifo;

  explicit SwitchState(const SwitchConfig& config);

  std::uint32_t num_ports() const {
    return static_cast<std::uint32_t>(queue_len.size());
  }
  // Longest queue; ties resolve to the lowest port index.
  PortId longest_queue() const;
};

struct Decision {
  enum class Kind { Accept, Drop, AcceptWithPushout };

  Kind kind = Kind::Accept;
  PortId victim = 0;

  static Decision accept() { return {Kind::Accept, 0}; }
  static Decision drop() { return {Kind::Drop, 0}; }
  static Decision push_out(PortId victim) {
    return {Kind::AcceptWithPushout, victim};
  }
  bool operator==(const Decision&) const = default;
};

struct ArrivalContext {
  PacketId packet;
  std::size_t flat_index = 0;
  PortId port = 0;
  FeatureVector features;
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual void reset(const SwitchConfig& config) = 0;
  // State is the pre-arrival state; the simulator applies the decision.
  virtual Decision on_arrival(const ArrivalContext& ctx,
                              const SwitchState& state) = 0;
  // Fires for every port in every departure phase, after the drain.
  virtual void on_departure(PortId /*port*/, const SwitchState& /*state*/) {}
  virtual bool preemptive() const { return false; }
  virtual std::string_view name() const = 0;
};

struct SimOptions {
  std::uint32_t ewma_window = 16;
  // Called once per arrival with the decision the policy returned.
  std::function<void(const ArrivalContext&, const Decision&)> on_arrival;
};

// Step-wise driver. run_simulation() is the usual entry point; the step API
// exists so that several switches can be advanced in lockstep.
class Simulator {
 public:
  Simulator(const SwitchConfig& config, Policy& policy, SimOptions options = {});

  void begin_slot();
  Decision arrive(PortId port);
  // Departure phase: drains one packet per non-empty queue in ascending port
  // order and returns the transmitted packets.
  std::vector<PacketId> depart();

  const SwitchState& state() const { return state_; }
  bool buffer_empty() const { return state_.occupancy == 0; }
  std::uint32_t current_slot() const { return slot_; }

  // Drains the buffer with departure-only slots, then returns the result.
  RunResult finish();

 private:
  void check_invariants() const;

  SwitchConfig config_;
  Policy& policy_;
  SimOptions options_;
  SwitchState state_;
  FeatureTracker features_;
  std::vector<PacketId> ids_;
  std::vector<PortId> ports_;
  std::vector<Verdict> verdicts_;
  std::vector<std::uint32_t> occupancy_series_;
  std::uint32_t slot_ = 0;
  std::uint32_t pos_ = 0;
  bool started_ = false;
  bool arrivals_open_ = false;
  std::uint64_t transmitted_ = 0;
};

RunResult run_simulation(const SwitchConfig& config,
                         const ArrivalSequence& sequence, Policy& policy,
                         const SimOptions& options = {});

// Removes one head packet from every non-empty queue, ascending port order.
// Returns the dense indices of the removed packets.
std::vector<std::size_t> drain_one_round(SwitchState& state);

}  // namespace shbuf
