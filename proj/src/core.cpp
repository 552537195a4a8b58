#include "shbuf/core.hpp"

#include <algorithm>
#include <numeric>

namespace shbuf {

FeatureTracker::FeatureTracker(std::uint32_t num_ports, std::uint32_t window)
    : weight_(2.0 / (static_cast<double>(window) + 1.0)),
      queue_ewma_(num_ports, 0.0) {
  if (window == 0) throw ValidationError("ewma window must be >= 1");
}

FeatureVector FeatureTracker::observe(std::uint32_t port,
                                      std::uint32_t queue_len,
                                      std::uint32_t occupancy) {
  double& q = queue_ewma_.at(port);
  q = (1.0 - weight_) * q + weight_ * queue_len;
  occupancy_ewma_ = (1.0 - weight_) * occupancy_ewma_ + weight_ * occupancy;
  return {queue_len, q, occupancy, occupancy_ewma_};
}

void SwitchConfig::validate() const {
  if (num_ports < 1) throw ValidationError("num_ports must be >= 1");
  if (buffer_size < 1) throw ValidationError("buffer_size must be >= 1");
}

std::size_t ArrivalSequence::packet_count() const {
  std::size_t n = 0;
  for (const auto& slot : slots) n += slot.size();
  return n;
}

void ArrivalSequence::validate(const SwitchConfig& config) const {
  config.validate();
  for (std::size_t t = 0; t < slots.size(); ++t) {
    if (slots[t].size() > config.num_ports) {
      throw ValidationError("slot " + std::to_string(t) + " has " +
                            std::to_string(slots[t].size()) +
                            " arrivals, more than N=" +
                            std::to_string(config.num_ports));
    }
    for (PortId p : slots[t]) {
      if (p >= config.num_ports) {
        throw ValidationError("slot " + std::to_string(t) + ": port " +
                              std::to_string(p) + " out of range");
      }
    }
  }
}

PacketIndex::PacketIndex(const ArrivalSequence& sequence) {
  offsets_.reserve(sequence.slots.size());
  sizes_.reserve(sequence.slots.size());
  for (const auto& slot : sequence.slots) {
    offsets_.push_back(total_);
    sizes_.push_back(static_cast<std::uint32_t>(slot.size()));
    total_ += slot.size();
  }
}

bool PacketIndex::contains(PacketId id) const {
  return id.slot < sizes_.size() && id.pos < sizes_[id.slot];
}

std::size_t PacketIndex::flat(PacketId id) const {
  if (!contains(id)) {
    throw std::out_of_range("packet (" + std::to_string(id.slot) + "," +
                            std::to_string(id.pos) +
                            ") is not part of the sequence");
  }
  return offsets_[id.slot] + id.pos;
}

PacketId PacketIndex::id_at(std::size_t flat) const {
  if (flat >= total_) throw std::out_of_range("packet index out of range");
  // Last slot starting at or before flat. An empty slot shares its offset
  // with the following slot, so it is never the last such slot here.
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
  auto slot = static_cast<std::uint32_t>(std::distance(offsets_.begin(), it) - 1);
  return {slot, static_cast<std::uint32_t>(flat - offsets_[slot])};
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Transmitted: return "transmitted";
    case Verdict::DroppedOnArrival: return "dropped";
    case Verdict::PushedOut: return "pushed_out";
  }
  return "?";
}

SwitchState::SwitchState(const SwitchConfig& config)
    : buffer_size(config.buffer_size),
      queue_len(config.num_ports, 0),
      fifo(config.num_ports) {}

PortId SwitchState::longest_queue() const {
  auto it = std::max_element(queue_len.begin(), queue_len.end());
  return static_cast<PortId>(std::distance(queue_len.begin(), it));
}

std::vector<std::size_t> drain_one_round(SwitchState& state) {
  std::vector<std::size_t> sent;
  for (PortId p = 0; p < state.num_ports(); ++p) {
    if (state.queue_len[p] == 0) continue;
    sent.push_back(state.fifo[p].front());
    state.fifo[p].pop_front();
    --state.queue_len[p];
    --state.occupancy;
  }
  return sent;
}

Simulator::Simulator(const SwitchConfig& config, Policy& policy,
                     SimOptions options)
    : config_(config),
      policy_(policy),
      options_(std::move(options)),
      state_(config),
      features_(config.num_ports, options_.ewma_window) {
  config_.validate();
  policy_.reset(config_);
}

void Simulator::begin_slot() {
  if (arrivals_open_) {
    throw std::logic_error("begin_slot() called twice without depart()");
  }
  if (started_) ++slot_;
  started_ = true;
  arrivals_open_ = true;
  pos_ = 0;
}

Decision Simulator::arrive(PortId port) {
  if (!arrivals_open_) throw std::logic_error("arrive() outside arrival phase");
  if (port >= config_.num_ports) throw ValidationError("port out of range");
  if (pos_ >= config_.num_ports) {
    throw ValidationError("more than N arrivals in one slot");
  }

  ArrivalContext ctx;
  ctx.packet = {slot_, pos_++};
  ctx.flat_index = ids_.size();
  ctx.port = port;
  ctx.features = features_.observe(port, state_.queue_len[port], state_.occupancy);

  ids_.push_back(ctx.packet);
  ports_.push_back(port);
  verdicts_.push_back(Verdict::DroppedOnArrival);

  Decision d = policy_.on_arrival(ctx, state_);
  if (options_.on_arrival) options_.on_arrival(ctx, d);

  switch (d.kind) {
    case Decision::Kind::Drop:
      break;
    case Decision::Kind::Accept:
      if (state_.occupancy >= config_.buffer_size) {
        throw std::logic_error(std::string(policy_.name()) +
                               " accepted into a full buffer");
      }
      break;
    case Decision::Kind::AcceptWithPushout: {
      if (!policy_.preemptive()) {
        throw std::logic_error(std::string(policy_.name()) +
                               " is drop-tail but returned a push-out");
      }
      if (state_.occupancy != config_.buffer_size || d.victim >= config_.num_ports ||
          state_.queue_len[d.victim] == 0) {
        throw std::logic_error("invalid push-out decision");
      }
      auto& victim_q = state_.fifo[d.victim];
      verdicts_[victim_q.back()] = Verdict::PushedOut;
      victim_q.pop_back();
      --state_.queue_len[d.victim];
      --state_.occupancy;
      break;
    }
  }
  if (d.kind != Decision::Kind::Drop) {
    state_.fifo[port].push_back(ctx.flat_index);
    ++state_.queue_len[port];
    ++state_.occupancy;
    verdicts_[ctx.flat_index] = Verdict::Transmitted;
  }
  check_invariants();
  return d;
}

std::vector<PacketId> Simulator::depart() {
  if (!arrivals_open_) throw std::logic_error("depart() without begin_slot()");
  arrivals_open_ = false;
  occupancy_series_.push_back(state_.occupancy);

  std::vector<PacketId> sent;
  for (std::size_t flat : drain_one_round(state_)) sent.push_back(ids_[flat]);
  transmitted_ += sent.size();
  for (PortId p = 0; p < config_.num_ports; ++p) policy_.on_departure(p, state_);
  check_invariants();
  return sent;
}

void Simulator::check_invariants() const {
  if (state_.occupancy > config_.buffer_size) {
    throw std::logic_error("occupancy exceeds buffer size");
  }
  std::uint64_t sum = std::accumulate(state_.queue_len.begin(),
                                      state_.queue_len.end(), std::uint64_t{0});
  if (sum != state_.occupancy) {
    throw std::logic_error("occupancy does not match queue lengths");
  }
}

RunResult Simulator::finish() {
  if (arrivals_open_) depart();
  while (!buffer_empty()) {
    begin_slot();
    depart();
  }

  RunResult r;
  r.transmitted = transmitted_;
  r.outcomes.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    r.outcomes.push_back({ids_[i], ports_[i], verdicts_[i]});
    if (verdicts_[i] != Verdict::Transmitted) ++r.dropped;
  }
  r.occupancy_series = occupancy_series_;
  if (!r.occupancy_series.empty()) {
    r.peak_occupancy =
        *std::max_element(r.occupancy_series.begin(), r.occupancy_series.end());
  }
  if (r.transmitted + r.dropped != ids_.size()) {
    throw std::logic_error("packet conservation violated");
  }
  return r;
}

RunResult run_simulation(const SwitchConfig& config,
                         const ArrivalSequence& sequence, Policy& policy,
                         const SimOptions& options) {
  sequence.validate(config);
  Simulator sim(config, policy, options);
  for (const auto& slot : sequence.slots) {
    sim.begin_slot();
    for (PortId p : slot) sim.arrive(p);
    sim.depart();
  }
  return sim.finish();
}

}  // namespace shbuf
