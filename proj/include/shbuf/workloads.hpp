#pragma once

// Seeded arrival-sequence generators. Every generator respects the model's
// cap of N arrivals per slot; bursts larger than that are serialized over
// consecutive slots.

#include <cstdint>
#include <string>

#include "shbuf/core.hpp"

namespace shbuf {

enum class WorkloadKind {
  SingleBurst,
  MultiBurstThenShorts,
  FollowLqdAdversary,
  PoissonBursts,
  UniformRandom,
};

std::string_view to_string(WorkloadKind kind);
WorkloadKind parse_workload_kind(std::string_view text);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::UniformRandom;
  std::uint32_t burst_size = 0;  // single_burst; 0 means B
  std::uint32_t short_burst = 0; // multi_burst_then_shorts; 0 means max(1, B/8)
  std::uint32_t cycles = 1;      // followlqd_adversary
  double rate = 0.01;            // poisson_bursts: burst starts per slot
  double load = 0.5;             // uniform_random: per-opportunity probability
  std::uint32_t horizon = 1000;  // slots (poisson_bursts, uniform_random)
  std::uint64_t seed = 1;

  bool operator==(const WorkloadSpec&) const = default;

  // Stable key=value rendering of the parameters the kind actually uses.
  std::string canonical() const;
};

ArrivalSequence generate(const SwitchConfig& config, const WorkloadSpec& spec);

ArrivalSequence gen_single_burst(const SwitchConfig& config, std::uint32_t burst_size);

// Four simultaneous bursts of B packets to ports 0..3, followed by short
// bursts to every remaining port once the large bursts have arrived.
ArrivalSequence gen_multi_burst_then_shorts(const SwitchConfig& config,
                                            std::uint32_t short_burst = 0);

struct AdversaryLayout {
  std::uint32_t fill_slots = 0;
  std::uint32_t fill_packets = 0;
};

// Fills queue 0 up to B at N packets per slot, then repeats `cycles` times:
// one slot with a packet to every port, one slot with N packets to queue 0.
ArrivalSequence gen_followlqd_adversary(const SwitchConfig& config,
                                        std::uint32_t cycles,
                                        AdversaryLayout* layout = nullptr);

ArrivalSequence gen_poisson_bursts(const SwitchConfig& config, double rate,
                                   std::uint32_t horizon, std::uint64_t seed);

// Each slot offers N arrival opportunities; each is taken with probability
// `load` and sent to a uniformly chosen port.
ArrivalSequence gen_uniform_random(const SwitchConfig& config, double load,
                                   std::uint32_t horizon, std::uint64_t seed);

}  // namespace shbuf
