#pragma once

// Reference models for tests. Deliberately naive: plain counters, no shared
// code with the library's simulator.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "shbuf/core.hpp"

namespace shbuf::testing {

inline ArrivalSequence random_sequence(std::mt19937_64& rng, std::uint32_t n,
                                       std::uint32_t max_packets) {
  ArrivalSequence s;
  std::uint32_t left = static_cast<std::uint32_t>(rng() % (max_packets + 1));
  while (left > 0) {
    std::uint32_t k = std::min<std::uint32_t>(left, static_cast<std::uint32_t>(rng() % (n + 1)));
    std::vector<PortId> slot;
    for (std::uint32_t i = 0; i < k; ++i) slot.push_back(static_cast<PortId>(rng() % n));
    s.slots.push_back(slot);
    left -= k;
  }
  return s;
}

// Queue lengths only; every slot drains one packet per non-empty queue.
inline void drain(std::vector<std::uint32_t>& q, std::uint32_t& total) {
  for (auto& x : q) {
    if (x > 0) {
      --x;
      --total;
    }
  }
}

// Throughput of an accept mask, or -1 when the mask accepts into a full buffer.
inline std::int64_t replay_mask(const SwitchConfig& cfg, const ArrivalSequence& seq,
                                std::uint64_t mask) {
  std::vector<std::uint32_t> q(cfg.num_ports, 0);
  std::uint32_t total = 0;
  std::int64_t accepted = 0;
  std::size_t k = 0;
  for (const auto& slot : seq.slots) {
    for (PortId p : slot) {
      if (mask >> k++ & 1) {
        if (total == cfg.buffer_size) return -1;
        ++q[p];
        ++total;
        ++accepted;
      }
    }
    drain(q, total);
  }
  return accepted;
}

// OPT by enumerating every accept mask, no pruning.
inline std::uint64_t exhaustive_opt(const SwitchConfig& cfg, const ArrivalSequence& seq) {
  const std::size_t n = seq.packet_count();
  std::int64_t best = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    best = std::max(best, replay_mask(cfg, seq, mask));
  }
  return static_cast<std::uint64_t>(best);
}

// Push-out LQD with counters. Victim is the longest queue on the pre-arrival
// state, lowest index on ties.
inline std::uint64_t reference_lqd(const SwitchConfig& cfg, const ArrivalSequence& seq) {
  std::vector<std::uint32_t> q(cfg.num_ports, 0);
  std::uint32_t total = 0;
  std::uint64_t lost = 0;
  for (const auto& slot : seq.slots) {
    for (PortId p : slot) {
      if (total < cfg.buffer_size) {
        ++q[p];
        ++total;
        continue;
      }
      PortId j = 0;
      for (PortId i = 1; i < cfg.num_ports; ++i) {
        if (q[i] > q[j]) j = i;
      }
      ++lost;
      if (j != p) {
        --q[j];
        ++q[p];
      }
    }
    drain(q, total);
  }
  return seq.packet_count() - lost;
}

}  // namespace shbuf::testing
