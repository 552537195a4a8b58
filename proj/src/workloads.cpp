#include "shbuf/workloads.hpp"

#include <charconv>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

#include "shbuf/random.hpp"

namespace shbuf {
namespace {

PortId uniform_port(std::mt19937_64& rng, std::uint32_t n) {
  return static_cast<PortId>(rng() % n);
}

// Emits queued packets at most N per slot, in queue order.
void flush_round_robin(ArrivalSequence& seq, std::uint32_t n,
                       const std::vector<PortId>& ports,
                       const std::vector<std::uint32_t>& counts) {
  std::vector<std::uint32_t> left = counts;
  std::vector<PortId> order;
  bool any = true;
  while (any) {
    any = false;
    for (std::size_t i = 0; i < ports.size(); ++i) {
      if (left[i] == 0) continue;
      order.push_back(ports[i]);
      --left[i];
      any = true;
    }
  }
  for (std::size_t i = 0; i < order.size(); i += n) {
    seq.slots.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                           order.begin() + static_cast<std::ptrdiff_t>(
                                               std::min<std::size_t>(i + n, order.size())));
  }
}

}  // namespace

std::string_view to_string(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::SingleBurst: return "single_burst";
    case WorkloadKind::MultiBurstThenShorts: return "multi_burst_then_shorts";
    case WorkloadKind::FollowLqdAdversary: return "followlqd_adversary";
    case WorkloadKind::PoissonBursts: return "poisson_bursts";
    case WorkloadKind::UniformRandom: return "uniform_random";
  }
  return "?";
}

WorkloadKind parse_workload_kind(std::string_view text) {
  for (auto k : {WorkloadKind::SingleBurst, WorkloadKind::MultiBurstThenShorts,
                 WorkloadKind::FollowLqdAdversary, WorkloadKind::PoissonBursts,
                 WorkloadKind::UniformRandom}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown workload kind '" + std::string(text) + "'");
}

namespace {

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string WorkloadSpec::canonical() const {
  std::ostringstream s;
  s << "kind=" << to_string(kind);
  switch (kind) {
    case WorkloadKind::SingleBurst: s << " burst_size=" << burst_size; break;
    case WorkloadKind::MultiBurstThenShorts: s << " short_burst=" << short_burst; break;
    case WorkloadKind::FollowLqdAdversary: s << " cycles=" << cycles; break;
    case WorkloadKind::PoissonBursts:
      s << " rate=" << shortest(rate) << " horizon=" << horizon << " seed=" << seed;
      break;
    case WorkloadKind::UniformRandom:
      s << " load=" << shortest(load) << " horizon=" << horizon << " seed=" << seed;
      break;
  }
  return s.str();
}

ArrivalSequence generate(const SwitchConfig& config, const WorkloadSpec& spec) {
  switch (spec.kind) {
    case WorkloadKind::SingleBurst:
      return gen_single_burst(config, spec.burst_size == 0 ? config.buffer_size
                                                           : spec.burst_size);
    case WorkloadKind::MultiBurstThenShorts:
      return gen_multi_burst_then_shorts(config, spec.short_burst);
    case WorkloadKind::FollowLqdAdversary:
      return gen_followlqd_adversary(config, spec.cycles);
    case WorkloadKind::PoissonBursts:
      return gen_poisson_bursts(config, spec.rate, spec.horizon, spec.seed);
    case WorkloadKind::UniformRandom:
      return gen_uniform_random(config, spec.load, spec.horizon, spec.seed);
  }
  throw ValidationError("unknown workload kind");
}

ArrivalSequence gen_single_burst(const SwitchConfig& config, std::uint32_t burst_size) {
  config.validate();
  if (burst_size < 1) throw ValidationError("burst_size must be >= 1");
  ArrivalSequence seq;
  flush_round_robin(seq, config.num_ports, {0}, {burst_size});
  return seq;
}

ArrivalSequence gen_multi_burst_then_shorts(const SwitchConfig& config,
                                            std::uint32_t short_burst) {
  config.validate();
  if (config.num_ports < 5) {
    throw ValidationError("multi_burst_then_shorts needs at least 5 ports");
  }
  if (short_burst == 0) short_burst = std::max<std::uint32_t>(1, config.buffer_size / 8);
  ArrivalSequence seq;
  const std::uint32_t b = config.buffer_size;
  flush_round_robin(seq, config.num_ports, {0, 1, 2, 3}, {b, b, b, b});
  std::vector<PortId> rest;
  for (PortId p = 4; p < config.num_ports; ++p) rest.push_back(p);
  flush_round_robin(seq, config.num_ports, rest,
                    std::vector<std::uint32_t>(rest.size(), short_burst));
  return seq;
}

ArrivalSequence gen_followlqd_adversary(const SwitchConfig& config,
                                        std::uint32_t cycles,
                                        AdversaryLayout* layout) {
  config.validate();
  const std::uint32_t n = config.num_ports;
  const std::uint32_t b = config.buffer_size;
  if (n < 2) throw ValidationError("followlqd_adversary needs N >= 2");
  if (b < n) throw ValidationError("followlqd_adversary needs B >= N");
  if (cycles < 1) throw ValidationError("followlqd_adversary needs cycles >= 1");

  ArrivalSequence seq;
  AdversaryLayout lay;
  // Queue 0 drains one packet per slot while it is being filled.
  std::uint32_t len = 0;
  while (len < b) {
    std::uint32_t k = std::min(n, b - len);
    seq.slots.emplace_back(k, PortId{0});
    lay.fill_packets += k;
    len += k;
    if (len < b) --len;
  }
  lay.fill_slots = static_cast<std::uint32_t>(seq.slots.size());

  std::vector<PortId> spread(n);
  for (PortId p = 0; p < n; ++p) spread[p] = p;
  for (std::uint32_t c = 0; c < cycles; ++c) {
    seq.slots.push_back(spread);
    seq.slots.emplace_back(n, PortId{0});
  }
  if (layout) *layout = lay;
  return seq;
}

ArrivalSequence gen_poisson_bursts(const SwitchConfig& config, double rate,
                                   std::uint32_t horizon, std::uint64_t seed) {
  config.validate();
  if (!(rate > 0.0)) throw ValidationError("rate must be > 0");
  if (horizon < 1) throw ValidationError("horizon must be >= 1");

  const std::uint32_t n = config.num_ports;
  const std::uint32_t b = config.buffer_size;
  std::mt19937_64 rng(seed);

  struct Burst {
    std::uint32_t start;
    PortId port;
  };
  std::vector<Burst> bursts;
  double t = 0.0;
  for (;;) {
    t += -std::log1p(-uniform01(rng)) / rate;
    if (t >= horizon) break;
    bursts.push_back({static_cast<std::uint32_t>(t), uniform_port(rng, n)});
  }

  // Each burst nominally delivers N packets per slot from its start until B
  // packets are out. Nominal arrivals beyond the per-slot cap wait in a FIFO.
  ArrivalSequence seq;
  std::deque<PortId> pending;
  std::vector<std::uint32_t> remaining(bursts.size(), b);
  std::size_t first_active = 0;
  for (std::uint32_t slot = 0;; ++slot) {
    for (std::size_t i = first_active; i < bursts.size() && bursts[i].start <= slot; ++i) {
      std::uint32_t k = std::min(n, remaining[i]);
      pending.insert(pending.end(), k, bursts[i].port);
      remaining[i] -= k;
    }
    while (first_active < bursts.size() && remaining[first_active] == 0) ++first_active;

    std::vector<PortId> arrivals;
    while (!pending.empty() && arrivals.size() < n) {
      arrivals.push_back(pending.front());
      pending.pop_front();
    }
    seq.slots.push_back(std::move(arrivals));
    if (slot + 1 >= horizon && pending.empty() && first_active == bursts.size()) break;
  }
  return seq;
}

ArrivalSequence gen_uniform_random(const SwitchConfig& config, double load,
                                   std::uint32_t horizon, std::uint64_t seed) {
  config.validate();
  if (!(load >= 0.0 && load <= 1.0)) throw ValidationError("load must be in [0, 1]");
  std::mt19937_64 rng(seed);
  ArrivalSequence seq;
  seq.slots.resize(horizon);
  for (auto& slot : seq.slots) {
    for (std::uint32_t k = 0; k < config.num_ports; ++k) {
      double u = uniform01(rng);
      PortId p = uniform_port(rng, config.num_ports);
      if (u < load) slot.push_back(p);
    }
  }
  return seq;
}

}  // namespace shbuf
