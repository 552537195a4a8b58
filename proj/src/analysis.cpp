#include "shbuf/analysis.hpp"

#include <algorithm>
#include <future>
#include <thread>

#include "shbuf/random.hpp"
#include "shbuf/workloads.hpp"

namespace shbuf {

ArrivalSequence remove_predicted_drops(const ArrivalSequence& sequence,
                                       const PredictionTrace& predictions) {
  ArrivalSequence reduced;
  reduced.slots.resize(sequence.slots.size());
  std::size_t flat = 0;
  for (std::size_t t = 0; t < sequence.slots.size(); ++t) {
    for (PortId p : sequence.slots[t]) {
      if (predictions.at_flat(flat++) == PredictionLabel::Negative) {
        reduced.slots[t].push_back(p);
      }
    }
  }
  return reduced;
}

ErrorReport compute_eta(const SwitchConfig& config, const ArrivalSequence& sequence,
                        const PredictionTrace& predictions,
                        const GroundTruthTrace& truth) {
  const std::size_t n = sequence.packet_count();
  if (predictions.size() != n || truth.size() != n) {
    throw ValidationError("prediction/truth traces do not cover the sequence (" +
                          std::to_string(predictions.size()) + "/" +
                          std::to_string(truth.size()) + " labels for " +
                          std::to_string(n) + " packets)");
  }

  ErrorReport r;
  r.confusion = confusion(predictions, truth);

  LongestQueueDrop lqd;
  r.lqd_throughput = run_simulation(config, sequence, lqd).transmitted;
  FollowLqd follow;
  r.followlqd_reduced_throughput =
      run_simulation(config, remove_predicted_drops(sequence, predictions), follow)
          .transmitted;

  if (r.followlqd_reduced_throughput == 0) {
    r.eta = r.lqd_throughput == 0 ? 1.0 : kInfinity;
  } else {
    r.eta = static_cast<double>(r.lqd_throughput) /
            static_cast<double>(r.followlqd_reduced_throughput);
  }
  r.eta_upper_bound = eta_upper_bound(r.confusion, config.num_ports);
  return r;
}

double eta_upper_bound(const ConfusionCounts& c, std::uint32_t num_ports) {
  if (num_ports < 1) throw ValidationError("num_ports must be >= 1");
  const std::uint64_t penalty = std::min<std::uint64_t>((num_ports - 1) * c.fn, c.tn);
  const std::uint64_t den = c.tn - penalty;
  if (den == 0) return kInfinity;
  return static_cast<double>(c.tn + c.fp) / static_cast<double>(den);
}

namespace {

class OptSearch {
 public:
  OptSearch(const SwitchConfig& config, const ArrivalSequence& sequence)
      : buffer_(config.buffer_size), queues_(config.num_ports, 0) {
    std::uint32_t prev_slot = 0;
    for (std::uint32_t t = 0; t < sequence.slots.size(); ++t) {
      for (PortId p : sequence.slots[t]) {
        ports_.push_back(p);
        drains_before_.push_back(t - prev_slot);
        prev_slot = t;
      }
    }
    current_.assign(ports_.size(), false);
  }

  OptSolution run() {
    best_.accept.assign(ports_.size(), false);
    dfs(0, 0, 0);
    return best_;
  }

 private:
  void dfs(std::size_t k, std::uint64_t accepted, std::uint32_t occupancy) {
    if (k == ports_.size()) {
      if (accepted > best_.throughput || !found_) {
        best_.throughput = accepted;
        best_.accept = current_;
        found_ = true;
      }
      return;
    }
    // Bound: even accepting everything left cannot beat the incumbent.
    if (found_ && accepted + (ports_.size() - k) <= best_.throughput) return;

    std::vector<std::uint32_t> saved;
    if (drains_before_[k] > 0) {
      saved = queues_;
      for (std::uint32_t d = 0; d < drains_before_[k]; ++d) {
        for (auto& q : queues_) {
          if (q > 0) {
            --q;
            --occupancy;
          }
        }
      }
    }

    const PortId p = ports_[k];
    if (occupancy < buffer_) {
      ++queues_[p];
      current_[k] = true;
      dfs(k + 1, accepted + 1, occupancy + 1);
      current_[k] = false;
      --queues_[p];
    }
    dfs(k + 1, accepted, occupancy);

    if (!saved.empty()) queues_ = std::move(saved);
  }

  std::uint32_t buffer_;
  std::vector<std::uint32_t> queues_;
  std::vector<PortId> ports_;
  std::vector<std::uint32_t> drains_before_;
  std::vector<bool> current_;
  OptSolution best_;
  bool found_ = false;
};

}  // namespace

OptSolution brute_force_opt_solution(const SwitchConfig& config,
                                     const ArrivalSequence& sequence,
                                     std::size_t cap) {
  sequence.validate(config);
  const std::size_t n = sequence.packet_count();
  if (n > cap) {
    throw OptRefused("brute-force OPT refused: " + std::to_string(n) +
                     " packets exceeds the cap of " + std::to_string(cap));
  }
  return OptSearch(config, sequence).run();
}

std::uint64_t brute_force_opt(const SwitchConfig& config,
                              const ArrivalSequence& sequence, std::size_t cap) {
  return brute_force_opt_solution(config, sequence, cap).throughput;
}

Decision ReplayPolicy::on_arrival(const ArrivalContext& ctx, const SwitchState&) {
  if (ctx.flat_index >= accept_.size()) {
    throw std::out_of_range("replay schedule shorter than the sequence");
  }
  return accept_[ctx.flat_index] ? Decision::accept() : Decision::drop();
}

double CompetitiveEstimate::ratio() const {
  if (alg_throughput == 0) return opt_throughput == 0 ? 1.0 : kInfinity;
  return static_cast<double>(opt_throughput) / static_cast<double>(alg_throughput);
}

std::vector<bool> adversary_offline_schedule(const SwitchConfig& config,
                                             std::uint32_t cycles) {
  AdversaryLayout lay;
  ArrivalSequence seq = gen_followlqd_adversary(config, cycles, &lay);
  const std::uint32_t n = config.num_ports;
  std::vector<bool> accept;
  accept.reserve(seq.packet_count());
  for (std::uint32_t k = 0; k < lay.fill_packets; ++k) {
    accept.push_back(k + (n - 1) < lay.fill_packets);
  }
  for (std::uint32_t c = 0; c < cycles; ++c) {
    accept.insert(accept.end(), n, true);
    const std::uint32_t take = c + 1 == cycles ? n : 1;
    for (std::uint32_t k = 0; k < n; ++k) accept.push_back(k < take);
  }
  return accept;
}

AdversaryReport followlqd_adversary_report(const SwitchConfig& config,
                                           std::uint32_t cycles) {
  AdversaryReport r;
  r.cycles = cycles;
  ArrivalSequence seq = gen_followlqd_adversary(config, cycles, &r.layout);

  FollowLqd follow;
  r.followlqd_throughput = run_simulation(config, seq, follow).transmitted;
  r.opt_throughput =
      r.layout.fill_packets + std::uint64_t{cycles} * (config.num_ports + 1);
  ReplayPolicy replay(adversary_offline_schedule(config, cycles));
  r.replayed_schedule_throughput = run_simulation(config, seq, replay).transmitted;

  r.whole_run = {r.opt_throughput, r.followlqd_throughput};
  r.cycle_phase = {r.opt_throughput - r.layout.fill_packets,
                   r.followlqd_throughput - r.layout.fill_packets};
  return r;
}

std::vector<SweepRow> competitive_sweep(const SweepParams& params) {
  params.config.validate();
  for (double p : params.p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p values must lie in [0, 1]");
  }
  if (params.seed_count < 1) throw ValidationError("seed_count must be >= 1");

  struct SeedResult {
    std::uint64_t lqd = 0;
    std::uint64_t dt = 0;
    std::vector<std::uint64_t> credence;
  };

  auto run_seed = [&](std::uint32_t i) {
    const std::uint64_t seed = derive_seed(params.base_seed, i);
    const SwitchConfig& cfg = params.config;
    ArrivalSequence seq = gen_poisson_bursts(cfg, params.rate, params.horizon, seed);

    SeedResult out;
    LongestQueueDrop lqd;
    RunResult lqd_run = run_simulation(cfg, seq, lqd);
    out.lqd = lqd_run.transmitted;
    DynamicThresholds dt(params.dt_alpha);
    out.dt = run_simulation(cfg, seq, dt).transmitted;

    auto perfect = std::make_shared<PerfectOracle>(ground_truth_from_run(seq, lqd_run));
    // One flip stream per sequence, shared by every p.
    const std::uint64_t flip_seed = derive_seed(seed, 0xf1f);
    for (double p : params.p_values) {
      Credence credence(std::make_shared<FlipOracle>(perfect, p, flip_seed));
      out.credence.push_back(run_simulation(cfg, seq, credence).transmitted);
    }
    return out;
  };

  unsigned threads = params.threads ? params.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, threads);
  std::vector<SeedResult> results(params.seed_count);
  for (std::uint32_t start = 0; start < params.seed_count; start += threads) {
    std::vector<std::future<SeedResult>> batch;
    for (std::uint32_t i = start; i < std::min(params.seed_count, start + threads); ++i) {
      batch.push_back(std::async(std::launch::async, run_seed, i));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) results[start + k] = batch[k].get();
  }

  auto ratio = [](std::uint64_t lqd, std::uint64_t alg) {
    return CompetitiveEstimate{lqd, alg}.ratio();
  };
  std::vector<SweepRow> rows;
  for (std::size_t j = 0; j < params.p_values.size(); ++j) {
    SweepRow row;
    row.p = params.p_values[j];
    row.seed = params.base_seed;
    double rc = 0.0, rd = 0.0;
    for (const auto& s : results) {
      row.lqd_throughput += s.lqd;
      row.dt_throughput += s.dt;
      row.credence_throughput += s.credence[j];
      rc += ratio(s.lqd, s.credence[j]);
      rd += ratio(s.lqd, s.dt);
    }
    row.ratio_credence = rc / results.size();
    row.ratio_dt = rd / results.size();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace shbuf
