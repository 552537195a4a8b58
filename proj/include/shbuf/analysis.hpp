#pragma once

// Prediction error, its closed-form bound, and competitive-ratio estimates.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "shbuf/core.hpp"
#include "shbuf/learner.hpp"
#include "shbuf/oracle.hpp"
#include "shbuf/policies.hpp"
#include "shbuf/workloads.hpp"

namespace shbuf {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
// Competitive ratio of push-out LQD, taken from the literature.
inline constexpr double kLqdCompetitiveRatio = 1.707;

struct ErrorReport {
  double eta = 1.0;
  double eta_upper_bound = 1.0;
  ConfusionCounts confusion;
  std::uint64_t lqd_throughput = 0;
  std::uint64_t followlqd_reduced_throughput = 0;
};

// The sequence with every predicted-positive packet removed. Slots keep their
// timing; survivors keep their relative order.
ArrivalSequence remove_predicted_drops(const ArrivalSequence& sequence,
                                       const PredictionTrace& predictions);

// eta = LQD(sigma) / FollowLQD(sigma minus predicted drops); 0/0 is 1 and
// x/0 is +inf. Throws ValidationError when either trace does not cover the
// sequence exactly.
ErrorReport compute_eta(const SwitchConfig& config, const ArrivalSequence& sequence,
                        const PredictionTrace& predictions,
                        const GroundTruthTrace& truth);

// (tn + fp) / (tn - min((N-1) * fn, tn)); +inf when the denominator is 0.
double eta_upper_bound(const ConfusionCounts& c, std::uint32_t num_ports);

class OptRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kBruteForceCap = 20;

struct OptSolution {
  std::uint64_t throughput = 0;
  // accept[k] for the k-th packet in arrival order.
  std::vector<bool> accept;
};

// Exact offline optimum over all drop-tail accept/drop vectors, by
// depth-first branch and bound. Throws OptRefused above `cap` packets.
OptSolution brute_force_opt_solution(const SwitchConfig& config,
                                     const ArrivalSequence& sequence,
                                     std::size_t cap = kBruteForceCap);
std::uint64_t brute_force_opt(const SwitchConfig& config,
                              const ArrivalSequence& sequence,
                              std::size_t cap = kBruteForceCap);

// Drop-tail policy replaying a fixed accept/drop vector; a packet scheduled
// for acceptance into a full buffer is a logic error.
class ReplayPolicy final : public Policy {
 public:
  explicit ReplayPolicy(std::vector<bool> accept) : accept_(std::move(accept)) {}
  void reset(const SwitchConfig&) override {}
  Decision on_arrival(const ArrivalContext& ctx, const SwitchState& state) override;
  std::string_view name() const override { return "replay"; }

 private:
  std::vector<bool> accept_;
};

struct CompetitiveEstimate {
  std::uint64_t opt_throughput = 0;
  std::uint64_t alg_throughput = 0;
  // ratio = opt / alg, +inf when alg transmitted nothing and opt did.
  double ratio() const;
};

struct AdversaryReport {
  AdversaryLayout layout;
  std::uint32_t cycles = 0;
  std::uint64_t followlqd_throughput = 0;
  // Fill packets plus N + 1 per cycle; certified by replaying an explicit
  // offline schedule that achieves it.
  std::uint64_t opt_throughput = 0;
  std::uint64_t replayed_schedule_throughput = 0;
  CompetitiveEstimate whole_run;
  // Cycle phase only: both algorithms transmit every fill packet, so those
  // are subtracted from each side.
  CompetitiveEstimate cycle_phase;
};

// Accept vector achieving fill_packets + cycles * (N + 1) on the adversarial
// sequence: the last N - 1 fill packets are dropped, after which every cycle
// takes one packet per port plus one more for queue 0 (N in the final cycle).
std::vector<bool> adversary_offline_schedule(const SwitchConfig& config,
                                             std::uint32_t cycles);

AdversaryReport followlqd_adversary_report(const SwitchConfig& config,
                                           std::uint32_t cycles);

struct SweepParams {
  SwitchConfig config{32, 48};
  double rate = 0.0075;
  std::uint32_t horizon = 2000;
  std::uint64_t base_seed = 1;
  std::uint32_t seed_count = 20;
  std::vector<double> p_values{0.0, 0.1, 0.3, 0.5, 0.7};
  Rational dt_alpha{1, 2};
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct SweepRow {
  double p = 0.0;
  // Totals over all seeds.
  std::uint64_t lqd_throughput = 0;
  std::uint64_t credence_throughput = 0;
  std::uint64_t dt_throughput = 0;
  // Means over seeds of the per-seed LQD / ALG ratio.
  double ratio_credence = 1.0;
  double ratio_dt = 1.0;
  std::uint64_t seed = 0;
};

// For every p, runs Credence with a flipped perfect oracle over Poisson-burst
// sequences of B-sized bursts and reports LQD/Credence next to LQD/DT.
std::vector<SweepRow> competitive_sweep(const SweepParams& params);

}  // namespace shbuf
