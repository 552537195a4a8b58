// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "shbuf/analysis.hpp"
#include "shbuf/learner.hpp"
#include "shbuf/random.hpp"
#include "shbuf/trace_io.hpp"
#include "support.hpp"

using namespace shbuf;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1 and 2

struct Corpus {
  SwitchConfig config;
  ArrivalSequence sequence;
};

std::vector<Corpus> shadow_corpus() {
  const std::uint32_t ports[] = {2, 4, 8};
  const std::uint32_t buffers[] = {8, 16, 64};
  std::vector<Corpus> out;
  for (std::uint32_t i = 0; i < 1000; ++i) {
    SwitchConfig cfg{ports[i % 3], buffers[(i / 3) % 3]};
    const std::uint64_t seed = derive_seed(2024, i);
    std::mt19937_64 rng(seed);
    ArrivalSequence seq;
    if (i % 2 == 0) {
      seq = gen_uniform_random(cfg, 0.3 + 0.6 * uniform01(rng), 2000, seed);
    } else {
      seq = gen_poisson_bursts(cfg, 0.005 + 0.045 * uniform01(rng), 2000, seed);
    }
    out.push_back({cfg, std::move(seq)});
  }
  return out;
}

void criteria_1_and_2() {
  auto t0 = std::chrono::steady_clock::now();
  auto corpus = shadow_corpus();
  std::uint64_t events = 0, mismatches = 0, sequences_with_mismatch = 0;
  std::uint64_t below = 0, above = 0, equal = 0, lqd_drops = 0;

  for (const auto& [cfg, seq] : corpus) {
    LongestQueueDrop lqd_policy;
    auto lqd_run = run_simulation(cfg, seq, lqd_policy);
    lqd_drops += lqd_run.dropped;

    LongestQueueDrop shadow;
    FollowLqd follow;
    Credence credence(std::make_shared<PerfectOracle>(ground_truth_from_run(seq, lqd_run)));
    Simulator s_lqd(cfg, shadow), s_follow(cfg, follow), s_cred(cfg, credence);

    bool bad = false;
    auto compare = [&] {
      ++events;
      const auto& q = s_lqd.state().queue_len;
      if (follow.thresholds().thresholds() != q || credence.thresholds().thresholds() != q) {
        ++mismatches;
        bad = true;
      }
    };
    auto step_slot = [&](const std::vector<PortId>& ports) {
      s_lqd.begin_slot();
      s_follow.begin_slot();
      s_cred.begin_slot();
      for (PortId p : ports) {
        s_lqd.arrive(p);
        s_follow.arrive(p);
        s_cred.arrive(p);
        compare();
      }
      s_lqd.depart();
      s_follow.depart();
      s_cred.depart();
      compare();
    };
    for (const auto& slot : seq.slots) step_slot(slot);
    while (!s_lqd.buffer_empty()) step_slot({});
    if (bad) ++sequences_with_mismatch;

    auto cred_tx = s_cred.finish().transmitted;
    s_follow.finish();
    if (cred_tx < lqd_run.transmitted) ++below;
    else if (cred_tx > lqd_run.transmitted) ++above;
    else ++equal;
  }
  double secs = seconds_since(t0);
  report(1, mismatches == 0 && secs < 60.0, "shadow-LQD equivalence",
         fmt("%zu sequences, %llu events, %llu mismatching events in %llu sequences, "
             "%llu LQD drops, %.1fs (limit 60s)",
             corpus.size(), (unsigned long long)events, (unsigned long long)mismatches,
             (unsigned long long)sequences_with_mismatch, (unsigned long long)lqd_drops, secs));
  report(2, below == 0, "consistency with perfect predictions",
         fmt("Credence == LQD on %llu, Credence > LQD on %llu (soft), Credence < LQD on %llu",
             (unsigned long long)equal, (unsigned long long)above, (unsigned long long)below));
}

// ---------------------------------------------------------------- 3 and 4

void criteria_3_and_4() {
  auto t0 = std::chrono::steady_clock::now();
  std::uint64_t instances = 0, checks = 0, lemma2 = 0, theorem1 = 0, lqd_bound = 0;
  double worst_opt_over_alg = 0.0;
  for (std::uint32_t n : {2u, 3u}) {
    for (std::uint32_t b = 2; b <= 6; ++b) {
      SwitchConfig cfg{n, b};
      std::mt19937_64 rng(derive_seed(7, n * 16 + b));
      for (int i = 0; i < 500; ++i) {
        auto seq = testing::random_sequence(rng, n, 12);
        ++instances;
        const auto opt = brute_force_opt(cfg, seq);
        LongestQueueDrop lqd;
        auto lqd_run = run_simulation(cfg, seq, lqd);
        if (static_cast<double>(opt) > kLqdCompetitiveRatio * lqd_run.transmitted + 1e-9) {
          ++lqd_bound;
        }
        auto truth = ground_truth_from_run(seq, lqd_run);
        auto perfect = std::make_shared<PerfectOracle>(truth);
        const std::shared_ptr<const Oracle> oracles[] = {
            perfect, std::make_shared<ConstantOracle>(PredictionLabel::Positive),
            std::make_shared<ConstantOracle>(PredictionLabel::Negative),
            std::make_shared<FlipOracle>(perfect, 1.0, 1)};
        for (const auto& o : oracles) {
          ++checks;
          Credence credence(o);
          const auto alg = run_simulation(cfg, seq, credence).transmitted;
          if (opt > std::uint64_t{n} * alg) ++lemma2;
          const double eta = compute_eta(cfg, seq, record_predictions(*o, cfg, seq), truth).eta;
          const double bound = std::min(kLqdCompetitiveRatio * eta, static_cast<double>(n));
          if (static_cast<double>(opt) > bound * static_cast<double>(alg) + 1e-9) ++theorem1;
          if (alg > 0) {
            worst_opt_over_alg = std::max(worst_opt_over_alg, double(opt) / double(alg));
          }
        }
      }
    }
  }
  double secs = seconds_since(t0);
  report(3, lemma2 == 0 && secs < 300.0, "robustness OPT <= N * Credence",
         fmt("%llu instances x 4 oracles, %llu violations, worst OPT/Credence %.3f, %.1fs",
             (unsigned long long)instances, (unsigned long long)lemma2, worst_opt_over_alg, secs));
  report(4, theorem1 == 0, "OPT <= min(1.707 eta, N) * Credence",
         fmt("%llu checks, %llu violations; OPT <= 1.707 LQD violated on %llu instances",
             (unsigned long long)checks, (unsigned long long)theorem1,
             (unsigned long long)lqd_bound));
}

// ---------------------------------------------------------------- 5

void criterion_5() {
  struct Trained {
    SwitchConfig config;
    std::shared_ptr<const Oracle> oracle;
  };
  std::vector<Trained> forests;
  for (SwitchConfig cfg : {SwitchConfig{4, 16}, SwitchConfig{8, 32}, SwitchConfig{8, 64}}) {
    auto train = collect_trace(cfg, gen_poisson_bursts(cfg, 0.02, 3000, 101));
    forests.push_back(
        {cfg, std::make_shared<ForestOracle>(train_forest(train, {4, 4, 5}))});
  }

  std::mt19937_64 rng(55);
  int finite = 0, violations = 0, forest_cases = 0;
  double worst_slack = kInfinity;
  for (int i = 0; i < 500; ++i) {
    const auto& f = forests[i % forests.size()];
    const SwitchConfig cfg = f.config;
    const std::uint64_t seed = derive_seed(909, i);
    auto seq = gen_poisson_bursts(cfg, 0.01 + 0.03 * uniform01(rng), 600, seed);
    auto truth = lqd_ground_truth(cfg, seq);
    std::shared_ptr<const Oracle> oracle;
    if (i % 2 == 0) {
      oracle = f.oracle;
      ++forest_cases;
    } else {
      oracle = std::make_shared<FlipOracle>(std::make_shared<PerfectOracle>(truth),
                                            0.3 * uniform01(rng), seed);
    }
    auto r = compute_eta(cfg, seq, record_predictions(*oracle, cfg, seq), truth);
    if (r.eta_upper_bound == kInfinity) continue;
    ++finite;
    worst_slack = std::min(worst_slack, r.eta_upper_bound - r.eta);
    if (r.eta > r.eta_upper_bound) ++violations;
  }
  report(5, violations == 0 && finite > 0, "eta <= closed-form upper bound",
         fmt("500 instances (%d forest, %d flip), %d with a positive denominator, "
             "%d violations, min slack %.4f",
             forest_cases, 500 - forest_cases, finite, violations, worst_slack));
}

// ---------------------------------------------------------------- 6

void criterion_6() {
  auto t0 = std::chrono::steady_clock::now();
  const SwitchConfig cfg{8, 32};
  auto r = followlqd_adversary_report(cfg, 200);
  const double target = 0.95 * (cfg.num_ports + 1) / 2.0;
  const bool certified = r.replayed_schedule_throughput == r.opt_throughput;
  report(6, certified && r.cycle_phase.ratio() >= target, "FollowLQD lower bound",
         fmt("cycles=200 OPT=%llu (replayed %llu) FollowLQD=%llu fill=%u; "
             "cycle-phase ratio %.4f >= %.3f; whole-run ratio %.4f; %.2fs",
             (unsigned long long)r.opt_throughput,
             (unsigned long long)r.replayed_schedule_throughput,
             (unsigned long long)r.followlqd_throughput, r.layout.fill_packets,
             r.cycle_phase.ratio(), target, r.whole_run.ratio(), seconds_since(t0)));
}

// ---------------------------------------------------------------- 7

void criterion_7() {
  auto t0 = std::chrono::steady_clock::now();
  SweepParams params;  // pinned defaults
  auto rows = competitive_sweep(params);
  const double secs = seconds_since(t0);

  bool exact_at_zero = false, below_dt = true, monotone = true;
  std::string table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.p == 0.0) {
      exact_at_zero = row.ratio_credence == 1.0 && row.credence_throughput == row.lqd_throughput;
    }
    if (row.p <= 0.7 && row.ratio_credence > row.ratio_dt) below_dt = false;
    if (i > 0 && row.ratio_credence < rows[i - 1].ratio_credence) monotone = false;
    table += fmt(" p=%.1f:%.3f/%.3f", row.p, row.ratio_credence, row.ratio_dt);
  }
  const double at_07 = rows.back().ratio_credence;
  const bool in_band = rows.back().p == 0.7 && at_07 >= 2.0 && at_07 <= 3.5;
  report(7, exact_at_zero && below_dt && in_band && params.seed_count >= 10 && secs < 120.0,
         "flip-probability sweep",
         fmt("N=%u B=%u rate=%g horizon=%u seeds=%u; Credence/DT%s; (a) %s (b) %s "
             "(c) %.3f in [2.0, 3.5]; trend %s; %.1fs",
             params.config.num_ports, params.config.buffer_size, params.rate, params.horizon,
             params.seed_count, table.c_str(), exact_at_zero ? "ok" : "NO",
             below_dt ? "ok" : "NO", at_07, monotone ? "non-decreasing" : "not monotone",
             secs));
}

// ---------------------------------------------------------------- 8 and 9

void criteria_8_and_9() {
  const SwitchConfig cfg{8, 32};
  const double rate = 0.02;
  auto train_seq = gen_poisson_bursts(cfg, rate, 4000, 11);
  auto examples = collect_trace(cfg, train_seq);
  std::size_t positives = 0;
  for (const auto& e : examples) positives += e.label == PredictionLabel::Positive;
  const double drop_rate = static_cast<double>(positives) / examples.size();

  auto split = split_examples(examples, 0.6, 5);
  auto model = train_forest(split.train, {4, 4, 7});
  auto held = evaluate_on(model, split.test);
  std::size_t test_pos = 0;
  for (const auto& e : split.test) test_pos += e.label == PredictionLabel::Positive;
  const double pos_frac = static_cast<double>(test_pos) / split.test.size();
  const double baseline = std::max(pos_frac, 1.0 - pos_frac);

  auto fresh = gen_poisson_bursts(cfg, rate, 4000, 99);
  ForestOracle oracle(model);
  auto er = compute_eta(cfg, fresh, record_predictions(oracle, cfg, fresh),
                        lqd_ground_truth(cfg, fresh));
  const double inv_eta = er.eta == kInfinity ? 0.0 : 1.0 / er.eta;

  bool identities = true;
  auto check_identities = [&](const Metrics& m) {
    if (m.precision && m.recall && m.f1 && *m.precision + *m.recall > 0) {
      const double p = *m.precision, r = *m.recall;
      identities &= std::abs(*m.f1 - 2 * p * r / (p + r)) <= 1e-12;
    }
  };
  check_identities(held.metrics);
  check_identities(metrics_from(er.confusion));

  const double accuracy = held.metrics.accuracy.value_or(0.0);
  report(8, drop_rate >= 0.01 && accuracy > baseline && inv_eta >= 0.9 && identities,
         "predictor quality",
         fmt("LQD drop rate %.3f; held-out accuracy %.4f vs majority %.4f; precision %.3f "
             "recall %.3f f1 %.3f; fresh-traffic 1/eta %.4f (eta bound %.3f); F1 identity %s",
             drop_rate, accuracy, baseline, held.metrics.precision.value_or(0),
             held.metrics.recall.value_or(0), held.metrics.f1.value_or(0), inv_eta,
             er.eta_upper_bound, identities ? "ok" : "broken"));

  std::string table;
  double best = 0.0, at4 = 0.0;
  for (std::uint32_t trees : {1u, 2u, 4u, 8u, 16u}) {
    auto m = evaluate_on(train_forest(split.train, {trees, 4, 7}), split.test).metrics;
    const double f1 = m.f1.value_or(0.0);
    best = std::max(best, f1);
    if (trees == 4) at4 = f1;
    table += fmt(" %u:%.4f", trees, f1);
  }
  report(9, best - at4 <= 0.05, "tree-count sweep",
         fmt("F1 by trees%s; F1(4) %.4f within %.4f of max %.4f (limit 0.05)", table.c_str(),
             at4, best - at4, best));
}

// ---------------------------------------------------------------- 10

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  }
  return files;
}

void criterion_10() {
  const fs::path root = fs::temp_directory_path() / "shbuf_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> wl{"--num-ports", "8", "--buffer-size", "32", "--workload",
                                    "poisson_bursts", "--rate", "0.02", "--horizon", "1500",
                                    "--seed", "31"};
  auto cmd = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), wl.begin(), wl.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };

  int mismatched = 0, compared = 0, failed_runs = 0;
  std::string detail;
  for (int round = 0; round < 2; ++round) {
    const fs::path base = root / std::to_string(round);
    const auto model = (base / "train" / "model.json").string();
    const std::vector<std::vector<std::string>> commands = {
        cmd({"gen"}, {"-o", (base / "gen").string()}),
        cmd({"simulate"}, {"--policy", "credence", "--oracle", "flip", "--flip-p", "0.3",
                           "--examples-out", (base / "simulate" / "examples.csv").string(),
                           "-o", (base / "simulate").string()}),
        cmd({"train"}, {"--sweep-trees", "1,2,4,8,16", "-o", (base / "train").string()}),
        cmd({"evaluate"}, {"--model", model, "-o", (base / "evaluate").string()}),
        cmd({"sweep"}, {"--seeds", "4", "--chart", "-o", (base / "sweep").string()}),
        {"opt", "--num-ports", "4", "--buffer-size", "8", "--workload", "followlqd_adversary",
         "-o", (base / "opt").string()},
    };
    for (const auto& c : commands) {
      std::ostringstream out, err;
      if (cli::run_cli(c, out, err) != cli::kExitOk) {
        ++failed_runs;
        detail += " [" + c[0] + ": " + err.str() + "]";
      }
      write_file((base / (c[0] + ".stdout")).string(), out.str());
    }
  }
  auto a = snapshot(root / "0"), b = snapshot(root / "1");
  for (const auto& [name, contents] : a) {
    ++compared;
    auto it = b.find(name);
    if (it == b.end()) {
      ++mismatched;
      detail += " missing " + name;
      continue;
    }
    // Effective configs echo the output directory, which differs between the
    // two rounds.
    auto strip = [&](std::string s, int r) {
      const std::string from = (root / std::to_string(r)).string();
      for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from)) {
        s.replace(pos, from.size(), "<root>");
      }
      return s;
    };
    if (strip(contents, 0) != strip(it->second, 1)) {
      ++mismatched;
      detail += " differs " + name;
    }
  }
  if (a.size() != b.size()) ++mismatched;
  fs::remove_all(root);
  report(10, failed_runs == 0 && mismatched == 0 && compared >= 15, "determinism",
         fmt("6 commands run twice, %d output files compared, %d differ, %d failed runs%s",
             compared, mismatched, failed_runs, detail.c_str()));
}

}  // namespace

int main() {
  criteria_1_and_2();
  criteria_3_and_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criteria_8_and_9();
  criterion_10();
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
