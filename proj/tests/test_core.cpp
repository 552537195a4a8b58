#include <doctest.h>

#include <random>

#include "shbuf/core.hpp"
#include "shbuf/policies.hpp"
#include "shbuf/workloads.hpp"
#include "support.hpp"

using namespace shbuf;

namespace {

// Drop-tail policy that always accepts, even when the buffer is full.
class Greedy final : public Policy {
 public:
  void reset(const SwitchConfig&) override {}
  Decision on_arrival(const ArrivalContext&, const SwitchState&) override {
    return Decision::accept();
  }
  std::string_view name() const override { return "greedy"; }
};

class BadPushout final : public Policy {
 public:
  explicit BadPushout(bool preemptive) : preemptive_(preemptive) {}
  void reset(const SwitchConfig&) override {}
  Decision on_arrival(const ArrivalContext&, const SwitchState& s) override {
    if (s.occupancy < s.buffer_size) return Decision::accept();
    return Decision::push_out(1);  // queue 1 is always empty below
  }
  bool preemptive() const override { return preemptive_; }
  std::string_view name() const override { return "bad"; }

 private:
  bool preemptive_;
};

}  // namespace

TEST_CASE("switch config validation") {
  CHECK_NOTHROW(SwitchConfig{1, 1}.validate());
  CHECK_THROWS_AS((SwitchConfig{0, 4}.validate()), ValidationError);
  CHECK_THROWS_AS((SwitchConfig{4, 0}.validate()), ValidationError);
  // B < N is allowed.
  CHECK_NOTHROW(SwitchConfig{8, 2}.validate());
}

TEST_CASE("arrival sequence validation") {
  SwitchConfig cfg{2, 4};
  ArrivalSequence ok{{{0, 1}, {}, {1}}};
  CHECK_NOTHROW(ok.validate(cfg));
  CHECK(ok.packet_count() == 3);
  CHECK_THROWS_AS((ArrivalSequence{{{0, 1, 0}}}.validate(cfg)), ValidationError);
  CHECK_THROWS_AS(ArrivalSequence{{{2}}}.validate(cfg), ValidationError);
}

TEST_CASE("packet index is dense arrival order") {
  ArrivalSequence seq{{{0, 1}, {}, {1}, {0, 0}}};
  PacketIndex idx(seq);
  CHECK(idx.size() == 5);
  CHECK(idx.flat({0, 0}) == 0);
  CHECK(idx.flat({0, 1}) == 1);
  CHECK(idx.flat({2, 0}) == 2);
  CHECK(idx.flat({3, 1}) == 4);
  for (std::size_t i = 0; i < idx.size(); ++i) CHECK(idx.flat(idx.id_at(i)) == i);
  CHECK_FALSE(idx.contains({1, 0}));
  CHECK_THROWS_AS(idx.flat({1, 0}), std::out_of_range);
  CHECK_THROWS_AS(idx.id_at(5), std::out_of_range);
}

TEST_CASE("complete sharing on a single burst") {
  // 16 packets to port 0 at 4 per slot: queue grows by 3 per slot.
  SwitchConfig cfg{4, 16};
  CompleteSharing cs;
  RunResult r = run_simulation(cfg, gen_single_burst(cfg, 16), cs);
  CHECK(r.transmitted == 16);
  CHECK(r.dropped == 0);
  CHECK(r.peak_occupancy == 13);
  REQUIRE(r.occupancy_series.size() >= 4);
  CHECK(r.occupancy_series[0] == 4);
  CHECK(r.occupancy_series[1] == 7);
  // Buffer drains after the last arrival slot.
  CHECK(r.occupancy_series.size() == 4 + 12);
}

TEST_CASE("full buffer drops under complete sharing") {
  SwitchConfig cfg{2, 2};
  CompleteSharing cs;
  RunResult r = run_simulation(cfg, ArrivalSequence{{{0, 0}, {1, 1}}}, cs);
  // Slot 0 fills to 2, drains to 1; slot 1 accepts one of two.
  CHECK(r.transmitted == 3);
  CHECK(r.dropped == 1);
  CHECK(r.outcomes[3].verdict == Verdict::DroppedOnArrival);
  CHECK(r.outcomes[3].packet == PacketId{1, 1});
}

TEST_CASE("departures are FIFO per port, ascending port order") {
  SwitchConfig cfg{3, 8};
  CompleteSharing cs;
  Simulator sim(cfg, cs);
  sim.begin_slot();
  sim.arrive(2);
  sim.arrive(0);
  sim.arrive(2);
  auto sent = sim.depart();
  REQUIRE(sent.size() == 2);
  CHECK(sent[0] == PacketId{0, 1});
  CHECK(sent[1] == PacketId{0, 0});
  sim.begin_slot();
  sent = sim.depart();
  REQUIRE(sent.size() == 1);
  CHECK(sent[0] == PacketId{0, 2});
  CHECK(sim.buffer_empty());
}

TEST_CASE("empty sequence") {
  SwitchConfig cfg{4, 8};
  LongestQueueDrop lqd;
  RunResult r = run_simulation(cfg, ArrivalSequence{}, lqd);
  CHECK(r.transmitted == 0);
  CHECK(r.dropped == 0);
  CHECK(r.outcomes.empty());
}

TEST_CASE("degenerate buffer smaller than port count") {
  SwitchConfig cfg{4, 2};
  CompleteSharing cs;
  RunResult r = run_simulation(cfg, ArrivalSequence{{{0, 1, 2, 3}}}, cs);
  CHECK(r.transmitted == 2);
  CHECK(r.dropped == 2);
}

TEST_CASE("simulator rejects rule-breaking policies") {
  SwitchConfig cfg{2, 2};
  Greedy greedy;
  CHECK_THROWS_AS(run_simulation(cfg, ArrivalSequence{{{0, 0}, {0, 0}}}, greedy),
                  std::logic_error);

  BadPushout drop_tail(false);
  CHECK_THROWS_AS(run_simulation(cfg, ArrivalSequence{{{0, 0}, {0, 0}}}, drop_tail),
                  std::logic_error);
  BadPushout empty_victim(true);
  CHECK_THROWS_AS(run_simulation(cfg, ArrivalSequence{{{0, 0}, {0, 0}}}, empty_victim),
                  std::logic_error);
}

TEST_CASE("step API misuse") {
  SwitchConfig cfg{2, 4};
  CompleteSharing cs;
  Simulator sim(cfg, cs);
  CHECK_THROWS_AS(sim.arrive(0), std::logic_error);
  CHECK_THROWS_AS(sim.depart(), std::logic_error);
  sim.begin_slot();
  CHECK_THROWS_AS(sim.begin_slot(), std::logic_error);
  CHECK_THROWS_AS(sim.arrive(5), ValidationError);
  sim.arrive(0);
  sim.arrive(1);
  CHECK_THROWS_AS(sim.arrive(0), ValidationError);
}

TEST_CASE("pushed-out packets are reported") {
  SwitchConfig cfg{2, 2};
  LongestQueueDrop lqd;
  // Slot 0 fills queue 0 with 2; after one departure queue 0 holds 1 and the
  // buffer has a free slot. Slot 1: port 1 arrives (accepted), then port 1
  // again: full, longest is queue 0 (tie 1/1 -> lowest index) -> push out.
  RunResult r = run_simulation(cfg, ArrivalSequence{{{0, 0}, {1, 1}}}, lqd);
  CHECK(r.outcomes[1].verdict == Verdict::PushedOut);
  CHECK(r.outcomes[3].verdict == Verdict::Transmitted);
  CHECK(r.transmitted + r.dropped == 4);
  CHECK(to_string(Verdict::PushedOut) == "pushed_out");
}

TEST_CASE("conservation and bounds on random traffic") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    std::uint32_t n = 1 + static_cast<std::uint32_t>(rng() % 6);
    SwitchConfig cfg{n, 1 + static_cast<std::uint32_t>(rng() % 12)};
    ArrivalSequence seq = testing::random_sequence(rng, n, 40);
    CompleteSharing cs;
    LongestQueueDrop lqd;
    for (Policy* p : {static_cast<Policy*>(&cs), static_cast<Policy*>(&lqd)}) {
      RunResult r = run_simulation(cfg, seq, *p);
      CHECK(r.transmitted + r.dropped == seq.packet_count());
      CHECK(r.peak_occupancy <= cfg.buffer_size);
      CHECK(r.outcomes.size() == seq.packet_count());
    }
  }
}

TEST_CASE("features: EWMA follows the arrival stream") {
  FeatureTracker t(2, 3);
  CHECK(t.weight() == doctest::Approx(0.5));
  auto f = t.observe(0, 4, 4);
  CHECK(f.queue_len == 4);
  CHECK(f.queue_len_ewma == doctest::Approx(2.0));
  CHECK(f.occupancy_ewma == doctest::Approx(2.0));
  f = t.observe(1, 0, 4);
  CHECK(f.queue_len_ewma == doctest::Approx(0.0));
  CHECK(f.occupancy_ewma == doctest::Approx(3.0));
  CHECK_THROWS_AS(FeatureTracker(2, 0), ValidationError);
}
