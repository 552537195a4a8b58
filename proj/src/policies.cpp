#include "shbuf/policies.hpp"

#include <algorithm>
#include <charconv>

namespace shbuf {
namespace {

std::int64_t parse_int(std::string_view s, const std::string& whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("not a rational number: '" + whole + "'");
  }
  return v;
}

}  // namespace

Rational Rational::parse(const std::string& text) {
  std::string_view s(text);
  Rational r;
  auto slash = s.find('/');
  if (slash == std::string_view::npos) {
    r = {parse_int(s, text), 1};
  } else {
    r = {parse_int(s.substr(0, slash), text), parse_int(s.substr(slash + 1), text)};
  }
  if (r.den <= 0) throw ValidationError("rational denominator must be positive");
  return r;
}

std::string Rational::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

Decision CompleteSharing::on_arrival(const ArrivalContext&, const SwitchState& state) {
  return state.occupancy < state.buffer_size ? Decision::accept() : Decision::drop();
}

DynamicThresholds::DynamicThresholds(Rational alpha) : alpha_(alpha) {
  if (alpha_.num <= 0 || alpha_.den <= 0) {
    throw ValidationError("dt_alpha must be positive");
  }
}

Decision DynamicThresholds::on_arrival(const ArrivalContext& ctx,
                                       const SwitchState& state) {
  if (state.occupancy >= state.buffer_size) return Decision::drop();
  // q < (num/den) * (B - Q)  <=>  q * den < num * (B - Q)
  const std::int64_t q = state.queue_len[ctx.port];
  const std::int64_t free_space = state.buffer_size - state.occupancy;
  return q * alpha_.den < alpha_.num * free_space ? Decision::accept()
                                                  : Decision::drop();
}

Decision LongestQueueDrop::on_arrival(const ArrivalContext& ctx,
                                      const SwitchState& state) {
  if (state.occupancy < state.buffer_size) return Decision::accept();
  PortId victim = state.longest_queue();
  if (victim == ctx.port) return Decision::drop();
  return Decision::push_out(victim);
}

ThresholdState::ThresholdState(const SwitchConfig& config)
    : buffer_size_(config.buffer_size), thresholds_(config.num_ports, 0) {}

PortId ThresholdState::largest() const {
  auto it = std::max_element(thresholds_.begin(), thresholds_.end());
  return static_cast<PortId>(std::distance(thresholds_.begin(), it));
}

void ThresholdState::on_arrival(PortId port) {
  if (sum_ == buffer_size_) {
    // Decrement first, even when port itself holds the largest threshold; the
    // pair is then a no-op, mirroring LQD dropping the arrival.
    --thresholds_[largest()];
    ++thresholds_.at(port);
  } else {
    ++thresholds_.at(port);
    ++sum_;
  }
}

void ThresholdState::on_departure(PortId port) {
  if (thresholds_.at(port) > 0) {
    --thresholds_[port];
    --sum_;
  }
}

void FollowLqd::reset(const SwitchConfig& config) { thresholds_ = ThresholdState(config); }

Decision FollowLqd::on_arrival(const ArrivalContext& ctx, const SwitchState& state) {
  thresholds_.on_arrival(ctx.port);
  if (state.queue_len[ctx.port] < thresholds_.at(ctx.port) &&
      state.occupancy < state.buffer_size) {
    return Decision::accept();
  }
  return Decision::drop();
}

void FollowLqd::on_departure(PortId port, const SwitchState&) {
  thresholds_.on_departure(port);
}

Credence::Credence(std::shared_ptr<const Oracle> oracle, Decision fallback)
    : oracle_(std::move(oracle)), fallback_(fallback) {
  if (!oracle_) throw std::invalid_argument("credence needs an oracle");
  if (fallback_.kind == Decision::Kind::AcceptWithPushout) {
    throw std::invalid_argument("credence is drop-tail; fallback cannot push out");
  }
}

void Credence::reset(const SwitchConfig& config) {
  thresholds_ = ThresholdState(config);
  stats_ = {};
}

Decision Credence::on_arrival(const ArrivalContext& ctx, const SwitchState& state) {
  thresholds_.on_arrival(ctx.port);

  // Safeguard: longest queue below B/N, i.e. q_max * N < B.
  const std::uint64_t longest = state.queue_len[state.longest_queue()];
  if (longest * state.num_ports() < state.buffer_size) {
    ++stats_.safeguard_accepts;
    return Decision::accept();
  }

  if (state.queue_len[ctx.port] < thresholds_.at(ctx.port)) {
    if (state.occupancy < state.buffer_size) {
      ++stats_.oracle_queries;
      PredictionLabel label;
      try {
        label = oracle_->predict(ctx);
      } catch (const OracleUnavailable&) {
        ++stats_.oracle_failures;
        if (fallback_.kind == Decision::Kind::Drop) return Decision::drop();
        return Decision::accept();
      }
      if (label == PredictionLabel::Positive) {
        ++stats_.predicted_drops;
        return Decision::drop();
      }
      return Decision::accept();
    }
    return Decision::drop();
  }
  ++stats_.threshold_drops;
  return Decision::drop();
}

void Credence::on_departure(PortId port, const SwitchState&) {
  thresholds_.on_departure(port);
}

}  // namespace shbuf
