#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace shbuf {

inline constexpr std::size_t kFeatureCount = 4;

// Per-arrival predictor input. Order of as_array() is the on-disk column
// order of training data and the feature index used by decision trees.
struct FeatureVector {
  std::uint32_t queue_len = 0;
  double queue_len_ewma = 0.0;
  std::uint32_t occupancy = 0;
  double occupancy_ewma = 0.0;

  std::array<double, kFeatureCount> as_array() const {
    return {static_cast<double>(queue_len), queue_len_ewma,
            static_cast<double>(occupancy), occupancy_ewma};
  }

  bool operator==(const FeatureVector&) const = default;
};

// Exponentially weighted moving averages of queue length (per port) and
// buffer occupancy, advanced once per arrival.
class FeatureTracker {
 public:
  FeatureTracker(std::uint32_t num_ports, std::uint32_t window);

  // Advances the averages with the pre-decision values and returns the
  // resulting feature vector for this arrival.
  FeatureVector observe(std::uint32_t port, std::uint32_t queue_len,
                        std::uint32_t occupancy);

  double weight() const { return weight_; }

 private:
  double weight_;
  std::vector<double> queue_ewma_;
  double occupancy_ewma_ = 0.0;
};

}  // namespace shbuf
