#pragma once

// Gaussian delay models and the per-(task type, station) profile matrices
// that the load balancers consult.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace edgefed {

using Seconds = double;
using StationId = std::int32_t;
using TaskTypeId = std::int32_t;

// Delay model N(mu, sigma^2), both in seconds.
struct NormalDist {
  Seconds mu{0.0};
  Seconds sigma{0.0};

  bool valid() const { return std::isfinite(mu) && std::isfinite(sigma) && sigma >= 0.0; }

  friend bool operator==(const NormalDist&, const NormalDist&) = default;
};

// Distribution of the sum of two independent normals.
inline NormalDist convolve(const NormalDist& a, const NormalDist& b) {
  return {a.mu + b.mu, std::hypot(a.sigma, b.sigma)};
}

// Phi(z). erfc keeps full relative precision in the lower tail.
inline double standard_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

struct DeadlineProbability {
  double value{0.0};
  NormalDist source_dist{};
};

// P(X < time_remaining) for X ~ dist. A zero-sigma dist is a step at mu.
inline DeadlineProbability prob_meet_deadline(const NormalDist& dist, Seconds time_remaining) {
  if (dist.sigma > 0.0) {
    return {standard_normal_cdf((time_remaining - dist.mu) / dist.sigma), dist};
  }
  return {time_remaining > dist.mu ? 1.0 : 0.0, dist};
}

// Sample mean and (n-1) standard deviation, two-pass.
inline NormalDist sample_statistics(const std::deque<Seconds>& xs) {
  const auto n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

enum class ProfileKind { ETC, ETT };

inline const char* to_string(ProfileKind k) { return k == ProfileKind::ETC ? "ETC" : "ETT"; }

class UnknownProfileEntry : public std::out_of_range {
 public:
  UnknownProfileEntry(ProfileKind kind, TaskTypeId type, StationId station)
      : std::out_of_range(std::string(to_string(kind)) + " has no entry for task type " +
                          std::to_string(type) + " at station " + std::to_string(station)) {}
};

// ETC / ETT matrix. Rows are task types, columns are stations (ETC) or
// neighbors of the owning station (ETT). Published entries only move on
// refresh(); record_sample() just buffers.
class ProfileMatrix {
 public:
  struct Key {
    TaskTypeId type;
    StationId station;
    friend auto operator<=>(const Key&, const Key&) = default;
  };

  explicit ProfileMatrix(ProfileKind kind = ProfileKind::ETC, std::size_t history_window = 0)
      : kind_(kind), window_(history_window) {}

  ProfileKind kind() const { return kind_; }
  std::size_t history_window() const { return window_; }

  // Installs the prior for a pair; any existing history for it is discarded.
  void bootstrap(TaskTypeId type, StationId station, NormalDist prior) {
    if (!prior.valid()) throw std::invalid_argument("invalid bootstrap prior");
    cells_[{type, station}] = Cell{prior, {}};
  }

  bool contains(TaskTypeId type, StationId station) const {
    return cells_.find({type, station}) != cells_.end();
  }

  const NormalDist& at(TaskTypeId type, StationId station) const { return cell(type, station).published; }

  const std::deque<Seconds>& samples(TaskTypeId type, StationId station) const {
    return cell(type, station).buffer;
  }

  void record_sample(TaskTypeId type, StationId station, Seconds duration) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
      throw std::invalid_argument("profile sample must be a finite non-negative duration");
    }
    auto& c = cell(type, station);
    c.buffer.push_back(duration);
    if (window_ > 0 && c.buffer.size() > window_) c.buffer.pop_front();
  }

  void refresh() {
    for (auto& [key, c] : cells_) {
      if (c.buffer.size() >= 2) c.published = sample_statistics(c.buffer);
    }
  }

  std::size_t size() const { return cells_.size(); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [key, c] : cells_) fn(key, c.published, c.buffer);
  }

 private:
  struct Cell {
    NormalDist published;
    std::deque<Seconds> buffer;
  };

  const Cell& cell(TaskTypeId type, StationId station) const {
    auto it = cells_.find({type, station});
    if (it == cells_.end()) throw UnknownProfileEntry(kind_, type, station);
    return it->second;
  }
  Cell& cell(TaskTypeId type, StationId station) {
    auto it = cells_.find({type, station});
    if (it == cells_.end()) throw UnknownProfileEntry(kind_, type, station);
    return it->second;
  }

  ProfileKind kind_;
  std::size_t window_;
  std::map<Key, Cell> cells_;
};

}  // namespace edgefed
