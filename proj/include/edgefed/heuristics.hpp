#pragma once

// Load-balancer allocation policies. Each one maps an AllocationContext to a
// decision without side effects.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edgefed/model.hpp"
#include "edgefed/stochastic.hpp"

namespace edgefed {

enum class PolicyKind { BestProbability, MinExpectedCompletion, MaxCertainty, NoRedirection };

inline const char* policy_name(PolicyKind p) {
  switch (p) {
    case PolicyKind::BestProbability: return "bp";
    case PolicyKind::MinExpectedCompletion: return "mect";
    case PolicyKind::MaxCertainty: return "mc";
    case PolicyKind::NoRedirection: return "nr";
  }
  return "?";
}

inline std::optional<PolicyKind> parse_policy(std::string_view name) {
  if (name == "bp") return PolicyKind::BestProbability;
  if (name == "mect") return PolicyKind::MinExpectedCompletion;
  if (name == "mc") return PolicyKind::MaxCertainty;
  if (name == "nr") return PolicyKind::NoRedirection;
  return std::nullopt;
}

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::BestProbability, PolicyKind::MaxCertainty,
                                              PolicyKind::MinExpectedCompletion, PolicyKind::NoRedirection};

struct AllocationContext {
  const Task& task;
  StationId receiving_station;
  std::span<const StationId> neighbor_ids;
  const ProfileMatrix& etc;
  const ProfileMatrix& ett;  // owned by the receiving station
  Seconds now;

  Seconds time_remaining() const { return task.deadline - now; }
};

struct PolicyOptions {
  double drop_threshold{1e-9};
  double tie_tolerance{1e-9};
  // Literal reading of the pseudocode: take the first neighbor that beats
  // the receiving station instead of the global best.
  bool first_improvement{false};
};

struct CandidateScore {
  StationId station;
  double score;  // probability (bp), mean (mect) or certainty (mc)
  Seconds sigma;
};

struct AllocationDecision {
  enum class Outcome { Assign, Drop };

  Outcome outcome{Outcome::Assign};
  StationId target{-1};
  double probability{1.0};
  std::vector<CandidateScore> candidate_log;

  bool dropped() const { return outcome == Outcome::Drop; }
};

class AllocationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Station preference on a full tie: the receiving station, then lower id.
inline bool preferred_station(StationId a, StationId b, StationId receiving) {
  if (a == receiving) return b != receiving;
  if (b == receiving) return false;
  return a < b;
}

inline std::vector<StationId> candidates(const AllocationContext& ctx) {
  std::vector<StationId> out;
  out.reserve(ctx.neighbor_ids.size() + 1);
  out.push_back(ctx.receiving_station);
  for (StationId j : ctx.neighbor_ids) {
    if (j == ctx.receiving_station) throw AllocationError("receiving station listed among its own neighbors");
    out.push_back(j);
  }
  std::sort(out.begin() + 1, out.end());
  return out;
}

inline const NormalDist& etc_entry(const AllocationContext& ctx, StationId s) {
  try {
    return ctx.etc.at(ctx.task.type_id, s);
  } catch (const UnknownProfileEntry& e) {
    throw AllocationError(e.what());
  }
}

inline const NormalDist& ett_entry(const AllocationContext& ctx, StationId s) {
  try {
    return ctx.ett.at(ctx.task.type_id, s);
  } catch (const UnknownProfileEntry& e) {
    throw AllocationError(e.what());
  }
}

inline AllocationDecision assign(StationId s, double probability, std::vector<CandidateScore> log) {
  return {AllocationDecision::Outcome::Assign, s, probability, std::move(log)};
}

// Chooses the index with the best score under `better_score`, treating
// scores within tol as equal and then falling back to the station rule.
template <typename Better>
std::size_t pick(const std::vector<CandidateScore>& log, StationId receiving, double tol, Better better_score) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < log.size(); ++i) {
    const auto& c = log[i];
    const auto& b = log[best];
    if (std::abs(c.score - b.score) > tol) {
      if (better_score(c.score, b.score)) best = i;
    } else if (preferred_station(c.station, b.station, receiving)) {
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// Highest probability of meeting the deadline; remote candidates pay the
// convolved transfer delay. Near-equal probabilities go to the tighter
// distribution.
inline AllocationDecision best_probability(const AllocationContext& ctx, const PolicyOptions& opts = {}) {
  const auto stations = detail::candidates(ctx);
  const Seconds remaining = ctx.time_remaining();

  std::vector<CandidateScore> log;
  log.reserve(stations.size());
  for (StationId s : stations) {
    NormalDist d = detail::etc_entry(ctx, s);
    if (s != ctx.receiving_station) d = convolve(d, detail::ett_entry(ctx, s));
    log.push_back({s, prob_meet_deadline(d, remaining).value, d.sigma});
  }

  const double tol = opts.tie_tolerance;
  auto beats = [&](const CandidateScore& c, const CandidateScore& b) {
    if (c.score > b.score + tol) return true;
    if (c.score < b.score - tol) return false;
    if (c.sigma != b.sigma) return c.sigma < b.sigma;
    return detail::preferred_station(c.station, b.station, ctx.receiving_station);
  };

  std::size_t best = 0;
  if (opts.first_improvement) {
    for (std::size_t i = 1; i < log.size(); ++i) {
      if (beats(log[i], log[0])) {
        best = i;
        break;
      }
    }
  } else {
    for (std::size_t i = 1; i < log.size(); ++i) {
      if (beats(log[i], log[best])) best = i;
    }
  }

  const double p = log[best].score;
  if (p < opts.drop_threshold) {
    return {AllocationDecision::Outcome::Drop, -1, 0.0, std::move(log)};
  }
  const StationId target = log[best].station;
  return detail::assign(target, p, std::move(log));
}

// Smallest ETC mean; transfer time is not considered.
inline AllocationDecision mect(const AllocationContext& ctx, const PolicyOptions& opts = {}) {
  const auto stations = detail::candidates(ctx);
  std::vector<CandidateScore> log;
  log.reserve(stations.size());
  for (StationId s : stations) {
    const auto& d = detail::etc_entry(ctx, s);
    log.push_back({s, d.mu, d.sigma});
  }
  const auto best = detail::pick(log, ctx.receiving_station, opts.tie_tolerance,
                                 [](double a, double b) { return a < b; });
  const StationId target = log[best].station;
  return detail::assign(target, 1.0, std::move(log));
}

// Largest certainty, i.e. remaining time minus ETC mean. Never drops, even
// when every certainty is negative.
inline AllocationDecision max_certainty(const AllocationContext& ctx, const PolicyOptions& opts = {}) {
  const auto stations = detail::candidates(ctx);
  const Seconds remaining = ctx.time_remaining();
  std::vector<CandidateScore> log;
  log.reserve(stations.size());
  for (StationId s : stations) {
    const auto& d = detail::etc_entry(ctx, s);
    log.push_back({s, remaining - d.mu, d.sigma});
  }
  const auto best = detail::pick(log, ctx.receiving_station, opts.tie_tolerance,
                                 [](double a, double b) { return a > b; });
  const StationId target = log[best].station;
  return detail::assign(target, 1.0, std::move(log));
}

inline AllocationDecision no_redirection(const AllocationContext& ctx, const PolicyOptions& = {}) {
  return detail::assign(ctx.receiving_station, 1.0, {});
}

inline AllocationDecision allocate(PolicyKind policy, const AllocationContext& ctx, const PolicyOptions& opts = {}) {
  switch (policy) {
    case PolicyKind::BestProbability: return best_probability(ctx, opts);
    case PolicyKind::MinExpectedCompletion: return mect(ctx, opts);
    case PolicyKind::MaxCertainty: return max_certainty(ctx, opts);
    case PolicyKind::NoRedirection: return no_redirection(ctx, opts);
  }
  throw AllocationError("unknown policy");
}

}  // namespace edgefed
