#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's numerics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "edgefed/heuristics.hpp"
#include "edgefed/stochastic.hpp"

namespace oracle {

inline double gauss_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b].
template <typename F>
double integrate(F f, double a, double b, double tol = 1e-14) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return detail::adaptive(f, a, b, fa, fm, fb, detail::simpson(a, b, fa, fm, fb), tol, 60);
}

// Upper tail of the standard normal beyond t >= 0.
inline double upper_tail(double t) { return integrate(gauss_density, t, t + 40.0); }

// Phi(z) by quadrature, integrating whichever tail is small.
inline double phi(double z) { return z < 0.0 ? upper_tail(-z) : 1.0 - upper_tail(z); }

inline double prob(const edgefed::NormalDist& d, double remaining) {
  if (d.sigma > 0.0) return phi((remaining - d.mu) / d.sigma);
  return remaining > d.mu ? 1.0 : 0.0;
}

// Enumerate every candidate, score it by quadrature, keep the best under
// the documented tie rules. Returns -1 for a drop.
inline edgefed::StationId best_probability(const edgefed::AllocationContext& ctx, double drop_threshold = 1e-9,
                                           double tol = 1e-9) {
  struct Cand {
    edgefed::StationId id;
    double p;
    double sigma;
  };
  std::vector<Cand> all;
  const double remaining = ctx.task.deadline - ctx.now;
  {
    const auto d = ctx.etc.at(ctx.task.type_id, ctx.receiving_station);
    all.push_back({ctx.receiving_station, prob(d, remaining), d.sigma});
  }
  for (auto j : ctx.neighbor_ids) {
    const auto c = ctx.etc.at(ctx.task.type_id, j);
    const auto t = ctx.ett.at(ctx.task.type_id, j);
    const edgefed::NormalDist d{c.mu + t.mu, std::sqrt(c.sigma * c.sigma + t.sigma * t.sigma)};
    all.push_back({j, prob(d, remaining), d.sigma});
  }
  auto rank = [&](const Cand& c) {
    // receiving first, then ascending id
    return c.id == ctx.receiving_station ? -1 : c.id;
  };
  Cand best = all.front();
  for (const auto& c : all) {
    bool take;
    if (c.p > best.p + tol) take = true;
    else if (c.p < best.p - tol) take = false;
    else if (c.sigma != best.sigma) take = c.sigma < best.sigma;
    else take = rank(c) < rank(best);
    if (take) best = c;
  }
  return best.p < drop_threshold ? -1 : best.id;
}

// A random allocation problem with its own storage.
struct RandomContext {
  edgefed::Task task;
  edgefed::StationId receiving;
  std::vector<edgefed::StationId> neighbors;
  edgefed::ProfileMatrix etc{edgefed::ProfileKind::ETC};
  edgefed::ProfileMatrix ett{edgefed::ProfileKind::ETT};
  double now{0.0};

  edgefed::AllocationContext view() const { return {task, receiving, neighbors, etc, ett, now}; }
};

// Up to 14 neighbors with means in (0.1, 30) s. Some entries are copied
// from another candidate so that exact ties occur.
inline RandomContext random_context(std::mt19937_64& rng, double scale = 1.0) {
  RandomContext c;
  std::uniform_int_distribution<int> n_nb(0, 14);
  std::uniform_real_distribution<double> mu(0.1, 30.0), sig(0.0, 5.0), rem(-5.0, 40.0), unit(0.0, 1.0);
  c.task.type_id = 0;
  c.receiving = static_cast<edgefed::StationId>(std::uniform_int_distribution<int>(0, 15)(rng));
  std::vector<edgefed::StationId> pool;
  for (int i = 0; i < 16; ++i) {
    if (i != c.receiving) pool.push_back(i);
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(n_nb(rng)));
  c.neighbors = pool;

  auto draw = [&] {
    double s = sig(rng);
    if (unit(rng) < 0.05) s = 0.0;
    return edgefed::NormalDist{mu(rng) * scale, s * scale};
  };
  edgefed::NormalDist last_etc = draw(), last_ett{2.0 * scale, 0.1 * scale};
  c.etc.bootstrap(0, c.receiving, last_etc);
  for (auto j : c.neighbors) {
    edgefed::NormalDist e = unit(rng) < 0.15 ? last_etc : draw();
    edgefed::NormalDist t = unit(rng) < 0.15 ? last_ett : edgefed::NormalDist{mu(rng) * 0.2 * scale, sig(rng) * 0.2 * scale};
    c.etc.bootstrap(0, j, e);
    c.ett.bootstrap(0, j, t);
    last_etc = e;
    last_ett = t;
  }
  c.now = 100.0 * scale;
  c.task.deadline = c.now + rem(rng) * scale;
  return c;
}

// Same problem with every time quantity multiplied by k.
inline RandomContext rescaled(const RandomContext& src, double k) {
  RandomContext c;
  c.task = src.task;
  c.receiving = src.receiving;
  c.neighbors = src.neighbors;
  c.now = src.now * k;
  c.task.deadline = c.now + (src.task.deadline - src.now) * k;
  src.etc.for_each([&](const auto& key, const edgefed::NormalDist& d, const std::deque<double>&) {
    c.etc.bootstrap(key.type, key.station, {d.mu * k, d.sigma * k});
  });
  src.ett.for_each([&](const auto& key, const edgefed::NormalDist& d, const std::deque<double>&) {
    c.ett.bootstrap(key.type, key.station, {d.mu * k, d.sigma * k});
  });
  return c;
}

}  // namespace oracle
