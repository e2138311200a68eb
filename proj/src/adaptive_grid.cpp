#include "selebi/adaptive_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace selebi {

Eigen::Index shortest_window(Eigen::Index V, double rate, double alpha) {
  if (V < 2) throw std::invalid_argument("window length must be at least 2");
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("compression rate must lie in [0, 1]");
  if (!(alpha >= 1.0)) throw std::invalid_argument("stretch factor must be at least 1");
  const double Vd = static_cast<double>(V);
  const auto S = static_cast<Eigen::Index>(std::floor(Vd - rate * rate * (1.0 - 1.0 / alpha) * Vd));
  return std::max<Eigen::Index>(2, S);
}

IndexVector window_length_vector(const PercussiveEvents& events, Eigen::Index V, Eigen::Index a,
                                 Eigen::Index N, double alpha) {
  if (a <= 0 || N <= 0) throw std::invalid_argument("hop and frame count must be positive");
  IndexVector v = IndexVector::Constant(N, V);
  const Eigen::Index half = (V + 2 * a - 1) / (2 * a);
  for (const auto& e : events) {
    if (e.frame < 0 || e.frame >= N) throw std::invalid_argument("event frame outside the grid");
    const Eigen::Index S = shortest_window(V, e.rate, alpha);
    const Eigen::Index lo = std::max<Eigen::Index>(0, e.frame - half);
    const Eigen::Index hi = std::min<Eigen::Index>(N - 1, e.frame + half);
    for (Eigen::Index n = lo; n <= hi; ++n) {
      const Eigen::Index ramp = 2 * a * std::abs(n - e.frame) + V - 2 * a * half;
      v[n] = std::min(v[n], std::max(S, ramp));
    }
  }
  return v;
}

namespace {

int direction(const IndexVector& v, Eigen::Index n) {
  const Eigen::Index N = v.size();
  const Eigen::Index d = v[(n + 1) % N] - v[n];
  return d > 0 ? 1 : (d < 0 ? -1 : 0);
}

RegionType type_of(int dir) { return dir < 0 ? RegionType::LongToShort : RegionType::ShortToLong; }

}  // namespace

RegionMap segment_regions(const IndexVector& v, Eigen::Index V, const PercussiveEvents& events,
                          double alpha) {
  const Eigen::Index N = v.size();
  if (N == 0) return {};
  std::vector<Eigen::Index> plateaus;
  for (const auto& e : events) plateaus.push_back(shortest_window(V, e.rate, alpha));

  std::vector<int> dir(N);
  bool any = false;
  for (Eigen::Index n = 0; n < N; ++n) any |= (dir[n] = direction(v, n)) != 0;

  std::vector<RegionType> type(N);
  if (!any) {
    std::fill(type.begin(), type.end(), v[0] == V ? RegionType::ConstantLong : RegionType::ConstantShort);
  } else {
    for (Eigen::Index n = 0; n < N; ++n) {
      if (dir[n] != 0) {
        type[n] = type_of(dir[n]);
        continue;
      }
      if (v[n] == V) {
        type[n] = RegionType::ConstantLong;
        continue;
      }
      Eigen::Index back = n, ahead = n;
      while (dir[back] == 0) back = wrap(back - 1, N);
      while (dir[ahead] == 0) ahead = (ahead + 1) % N;
      const bool minimum = dir[back] < 0 && dir[ahead] > 0;
      const bool plateau = std::find(plateaus.begin(), plateaus.end(), v[n]) != plateaus.end();
      type[n] = minimum || plateau ? RegionType::ConstantShort : type_of(dir[back]);
    }
  }

  RegionMap regions;
  for (Eigen::Index n = 0; n < N; ++n) {
    if (regions.empty() || regions.back().type != type[n]) regions.push_back({type[n], n, n + 1, -1});
    else regions.back().end = n + 1;
  }
  for (auto& r : regions)
    for (std::size_t k = 0; k < events.size(); ++k)
      if (events[k].frame >= r.start && events[k].frame < r.end) {
        r.event = static_cast<Eigen::Index>(k);
        break;
      }
  return regions;
}

Eigen::Index adaptive_hop(Eigen::Index S, double alpha, double beta) {
  if (S < 1) throw std::invalid_argument("window length must be positive");
  if (!(alpha >= 1.0)) throw std::invalid_argument("stretch factor must be at least 1");
  if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
  return std::max<Eigen::Index>(1, std::llround(static_cast<double>(S) / (alpha * beta)));
}

Eigen::Index transition_frame_count(Eigen::Index a_st, Eigen::Index a_end, Eigen::Index N_org,
                                    Eigen::Index a) {
  if (a_st < 1 || a_end < 1 || N_org < 1 || a < 1)
    throw std::invalid_argument("hops and frame counts must be positive");
  const double n = 2.0 / static_cast<double>(a_st + a_end) *
                   (static_cast<double>(a * N_org) - static_cast<double>(a_st - a_end) / 2.0);
  const auto N_new = static_cast<Eigen::Index>(std::floor(n + 1e-9));
  if (N_new < 1) throw DegenerateTransition();
  return N_new;
}

Eigen::Index TransitionHops::total() const {
  return std::accumulate(ramp.begin(), ramp.end(), Eigen::Index{0}) +
         std::accumulate(correction.begin(), correction.end(), Eigen::Index{0});
}

TransitionHops transition_hops(Eigen::Index a_st, Eigen::Index a_end, Eigen::Index N_new,
                               Eigen::Index N_org, Eigen::Index a) {
  if (N_new < 1) throw DegenerateTransition();
  const Eigen::Index a_max = std::max(a_st, a_end);
  const Eigen::Index a_min = std::min(a_st, a_end);
  TransitionHops t;
  t.ramp.reserve(N_new);
  for (Eigen::Index l = 1; l <= N_new; ++l) {
    // a_max - l (a_max - a_min) / N_new, floored exactly in integers.
    const Eigen::Index drop = (l * (a_max - a_min) + N_new - 1) / N_new;
    t.ramp.push_back(a_max - drop);
  }
  if (a_st < a_end) std::reverse(t.ramp.begin(), t.ramp.end());
  const Eigen::Index sum = std::accumulate(t.ramp.begin(), t.ramp.end(), Eigen::Index{0});
  const Eigen::Index residual = a * N_org - sum;
  if (residual < 0) throw std::invalid_argument("transition ramp exceeds region duration");
  if (residual / 2 > 0) t.correction.push_back(residual / 2);
  if (residual - residual / 2 > 0) t.correction.push_back(residual - residual / 2);
  return t;
}

TransitionHops plan_transition(Eigen::Index a_st, Eigen::Index a_end, Eigen::Index N_org,
                               Eigen::Index a) {
  Eigen::Index N_new = 0;
  try {
    N_new = transition_frame_count(a_st, a_end, N_org, a);
  } catch (const DegenerateTransition&) {
    return {{a * N_org}, {}};
  }
  for (; N_new >= 1; --N_new) {
    try {
      return transition_hops(a_st, a_end, N_new, N_org, a);
    } catch (const std::invalid_argument&) {
    }
  }
  return {{a * N_org}, {}};
}

namespace {

bool is_short(const RegionMap& regions, std::size_t j) {
  return regions[j].type == RegionType::ConstantShort;
}

// Hop at a region boundary frame b lying between regions `before` and `after`.
Eigen::Index boundary_hop(const IndexVector& v, Eigen::Index b, const RegionMap& regions,
                          std::size_t before, std::size_t after, const AdaptiveGridConfig& cfg) {
  const Eigen::Index N = v.size();
  const Eigen::Index value = v[b % N];
  const Eigen::Index V = cfg.window_length;
  const bool minimum = value < v[wrap(b - 1, N)] && value < v[(b + 1) % N];
  if (is_short(regions, before) || is_short(regions, after) || minimum)
    return adaptive_hop(value, cfg.alpha, cfg.beta);
  if (value == V) return cfg.hop;
  return std::max<Eigen::Index>(1, std::llround(static_cast<double>(cfg.hop * value) / static_cast<double>(V)));
}

Eigen::Index even_length(double x, Eigen::Index floor_value) {
  auto w = static_cast<Eigen::Index>(std::floor(x + 1e-9));
  w -= w % 2;
  return std::max({w, floor_value, Eigen::Index{2}});
}

}  // namespace

AdaptiveGrid build_grid(const IndexVector& v, const RegionMap& regions, const AdaptiveGridConfig& cfg) {
  const Eigen::Index N = v.size();
  const Eigen::Index a = cfg.hop;
  if (N == 0 || regions.empty()) throw std::invalid_argument("empty window length vector");
  if (regions.front().start != 0 || regions.back().end != N)
    throw std::invalid_argument("regions do not cover the grid");
  for (std::size_t j = 1; j < regions.size(); ++j)
    if (regions[j].start != regions[j - 1].end) throw std::invalid_argument("regions are not contiguous");

  AdaptiveGrid out;
  out.v = v;
  out.regions = regions;
  std::vector<Eigen::Index> hops, lengths;
  const std::size_t R = regions.size();
  for (std::size_t j = 0; j < R; ++j) {
    const Region& r = regions[j];
    RegionPlan plan{r, 0, 0, static_cast<Eigen::Index>(hops.size()), {}, {}};
    const Eigen::Index duration = a * r.frames();
    plan.a_st = boundary_hop(v, r.start, regions, (j + R - 1) % R, j, cfg);
    plan.a_end = boundary_hop(v, r.end, regions, j, (j + 1) % R, cfg);
    switch (r.type) {
      case RegionType::ConstantLong:
        plan.hops.assign(r.frames(), a);
        break;
      case RegionType::ConstantShort: {
        const Eigen::Index h = adaptive_hop(v[r.start], cfg.alpha, cfg.beta);
        plan.hops.assign(duration / h, h);
        if (duration % h) {
          plan.corrections.push_back(plan.hops.size());
          plan.hops.push_back(duration % h);
        }
        break;
      }
      case RegionType::LongToShort:
      case RegionType::ShortToLong: {
        const auto t = plan_transition(plan.a_st, plan.a_end, r.frames(), a);
        const bool at_start = v[r.start] < v[r.end % N];
        if (at_start)
          for (auto c : t.correction) {
            plan.corrections.push_back(plan.hops.size());
            plan.hops.push_back(c);
          }
        plan.hops.insert(plan.hops.end(), t.ramp.begin(), t.ramp.end());
        if (!at_start)
          for (auto c : t.correction) {
            plan.corrections.push_back(plan.hops.size());
            plan.hops.push_back(c);
          }
        break;
      }
    }
    Eigen::Index p = r.start * a;
    for (auto h : plan.hops) {
      const Eigen::Index k = p / a;
      const Eigen::Index lo = v[k % N];
      const Eigen::Index hi = v[(k + 1) % N];
      if (p % a == 0) {
        lengths.push_back(lo);
      } else {
        const double t = static_cast<double>(p % a) / static_cast<double>(a);
        lengths.push_back(even_length(static_cast<double>(lo) + t * static_cast<double>(hi - lo), std::min(lo, hi)));
      }
      hops.push_back(h);
      p += h;
    }
    out.plans.push_back(std::move(plan));
  }
  out.grid = NonuniformGrid::make(std::move(hops), std::move(lengths), cfg.channels);
  return out;
}

AdaptiveGrid adaptive_grid(const PercussiveEvents& events, Eigen::Index signal_length,
                           const AdaptiveGridConfig& cfg) {
  if (cfg.hop <= 0 || signal_length % cfg.hop != 0)
    throw std::invalid_argument("hop does not divide signal length");
  const Eigen::Index N = signal_length / cfg.hop;
  const IndexVector v = window_length_vector(events, cfg.window_length, cfg.hop, N, cfg.alpha);
  return build_grid(v, segment_regions(v, cfg.window_length, events, cfg.alpha), cfg);
}

void write_grid_csv(std::ostream& out, const NonuniformGrid& grid) {
  out << "position,hop,window_length\n";
  for (Eigen::Index n = 0; n < grid.frames(); ++n)
    out << grid.positions[n] << ',' << grid.hops[n] << ',' << grid.window_lengths[n] << '\n';
}

}  // namespace selebi
