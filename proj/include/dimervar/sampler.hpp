#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"

namespace dimervar {

/// SplitMix64 finalizer; used in counter mode so that the coin for any
/// (seed, sample, time, site) can be regenerated on demand.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct CounterRng {
  std::uint64_t seed = 0;

  std::uint64_t operator()(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return splitmix64(h ^ c);
  }
  static constexpr const char* name() { return "splitmix64-counter"; }
};

struct ChainState {
  HeightFunction height;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

/// Raise v by 4 if it is a strict local minimum (up) or lower it by 4 if it
/// is a strict local maximum (down). Boundary vertices never move.
inline bool glauber_step(const Region& region, HeightFunction& h, int v, bool up) {
  if (v < 0 || v >= static_cast<int>(h.values.size()) || !region.is_interior(v)) return false;
  const auto& nb = region.neighbours(v);
  int lo = h[nb[0]], hi = h[nb[0]];
  for (int k = 1; k < 4; ++k) lo = std::min(lo, h[nb[k]]), hi = std::max(hi, h[nb[k]]);
  if (up && lo > h[v]) {
    h.values[v] += 4;
    return true;
  }
  if (!up && hi < h[v]) {
    h.values[v] -= 4;
    return true;
  }
  return false;
}

inline ChainState glauber_step(const Region& region, ChainState state, int v, bool up) {
  glauber_step(region, state.height, v, up);
  ++state.step;
  return state;
}

/// One random-site update driven by the state's own counter.
inline ChainState random_glauber_step(const Region& region, ChainState state) {
  const std::uint64_t r = CounterRng{state.seed}(state.step);
  const int v = static_cast<int>((r >> 1) % region.vertices().size());
  return glauber_step(region, std::move(state), v, (r & 1) != 0);
}

struct CftpOptions {
  std::uint64_t initial_sweeps = 16;
  std::uint64_t max_updates = std::uint64_t{1} << 30;  // per chain, summed over the last epoch
};

struct CftpResult {
  HeightFunction height;
  Tiling tiling;
  std::uint64_t sweeps = 0;  // length of the successful epoch
  int epochs = 0;
};

/// Systematic-scan heat-bath chain. A time step updates every interior site
/// of one colour and then the other; each site draws an up/down coin from
/// the counter generator. Sites are stored per colour in compressed rows so
/// that the inner loop is contiguous.
class SweepChain {
 public:
  struct State {
    std::array<std::vector<int>, 2> h;
    bool operator==(const State&) const = default;
  };

  explicit SweepChain(const Region& region) : region_(&region) {
    Wp_ = region.width() + 3;
    Hp_ = region.height() + 3;
    Wc_ = Wp_ / 2 + 2;
    off_ = ((region.xmin() - 1 + region.ymin() - 1) % 2 + 2) % 2;
    for (int c = 0; c < 2; ++c) {
      mask_[c].assign(static_cast<std::size_t>(Wc_) * Hp_, 0);
      index_[c].assign(mask_[c].size(), -1);
    }
    for (std::size_t i = 0; i < region.vertices().size(); ++i) {
      const auto p = region.vertices()[i];
      const int X = p.x - region.xmin() + 1, Y = p.y - region.ymin() + 1;
      const int c = (X + Y + off_) & 1;
      const std::size_t at = static_cast<std::size_t>(Y) * Wc_ + X / 2 + 1;
      index_[c][at] = static_cast<int>(i);
      pos_.push_back({c, static_cast<int>(at)});
      if (region.is_interior(static_cast<int>(i))) mask_[c][at] = -1, ++interior_;
    }
    for (int c = 0; c < 2; ++c) {
      span_[c].assign(static_cast<std::size_t>(Hp_), {Wc_, 0});
      for (int Y = 0; Y < Hp_; ++Y)
        for (int k = 0; k < Wc_; ++k)
          if (mask_[c][static_cast<std::size_t>(Y) * Wc_ + k]) {
            span_[c][Y].first = std::min(span_[c][Y].first, k);
            span_[c][Y].second = std::max(span_[c][Y].second, k + 1);
          }
    }
  }

  std::size_t interior_count() const { return interior_; }

  /// Colour class of vertex v: sites of colour 0 are updated first in a step.
  int colour(int v) const { return pos_[v].first; }

  /// The up (true) or down coin that vertex v receives at time t.
  bool site_coin(const CounterRng& rng, std::uint64_t sample, std::int64_t t, int v) const {
    const auto [c, at] = pos_[v];
    const int words = (Wc_ + 63) / 64;
    const int Y = at / Wc_, k = at % Wc_;
    const std::uint64_t tick = static_cast<std::uint64_t>(t) * 2 + static_cast<std::uint64_t>(c);
    return (rng(sample, tick, static_cast<std::uint64_t>(Y) * words + (k >> 6)) >> (k & 63)) & 1;
  }

  State load(const HeightFunction& h) const {
    State s;
    for (int c = 0; c < 2; ++c) {
      s.h[c].assign(index_[c].size(), 0);
      for (std::size_t g = 0; g < index_[c].size(); ++g)
        if (index_[c][g] >= 0) s.h[c][g] = h[index_[c][g]];
    }
    return s;
  }

  HeightFunction store(const State& s) const {
    HeightFunction h;
    h.values.resize(region_->vertices().size());
    for (int c = 0; c < 2; ++c)
      for (std::size_t g = 0; g < index_[c].size(); ++g)
        if (index_[c][g] >= 0) h.values[index_[c][g]] = s.h[c][g];
    return h;
  }

  /// Applies the time-t sweep to each state in `states` with shared coins.
  void sweep(const CounterRng& rng, std::uint64_t sample, std::int64_t t, State* const* states, int count) const {
    const int words = (Wc_ + 63) / 64;
    std::vector<std::uint64_t> coins(static_cast<std::size_t>(words));
    std::vector<int> upmask(static_cast<std::size_t>(Wc_));
    for (int c = 0; c < 2; ++c) {
      const std::uint64_t tick = static_cast<std::uint64_t>(t) * 2 + static_cast<std::uint64_t>(c);
      for (int Y = 1; Y + 1 < Hp_; ++Y) {
        const auto [k0, k1] = span_[c][Y];
        if (k0 >= k1) continue;
        const int* __restrict M = mask_[c].data() + static_cast<std::size_t>(Y) * Wc_;
        // Compressed site k of this row sits at X = 2(k - 1) + s.
        const int s = (c + Y + off_) & 1;
        const int dl = s ? 0 : -1, dr = s ? 1 : 0;
        for (int q = 0; q < words; ++q) coins[q] = rng(sample, tick, static_cast<std::uint64_t>(Y) * words + q);
        for (int k = k0; k < k1; ++k) upmask[k] = -static_cast<int>((coins[k >> 6] >> (k & 63)) & 1);
        const int* __restrict U = upmask.data();
        for (int n = 0; n < count; ++n) {
          int* __restrict G = states[n]->h[c].data() + static_cast<std::size_t>(Y) * Wc_;
          const int* __restrict O = states[n]->h[1 - c].data() + static_cast<std::size_t>(Y) * Wc_;
          const int* __restrict Up = O + Wc_;
          const int* __restrict Dn = O - Wc_;
          for (int k = k0; k < k1; ++k) {
            const int h = G[k];
            const int e = O[k + dr], w = O[k + dl], nn = Up[k], so = Dn[k];
            const int lo = std::min(std::min(e, w), std::min(nn, so));
            const int hi = std::max(std::max(e, w), std::max(nn, so));
            const int inc = U[k] & -static_cast<int>(lo > h) & 4;
            const int dec = ~U[k] & -static_cast<int>(hi < h) & 4;
            G[k] = h + ((inc - dec) & M[k]);
          }
        }
      }
    }
  }

 private:
  const Region* region_;
  int Wp_ = 0, Hp_ = 0, Wc_ = 0, off_ = 0;
  std::size_t interior_ = 0;
  std::array<std::vector<int>, 2> mask_, index_;
  std::vector<std::pair<int, int>> pos_;  // vertex -> (colour, compressed slot)
  std::array<std::vector<std::pair<int, int>>, 2> span_;  // interior range per compressed row
};

/// Exact uniform sample by coupling from the past: chains started at
/// H_min and H_max at time -T share coins; T doubles until they agree at 0.
inline CftpResult cftp_sample(const Region& region, std::uint64_t seed, std::uint64_t sample = 0,
                              const CftpOptions& opt = {}) {
  if (!tileable(region)) throw InvalidRegion("region has no tilings");
  auto [hmin, hmax] = min_max_extensions(region);
  SweepChain chain(region);
  const CounterRng rng{seed};
  const std::uint64_t per_sweep = std::max<std::uint64_t>(1, chain.interior_count());
  SweepChain::State top, bot;
  CftpResult res;
  if (hmin == hmax) {
    res.height = hmin;
    res.tiling = height_to_tiling(region, hmin);
    return res;
  }
  for (std::uint64_t T = std::max<std::uint64_t>(1, opt.initial_sweeps);; T *= 2) {
    if (T * per_sweep > opt.max_updates)
      throw NonCoalescence("chains did not coalesce within " + std::to_string(opt.max_updates) + " updates");
    ++res.epochs;
    top = chain.load(hmax);
    bot = chain.load(hmin);
    SweepChain::State* both[2] = {&top, &bot};
    bool merged = false;
    for (std::int64_t t = -static_cast<std::int64_t>(T); t < 0; ++t) {
      if (!merged) {
        chain.sweep(rng, sample, t, both, 2);
        if ((t & 15) == 0 && top == bot) merged = true;
      } else {
        chain.sweep(rng, sample, t, both, 1);
      }
    }
    if (merged || top == bot) {
      res.height = chain.store(top);
      res.tiling = height_to_tiling(region, res.height);
      res.sweeps = T;
      return res;
    }
  }
}

/// Independent samples (seed, index) on up to `threads` worker threads.
inline std::vector<CftpResult> cftp_samples(const Region& region, std::uint64_t seed, std::size_t count,
                                            unsigned threads = 1, const CftpOptions& opt = {}) {
  std::vector<CftpResult> out(count);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, count))));
  std::size_t next = 0;
  std::mutex mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lk(mu);
        if (next >= count || err) return;
        i = next++;
      }
      try {
        out[i] = cftp_sample(region, seed, i, opt);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return out;
}

/// Class frequencies of the cells inside one m x m window.
struct WindowDensity {
  Cell origin;  // lower-left cell of the window
  int cells = 0;
  std::array<double, 4> freq{};  // a, b, c, d
};

struct DensityMap {
  int m = 0;
  std::vector<WindowDensity> windows;
};

inline WindowDensity window_density(const Region& region, const std::vector<Tiling>& tilings, Cell origin, int m) {
  if (tilings.empty()) throw InvalidTiling("at least one sample is required");
  if (m < 1) throw InvalidRegion("window size must be positive");
  WindowDensity wd;
  wd.origin = origin;
  std::array<double, 4> cnt{};
  for (const auto& t : tilings)
    for (const auto& dm : t.dominos)
      for (Cell c : {dm.cell1, dm.cell2})
        if (c.x >= origin.x && c.x < origin.x + m && c.y >= origin.y && c.y < origin.y + m)
          cnt[static_cast<int>(dm.cls)] += 1;
  const double total = cnt[0] + cnt[1] + cnt[2] + cnt[3];
  for (Cell c : region.cells())
    if (c.x >= origin.x && c.x < origin.x + m && c.y >= origin.y && c.y < origin.y + m) ++wd.cells;
  if (total > 0)
    for (int k = 0; k < 4; ++k) wd.freq[k] = cnt[k] / total;
  return wd;
}

/// Non-overlapping m x m windows tiling the bounding box; empty windows are skipped.
inline DensityMap measure_densities(const Region& region, const std::vector<Tiling>& tilings, int m) {
  if (m < 2) throw InvalidRegion("window size must be at least 2");
  DensityMap dm;
  dm.m = m;
  for (int y = region.ymin(); y < region.ymin() + region.height(); y += m)
    for (int x = region.xmin(); x < region.xmin() + region.width(); x += m) {
      auto wd = window_density(region, tilings, {x, y}, m);
      if (wd.cells > 0) dm.windows.push_back(wd);
    }
  return dm;
}

struct HeightMoments {
  std::vector<double> mean, variance;
};

inline HeightMoments height_moments(const Region& region, const std::vector<HeightFunction>& samples) {
  if (samples.empty()) throw InvalidHeight("at least one sample is required");
  const std::size_t V = region.vertices().size();
  HeightMoments mo;
  mo.mean.assign(V, 0);
  mo.variance.assign(V, 0);
  for (const auto& h : samples) {
    if (h.values.size() != V) throw InvalidHeight("sample does not match region");
    for (std::size_t i = 0; i < V; ++i) mo.mean[i] += h[i];
  }
  for (auto& x : mo.mean) x /= static_cast<double>(samples.size());
  for (const auto& h : samples)
    for (std::size_t i = 0; i < V; ++i) mo.variance[i] += (h[i] - mo.mean[i]) * (h[i] - mo.mean[i]);
  if (samples.size() > 1)
    for (auto& x : mo.variance) x /= static_cast<double>(samples.size() - 1);
  else
    std::fill(mo.variance.begin(), mo.variance.end(), 0.0);
  return mo;
}

}  // namespace dimervar
