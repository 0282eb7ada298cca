#include "gridres/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "gridres/error.hpp"

namespace gridres::oracle {

void OracleConfig::validate() const {
  if (levels < 3 || levels % 2 == 0) throw InputError("oracle levels must be an odd integer >= 3");
  if (refine_rounds < 0) throw InputError("oracle refine_rounds must be non-negative");
  if (!(refine_shrink > 0.0 && refine_shrink < 1.0)) throw InputError("oracle refine_shrink must lie in (0, 1)");
}

namespace {

constexpr double kInfCost = std::numeric_limits<double>::infinity();

void targets(const ProblemSpec& spec, std::size_t i, double b_prev, std::vector<double>& out) {
  const double delta = spec.delta_energy(i);
  const double band = spec.band_energy(i);
  out.insert(out.end(), {0.0, -delta, -delta - band, -delta + band});
  if (spec.soc_penalty) {
    const auto& sb = spec.soc_penalty->band;
    const double rated = spec.battery.b_rated;
    for (double level : {sb.lower(), sb.mid(), sb.upper()}) out.push_back(energy_for(spec.battery, b_prev, level * rated));
  }
}

void finish(std::vector<double>& pts, EnergyRange r) {
  pts.push_back(r.lo);
  pts.push_back(r.hi);
  std::erase_if(pts, [&](double s) { return !(s >= r.lo && s <= r.hi); });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
}

struct Best {
  double cost = kInfCost;
  std::vector<double> s;

  // Lower cost wins; equal cost goes to the lexicographically smaller trajectory
  // when each step is ordered by |s| first, so the least battery action is kept.
  static bool before(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](double x, double y) {
      return std::abs(x) != std::abs(y) ? std::abs(x) < std::abs(y) : x < y;
    });
  }

  void offer(double c, const std::vector<double>& path) {
    if (c < cost || (c == cost && !s.empty() && before(path, s))) {
      cost = c;
      s = path;
    }
  }
};

// A step whose energy is left open until a later step pins the stored energy.
struct Pending {
  std::size_t k = 0;
  double b_before = 0.0;
  double gain_sum = 0.0;  // stored-energy change of the fixed steps after k
};

class Search {
 public:
  explicit Search(const ProblemSpec& spec) : spec_(spec), n_(spec.horizon()) {
    const auto& bat = spec.battery;
    slack_ = 1e-9 * std::max(1.0, bat.b_rated);
    levels_ = {bat.b_min, bat.b_max};
    if (spec.soc_penalty) {
      const auto& sb = spec.soc_penalty->band;
      for (double l : {sb.lower(), sb.mid(), sb.upper()}) {
        double e = l * bat.b_rated;
        if (e > bat.b_min && e < bat.b_max) levels_.push_back(e);
      }
    }
    const double h = spec.series.step_h;
    own_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double d = spec.delta_energy(i), band = spec.band_energy(i);
      own_[i] = {0.0, -d, -d - band, -d + band, bat.s_min(h), bat.s_max(h)};
      std::erase_if(own_[i], [&](double t) { return t < bat.s_min(h) || t > bat.s_max(h); });
      std::sort(own_[i].begin(), own_[i].end());
      own_[i].erase(std::unique(own_[i].begin(), own_[i].end()), own_[i].end());
    }
  }

  double step_cost(std::size_t i, double s, double b) const {
    double term = std::max(std::abs(spec_.delta_energy(i) + s) - spec_.band_energy(i), 0.0);
    if (spec_.soc_penalty) {
      const auto& pen = *spec_.soc_penalty;
      double soc = b / spec_.battery.b_rated;
      term += pen.lambda * std::max(std::abs(soc - pen.band.mid()) - pen.band.gamma(), 0.0);
    }
    return spec_.cost == CostKind::Linear ? term : term * term;
  }

  // Returns false when s is outside the feasible range at b_prev.
  bool advance(double b_prev, double s, double& b) const {
    auto r = feasible_range(spec_.battery, b_prev, spec_.series.step_h);
    const double tol = 1e-12 * std::max(1.0, spec_.battery.b_rated);
    if (s < r.lo - tol || s > r.hi + tol) return false;
    b = apply(spec_.battery, b_prev, s);
    if (b < spec_.battery.b_min - slack_ || b > spec_.battery.b_max + slack_) return false;
    b = std::clamp(b, spec_.battery.b_min, spec_.battery.b_max);
    return true;
  }

  double gain(double s) const { return s >= 0.0 ? s * spec_.battery.eta_ch : s / spec_.battery.eta_dis; }

  // Plain enumeration over generated candidates.
  template <class Gen>
  void dfs(const Gen& gen, std::size_t i, double b_prev, double acc, std::vector<double>& path, Best& best) const {
    if (i == n_) {
      best.offer(acc, path);
      return;
    }
    for (double s : gen(i, b_prev)) {
      double b;
      if (!advance(b_prev, s, b)) continue;
      double a = acc + step_cost(i, s, b);
      if (a > best.cost) continue;  // every term is non-negative
      path[i] = s;
      dfs(gen, i + 1, b, a, path, best);
    }
  }

  // Vertex enumeration: besides the per-step candidates, a step may be deferred
  // and solved later from a step that sits on one of its own targets while the
  // stored energy sits on a level (bound or SoC breakpoint).
  void vertex_dfs(int grid_levels, std::size_t i, double b_prev, double acc, std::vector<double>& path,
                  const Pending* pend, Best& best) const {
    if (i == n_) {
      if (!pend) best.offer(acc, path);
      return;
    }
    if (!pend) {
      for (double s : candidates(spec_, i, b_prev, grid_levels)) {
        double b;
        if (!advance(b_prev, s, b)) continue;
        double a = acc + step_cost(i, s, b);
        if (a > best.cost) continue;
        path[i] = s;
        vertex_dfs(grid_levels, i + 1, b, a, path, nullptr, best);
      }
      if (i + 1 < n_) {
        Pending p{i, b_prev, 0.0};
        vertex_dfs(grid_levels, i + 1, b_prev, acc, path, &p, best);
      }
      return;
    }
    for (double t : own_[i]) {
      path[i] = t;
      for (double level : levels_) resolve(grid_levels, i, level, acc, path, *pend, best);
      if (i + 1 < n_) {
        Pending next{pend->k, pend->b_before, pend->gain_sum + gain(t)};
        vertex_dfs(grid_levels, i + 1, b_prev, acc, path, &next, best);
      }
    }
  }

  // Wrapper used by the parallel driver for the first step.
  std::vector<double> first_candidates(int grid_levels) const { return candidates(spec_, 0, spec_.b0, grid_levels); }

  void vertex_from_first(int grid_levels, double s0, double acc0, Best& best) const {
    std::vector<double> path(n_);
    double b;
    if (!advance(spec_.b0, s0, b)) return;
    double a = acc0 + step_cost(0, s0, b);
    if (a > best.cost) return;
    path[0] = s0;
    vertex_dfs(grid_levels, 1, b, a, path, nullptr, best);
  }

  void vertex_deferred_first(int grid_levels, Best& best) const {
    if (n_ < 2) return;
    std::vector<double> path(n_);
    Pending p{0, spec_.b0, 0.0};
    vertex_dfs(grid_levels, 1, spec_.b0, 0.0, path, &p, best);
  }

  std::size_t horizon() const { return n_; }
  double b0() const { return spec_.b0; }

 private:
  // Step i is on target path[i] and the energy after it equals `level`; solve the deferred step.
  void resolve(int grid_levels, std::size_t i, double level, double acc, std::vector<double>& path, const Pending& pend,
               Best& best) const {
    const double b_k = level - pend.gain_sum - gain(path[i]);
    const double s_k = energy_for(spec_.battery, pend.b_before, b_k);
    path[pend.k] = s_k;
    double b = pend.b_before;
    double a = acc;
    for (std::size_t m = pend.k; m <= i; ++m) {
      double nb;
      if (!advance(b, path[m], nb)) return;
      b = nb;
      a += step_cost(m, path[m], b);
      if (a > best.cost) return;
    }
    vertex_dfs(grid_levels, i + 1, b, a, path, nullptr, best);
  }

  const ProblemSpec& spec_;
  std::size_t n_;
  double slack_;
  std::vector<double> levels_;
  std::vector<std::vector<double>> own_;
};

Best merge(std::vector<Best>& parts, double bound) {
  Best best;
  best.cost = bound;
  for (auto& p : parts)
    if (!p.s.empty()) best.offer(p.cost, p.s);
  return best;
}

Best vertex_search(const Search& engine, int grid_levels, bool parallel) {
  const std::vector<double> first = engine.first_candidates(grid_levels);
  // One task per first-step candidate plus one for deferring the first step.
  const std::ptrdiff_t tasks = std::ptrdiff_t(first.size()) + 1;
  std::vector<Best> per{std::size_t(tasks)};
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t k = 0; k < tasks; ++k) {
    Best& local = per[std::size_t(k)];
    if (k < std::ptrdiff_t(first.size()))
      engine.vertex_from_first(grid_levels, first[std::size_t(k)], 0.0, local);
    else
      engine.vertex_deferred_first(grid_levels, local);
  }
  return merge(per, kInfCost);
}

template <class Gen>
Best zoom_search(const Search& engine, const Gen& gen, double bound, bool parallel) {
  const std::size_t n = engine.horizon();
  const std::vector<double> first = gen(0, engine.b0());
  std::vector<Best> per(first.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t k = 0; k < std::ptrdiff_t(first.size()); ++k) {
    Best& local = per[std::size_t(k)];
    local.cost = bound;
    double s = first[std::size_t(k)];
    double b;
    if (!engine.advance(engine.b0(), s, b)) continue;
    double a = engine.step_cost(0, s, b);
    if (a >= local.cost) continue;
    std::vector<double> path(n);
    path[0] = s;
    engine.dfs(gen, 1, b, a, path, local);
  }
  Best best = merge(per, bound);
  // Only strict improvements count during refinement.
  if (!(best.cost < bound)) best.s.clear();
  return best;
}

DispatchResult search(const ProblemSpec& spec, const OracleConfig& cfg, bool parallel) {
  auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  spec.validate();
  const std::size_t n = spec.horizon();
  if (n > cfg.max_n)
    throw InputError("oracle horizon " + std::to_string(n) + " exceeds max_n " + std::to_string(cfg.max_n));

  const double h = spec.series.step_h;
  Search engine(spec);
  Best best = vertex_search(engine, cfg.levels, parallel);
  if (best.s.empty()) throw Infeasible("oracle found no feasible trajectory");

  const int half = (cfg.levels - 1) / 2;
  double radius = std::max(spec.battery.s_max(h), -spec.battery.s_min(h)) / half;
  for (int round = 0; round < cfg.refine_rounds; ++round) {
    const std::vector<double> center = best.s;
    auto zoom = [&](std::size_t i, double b_prev) {
      auto r = feasible_range(spec.battery, b_prev, h);
      std::vector<double> pts;
      for (int k = -5; k <= 5; ++k) pts.push_back(std::clamp(center[i] + radius * k / 5.0, r.lo, r.hi));
      std::vector<double> t;
      targets(spec, i, b_prev, t);
      for (double v : t)
        if (std::abs(v - center[i]) <= radius) pts.push_back(v);
      finish(pts, r);
      return pts;
    };
    Best better = zoom_search(engine, zoom, best.cost, parallel);
    if (!better.s.empty()) best = std::move(better);
    radius *= cfg.refine_shrink;
  }

  auto b = simulate(spec.battery, spec.b0, best.s);
  for (double& v : b) v = std::clamp(v, spec.battery.b_min, spec.battery.b_max);
  auto result = evaluate_dispatch(spec, std::move(best.s), std::move(b));
  result.stats.method = "oracle";
  result.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace

std::vector<double> candidates(const ProblemSpec& spec, std::size_t i, double b_prev, int levels) {
  auto r = feasible_range(spec.battery, b_prev, spec.series.step_h);
  const int half = (levels - 1) / 2;
  std::vector<double> pts;
  pts.reserve(std::size_t(levels) + 10);
  for (int k = 1; k <= half; ++k) {
    pts.push_back(r.lo * k / half);
    pts.push_back(r.hi * k / half);
  }
  targets(spec, i, b_prev, pts);
  finish(pts, r);
  return pts;
}

DispatchResult brute_force(const ProblemSpec& spec, const OracleConfig& cfg) { return search(spec, cfg, cfg.parallel); }

DispatchResult brute_force_serial(const ProblemSpec& spec, OracleConfig cfg) { return search(spec, cfg, false); }

}  // namespace gridres::oracle
