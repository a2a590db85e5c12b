#include "tdwn/figures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tdwn/replicate.hpp"

namespace tdwn {

namespace {

const TtlDistribution kConstantTtl = TtlDistribution::constant(1000.0);
const TtlDistribution kUniformTtl = TtlDistribution::uniform(500.0, 1500.0);

std::string num(double v) { return format_double(v); }

std::string interval_rows(const std::vector<IntervalPoint>& points) {
  std::string out =
      "update_mean_s,ttl,mean_interval_s,ci_halfwidth,ttl_triggered_ratio,ratio_ci_halfwidth,"
      "ttl_triggered,update_triggered,queries,independence_bound_s\n";
  for (const auto& p : points) {
    const auto& s = p.stats;
    out += num(p.update_mean) + "," + p.ttl + "," + num(s.mean_interval) + "," + num(s.interval_half_width) +
           "," + num(s.ttl_triggered_ratio) + "," + num(s.ratio_half_width) + "," +
           std::to_string(s.ttl_triggered) + "," + std::to_string(s.update_triggered) + "," +
           std::to_string(s.queries) + "," + num(p.bound) + "\n";
  }
  return out;
}

std::string lifecycle_rows(const ScenarioFile& f, int tod) {
  const std::uint64_t g = f.guess_space();
  std::string out = "lifecycle_h,tod,d,g,rounds,seconds,years\n";
  for (int d : {1, 5, 10, 20}) {
    for (int hours = 1; hours <= 24; ++hours) {
      const auto t = time_to_success(0.5, hours * 3600.0, tod, d, static_cast<std::int64_t>(g),
                                     f.scenario.auth.response_time);
      out += std::to_string(hours) + "," + std::to_string(tod) + "," + std::to_string(d) + "," +
             std::to_string(g) + "," + std::to_string(t.rounds) + "," + num(t.seconds) + "," +
             num(t.years()) + "\n";
    }
  }
  return out;
}

std::string curve_rows(const ScenarioFile& f, int tod) {
  const auto g = static_cast<std::int64_t>(f.guess_space());
  const int d = f.outstanding();
  const auto curve = success_curve(f.horizon, f.lifecycle, tod, d, g);
  std::string out = "time_s,time_years,tod,d,step,success_prob,increment\n";
  double prev = 0.0;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const auto& [t, p] = curve.points[k];
    out += num(t) + "," + num(t / (365.0 * 86400.0)) + "," + std::to_string(tod) + "," + std::to_string(d) +
           "," + std::to_string(k) + "," + num(p) + "," + num(p - prev) + "\n";
    prev = p;
  }
  return out;
}

}  // namespace

QueryIntervalStats merge_interval_stats(const std::vector<QueryIntervalStats>& parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts.front();
  QueryIntervalStats m;
  double weighted = 0.0;
  for (const auto& p : parts) {
    m.queries += p.queries;
    m.ttl_triggered += p.ttl_triggered;
    m.update_triggered += p.update_triggered;
    weighted += p.mean_interval * static_cast<double>(p.queries);
  }
  if (m.queries == 0) return m;
  m.mean_interval = weighted / static_cast<double>(m.queries);
  m.ttl_triggered_ratio = static_cast<double>(m.ttl_triggered) / static_cast<double>(m.queries);

  const double n = static_cast<double>(parts.size());
  double mean_i = 0.0, mean_r = 0.0;
  for (const auto& p : parts) {
    mean_i += p.mean_interval / n;
    mean_r += p.ttl_triggered_ratio / n;
  }
  double var_i = 0.0, var_r = 0.0;
  for (const auto& p : parts) {
    var_i += (p.mean_interval - mean_i) * (p.mean_interval - mean_i) / (n - 1.0);
    var_r += (p.ttl_triggered_ratio - mean_r) * (p.ttl_triggered_ratio - mean_r) / (n - 1.0);
  }
  m.interval_half_width = 1.96 * std::sqrt(var_i / n);
  m.ratio_half_width = 1.96 * std::sqrt(var_r / n);
  return m;
}

IntervalPoint interval_point(const TtlDistribution& ttl, double update_mean, std::uint64_t n_updates,
                             std::uint64_t seed, const FigureOptions& options) {
  const std::size_t reps = std::max<std::size_t>(1, options.replications);
  auto parts = replicate(
      reps,
      [&](std::size_t i) {
        return mc_query_intervals(ttl, update_mean, n_updates, derive_seed(seed, 1000 + i), options.redraw);
      },
      options.workers);
  return {update_mean, ttl.str(), merge_interval_stats(parts), independence_bound(update_mean, ttl.mean())};
}

std::vector<IntervalPoint> interval_sweep(std::uint64_t n_updates, std::uint64_t seed,
                                          const FigureOptions& options) {
  std::vector<std::pair<const TtlDistribution*, double>> jobs;
  for (const auto* ttl : {&kConstantTtl, &kUniformTtl})
    for (int m = 100; m <= 1400; m += 100) jobs.emplace_back(ttl, m);
  FigureOptions inner = options;
  inner.workers = 1;
  return replicate(
      jobs.size(),
      [&](std::size_t i) {
        // The seed depends only on the update mean, so both TTL series see the
        // same update trace.
        const auto [ttl, m] = jobs[i];
        return interval_point(*ttl, m, n_updates, derive_seed(seed, static_cast<std::uint64_t>(m)), inner);
      },
      options.workers);
}

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11"};
  return names;
}

bool is_figure_name(std::string_view name) {
  const auto& names = figure_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string figure_csv(std::string_view name, const ScenarioFile& file, const FigureOptions& options) {
  const std::uint64_t seed = file.scenario.seed;
  if (name == "fig5" || name == "fig6") return interval_rows(interval_sweep(file.n_updates, seed, options));
  if (name == "fig7") {
    auto p = interval_point(kConstantTtl, 1000.0, file.n_updates, derive_seed(seed, 1000), options);
    std::string out = interval_rows({p});
    out.insert(out.find('\n'), ",analytic_ratio");
    out.insert(out.size() - 1, "," + num(std::exp(-1.0)));
    return out;
  }
  if (name == "fig8") return lifecycle_rows(file, 3);
  if (name == "fig9") return lifecycle_rows(file, 2);
  if (name == "fig10") return curve_rows(file, 3);
  if (name == "fig11") return curve_rows(file, 5);
  throw std::invalid_argument("unknown figure '" + std::string(name) + "'");
}

}  // namespace tdwn
