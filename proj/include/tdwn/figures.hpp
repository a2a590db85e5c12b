#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tdwn/analytics.hpp"
#include "tdwn/scenario_file.hpp"

namespace tdwn {

struct FigureOptions {
  /// Independent Monte Carlo replications per point, merged in index order.
  std::size_t replications = 1;
  unsigned workers = 0;
  TtlRedraw redraw = TtlRedraw::OnExpiry;
};

/// One Monte Carlo point of the query-interval sweeps.
struct IntervalPoint {
  double update_mean = 0.0;
  std::string ttl;
  QueryIntervalStats stats;
  double bound = 0.0;
};

/// Pools replications: counts add up, means are query-weighted, and with
/// more than one replication the half-widths come from the spread between
/// replication means.
QueryIntervalStats merge_interval_stats(const std::vector<QueryIntervalStats>& parts);

IntervalPoint interval_point(const TtlDistribution& ttl, double update_mean, std::uint64_t n_updates,
                             std::uint64_t seed, const FigureOptions& options);

/// Update means 100, 200, ..., 1400 s for both constant(1000) and
/// uniform(500, 1500) TTLs.
std::vector<IntervalPoint> interval_sweep(std::uint64_t n_updates, std::uint64_t seed,
                                          const FigureOptions& options);

const std::vector<std::string>& figure_names();
bool is_figure_name(std::string_view name);

/// CSV text for one figure. Throws std::invalid_argument for unknown names.
std::string figure_csv(std::string_view name, const ScenarioFile& file, const FigureOptions& options);

}  // namespace tdwn
