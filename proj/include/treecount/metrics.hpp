#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace treecount::metrics {

// Ground-truth vs predicted count for one route.
struct RouteEval {
  std::string route_id;
  double length_km = 0.0;
  std::int64_t gt_count = 0;
  std::int64_t pred_count = 0;
};

// Mean absolute error over the routes' count pairs.
double mae(const std::vector<RouteEval>& evals);

// Fraction of routes whose ground-truth and predicted per-km rates land in
// the same density category.
double tcdca(const std::vector<RouteEval>& evals);

// Evaluation input: JSON lines, one route per line:
//   {"route":"id","km":0.75,"gt":29,"pred":27}
std::vector<RouteEval> read_evals(std::istream& in);
std::vector<RouteEval> load_evals(const std::string& path);

// Report with one row per route (counts, rates, categories, match flag)
// followed by aggregate MAE and TCDCA.
void write_eval_report(const std::vector<RouteEval>& evals, std::ostream& out);

}  // namespace treecount::metrics
