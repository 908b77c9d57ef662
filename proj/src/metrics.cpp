#include "treecount/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "treecount/classify.hpp"
#include "treecount/errors.hpp"

namespace treecount::metrics {

using nlohmann::json;

double mae(const std::vector<RouteEval>& evals) {
  if (evals.empty()) {
    throw EmptyEvalSet("MAE needs at least one route");
  }
  double sum = 0.0;
  for (const auto& e : evals) {
    sum += std::abs(static_cast<double>(e.gt_count - e.pred_count));
  }
  return sum / static_cast<double>(evals.size());
}

namespace {

classify::DensityCategory category_of(std::int64_t count, double length_km) {
  // Convert to meters once so identical lengths give identical rates.
  const double length_m = length_km * 1000.0;
  return classify::categorize(classify::per_km_rate(count, length_m));
}

}  // namespace

double tcdca(const std::vector<RouteEval>& evals) {
  if (evals.empty()) {
    throw EmptyEvalSet("TCDCA needs at least one route");
  }
  std::int64_t matches = 0;
  for (const auto& e : evals) {
    if (category_of(e.gt_count, e.length_km) == category_of(e.pred_count, e.length_km)) {
      ++matches;
    }
  }
  return static_cast<double>(matches) / static_cast<double>(evals.size());
}

std::vector<RouteEval> read_evals(std::istream& in) {
  std::vector<RouteEval> evals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
    if (!j.is_object() || !j.contains("route") || !j.contains("km") ||
        !j.contains("gt") || !j.contains("pred")) {
      throw MalformedRecord(line_no, "route record needs route, km, gt, pred");
    }
    RouteEval e;
    e.route_id = j["route"].get<std::string>();
    e.length_km = j["km"].get<double>();
    e.gt_count = j["gt"].get<std::int64_t>();
    e.pred_count = j["pred"].get<std::int64_t>();
    if (!(e.length_km > 0.0)) {
      throw MalformedRecord(line_no, "route length must be positive");
    }
    if (e.gt_count < 0 || e.pred_count < 0) {
      throw MalformedRecord(line_no, "counts must be non-negative");
    }
    evals.push_back(std::move(e));
  }
  return evals;
}

std::vector<RouteEval> load_evals(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open evaluation file: " + path);
  }
  return read_evals(in);
}

void write_eval_report(const std::vector<RouteEval>& evals, std::ostream& out) {
  out << "route\tkm\tgt\tpred\tgt_per_km\tpred_per_km\tgt_category\tpred_category\tmatch\n";
  for (const auto& e : evals) {
    const double length_m = e.length_km * 1000.0;
    const double gt_rate = classify::per_km_rate(e.gt_count, length_m);
    const double pred_rate = classify::per_km_rate(e.pred_count, length_m);
    const auto gt_cat = classify::categorize(gt_rate);
    const auto pred_cat = classify::categorize(pred_rate);
    char line[256];
    std::snprintf(line, sizeof(line), "%s\t%.6g\t%lld\t%lld\t%.6f\t%.6f\t%s\t%s\t%s\n",
                  e.route_id.c_str(), e.length_km, static_cast<long long>(e.gt_count),
                  static_cast<long long>(e.pred_count), gt_rate, pred_rate,
                  classify::label(gt_cat), classify::label(pred_cat),
                  gt_cat == pred_cat ? "yes" : "no");
    out << line;
  }
  char agg[128];
  std::snprintf(agg, sizeof(agg), "MAE %.6f\nTCDCA %.6f\n", mae(evals), tcdca(evals));
  out << agg;
}

}  // namespace treecount::metrics
