#include "vaxnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "vaxnet/error.hpp"

namespace vaxnet::eval {
namespace {

using ojson = nlohmann::ordered_json;

void check(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty()) throw Error("evaluation needs at least one sample");
  if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
  for (const auto s : scores) {
    if (std::isnan(s)) throw Error("score is NaN");
  }
}

std::pair<std::size_t, std::size_t> class_counts(std::span<const int> labels) {
  std::size_t pos = 0;
  for (const auto y : labels) pos += y ? 1 : 0;
  if (pos == 0 || pos == labels.size()) throw Error("AUC needs both classes");
  return {pos, labels.size() - pos};
}

std::size_t canonical_rank(models::ModelKind k) {
  return static_cast<std::size_t>(std::find(models::kAllModels.begin(), models::kAllModels.end(), k) -
                                  models::kAllModels.begin());
}

ojson row_to_json(const ModelResult& r) {
  ojson j;
  j["model"] = models::cli_name(r.kind);
  j["classifier"] = models::display_name(r.kind);
  j["representation"] = models::display_name(models::representation(r.kind));
  j["accuracy"] = r.accuracy;
  j["auc"] = r.auc;
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
  ojson roc = ojson::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr});
  j["roc"] = std::move(roc);
  j["seed"] = r.seed;
  j["config"] = r.config;
  j["runs"] = r.runs;
  j["accuracy_std"] = r.accuracy_std ? ojson(*r.accuracy_std) : ojson(nullptr);
  j["auc_std"] = r.auc_std ? ojson(*r.auc_std) : ojson(nullptr);
  return j;
}

ModelResult row_from_json(const nlohmann::json& j) {
  ModelResult r;
  r.kind = models::parse_model_kind(j.at("model").get<std::string>());
  r.accuracy = j.at("accuracy").get<double>();
  r.auc = j.at("auc").get<double>();
  const auto& c = j.at("confusion");
  r.confusion = {c.at("tp").get<std::uint64_t>(), c.at("fp").get<std::uint64_t>(), c.at("tn").get<std::uint64_t>(),
                 c.at("fn").get<std::uint64_t>()};
  for (const auto& p : j.at("roc")) r.roc.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config");
  r.runs = j.value("runs", std::size_t{1});
  if (j.contains("accuracy_std") && !j["accuracy_std"].is_null()) r.accuracy_std = j["accuracy_std"].get<double>();
  if (j.contains("auc_std") && !j["auc_std"].is_null()) r.auc_std = j["auc_std"].get<double>();
  if (!(r.accuracy >= 0.0 && r.accuracy <= 1.0) || !(r.auc >= 0.0 && r.auc <= 1.0)) {
    throw Error("report row outside [0, 1]");
  }
  return r;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const auto x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check(scores, labels);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) hits += (scores[i] >= threshold) == (labels[i] != 0) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check(scores, labels);
  const auto [n_pos, n_neg] = class_counts(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Sum of 1-based average ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) pos_in_group += labels[order[j++]] ? 1 : 0;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += avg_rank * static_cast<double>(pos_in_group);
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1) / 2) / (np * nn);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  check(scores, labels);
  const auto [n_pos, n_neg] = class_counts(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) (labels[order[i++]] ? tp : fp) += 1;
    curve.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                     static_cast<double>(tp) / static_cast<double>(n_pos)});
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2;
  }
  return area;
}

namespace serial {
double roc_auc_pairwise(std::span<const double> scores, std::span<const int> labels) {
  check(scores, labels);
  const auto [n_pos, n_neg] = class_counts(labels);
  std::uint64_t wins2 = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      wins2 += scores[i] > scores[j] ? 2 : scores[i] == scores[j] ? 1 : 0;
    }
  }
  return static_cast<double>(wins2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}
}  // namespace serial

Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i]) (predicted ? c.tp : c.fn) += 1;
    else (predicted ? c.fp : c.tn) += 1;
  }
  return c;
}

ModelResult evaluate(models::ModelKind kind, std::span<const double> scores, std::span<const int> labels,
                     std::uint64_t seed, nlohmann::ordered_json config) {
  ModelResult r;
  r.kind = kind;
  r.accuracy = accuracy(scores, labels);
  r.auc = roc_auc(scores, labels);
  r.confusion = confusion(scores, labels);
  r.roc = roc_curve(scores, labels);
  r.seed = seed;
  r.config = std::move(config);
  return r;
}

EvalReport build_report(std::vector<ModelResult> results) {
  std::stable_sort(results.begin(), results.end(),
                   [](const auto& a, const auto& b) { return canonical_rank(a.kind) < canonical_rank(b.kind); });
  return {std::move(results)};
}

EvalReport merge_reports(std::span<const EvalReport> reports) {
  std::map<std::size_t, std::vector<const ModelResult*>> by_kind;
  for (const auto& rep : reports) {
    for (const auto& row : rep.rows) by_kind[canonical_rank(row.kind)].push_back(&row);
  }
  std::vector<ModelResult> merged;
  for (const auto& [rank, rows] : by_kind) {
    if (rows.size() == 1) {
      merged.push_back(*rows.front());
      continue;
    }
    std::vector<double> acc, auc;
    ModelResult m = *rows.front();
    m.confusion = {};
    for (const auto* r : rows) {
      acc.push_back(r->accuracy);
      auc.push_back(r->auc);
      m.confusion.tp += r->confusion.tp;
      m.confusion.fp += r->confusion.fp;
      m.confusion.tn += r->confusion.tn;
      m.confusion.fn += r->confusion.fn;
    }
    const auto [acc_mean, acc_sd] = mean_std(acc);
    const auto [auc_mean, auc_sd] = mean_std(auc);
    m.accuracy = acc_mean;
    m.accuracy_std = acc_sd;
    m.auc = auc_mean;
    m.auc_std = auc_sd;
    m.runs = rows.size();
    m.roc.clear();
    merged.push_back(std::move(m));
  }
  return build_report(std::move(merged));
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  ojson rows = ojson::array();
  for (const auto& row : r.rows) rows.push_back(row_to_json(row));
  return {{"format", "vaxnet-report"}, {"version", 1}, {"rows", std::move(rows)}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "vaxnet-report") throw Error("not a report file");
    std::vector<ModelResult> rows;
    for (const auto& row : j.at("rows")) rows.push_back(row_from_json(row));
    return build_report(std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report: ") + e.what());
  }
}

std::string to_markdown(const EvalReport& r) {
  std::string out = "| Classifier | Accuracy | AUC | Data Representation |\n|---|---|---|---|\n";
  for (const auto& row : r.rows) {
    const auto cell = [](double v, const std::optional<double>& sd) {
      return sd ? fmt::format("{:.3f} ± {:.3f}", v, *sd) : fmt::format("{:.3f}", v);
    };
    out += fmt::format("| {} | {} | {} | {} |\n", models::display_name(row.kind), cell(row.accuracy, row.accuracy_std),
                       cell(row.auc, row.auc_std), models::display_name(models::representation(row.kind)));
  }
  return out;
}

}  // namespace vaxnet::eval
