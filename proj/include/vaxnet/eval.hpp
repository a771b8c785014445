#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vaxnet/models.hpp"

namespace vaxnet::eval {

/// Fraction of samples whose thresholded score (score >= threshold) equals
/// the label.
double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

/// Mann-Whitney AUC from average ranks: ties between a positive and a
/// negative count one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// One point per distinct score threshold, from (0, 0) to (1, 1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

double trapezoid_area(std::span<const RocPoint> curve);

namespace serial {
/// Direct count over all positive/negative pairs. O(n^2).
double roc_auc_pairwise(std::span<const double> scores, std::span<const int> labels);
}

struct Confusion {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

struct ModelResult {
  models::ModelKind kind = models::ModelKind::logreg;
  double accuracy = 0.0;
  double auc = 0.0;
  Confusion confusion;
  std::vector<RocPoint> roc;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config;
  /// Set when the row aggregates several runs.
  std::size_t runs = 1;
  std::optional<double> accuracy_std;
  std::optional<double> auc_std;
};

ModelResult evaluate(models::ModelKind kind, std::span<const double> scores, std::span<const int> labels,
                     std::uint64_t seed, nlohmann::ordered_json config = {});

struct EvalReport {
  /// Sorted by the canonical model order.
  std::vector<ModelResult> rows;
};

EvalReport build_report(std::vector<ModelResult> results);

/// Rows of the same model across reports become one row with the mean and
/// sample standard deviation of accuracy and AUC.
EvalReport merge_reports(std::span<const EvalReport> reports);

nlohmann::ordered_json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

/// Markdown table: Classifier | Accuracy | AUC | Data Representation.
std::string to_markdown(const EvalReport& r);

}  // namespace vaxnet::eval
