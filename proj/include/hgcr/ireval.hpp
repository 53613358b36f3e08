#pragma once

#include <string>
#include <vector>

#include "hgcr/error.hpp"

namespace hgcr::ireval {

struct ScoredLabel {
  double score = 0.0;
  int label = 0;  // 1 positive, 0 negative
};

struct QueryResult {
  std::string query_id;
  std::vector<ScoredLabel> pairs;
};

/// Rank-based ROC AUC: P(score+ > score-) + 0.5 * P(tie), computed exactly
/// via midranks. Errors with DegenerateLabels unless both classes are
/// present.
double roc_auc(const std::vector<ScoredLabel>& pairs);

/// Mean over positives of precision at each positive's rank; ranking is a
/// stable descending sort, so ties keep input order. Errors with NoPositives.
double average_precision(const std::vector<ScoredLabel>& pairs);

enum class Metric { auc, ap };
enum class Averaging { micro, macro };

struct AggregateResult {
  double value = 0.0;
  std::size_t used_queries = 0;
  std::size_t skipped_queries = 0;
};

/// micro: the metric over all pairs pooled in input order. macro: unweighted
/// mean of per-query values over non-degenerate queries, with the skipped
/// count reported. Errors with AllDegenerate when nothing is usable.
AggregateResult aggregate(const std::vector<QueryResult>& results, Averaging mode, Metric metric);

struct MetricsReport {
  AggregateResult micro_auc, macro_auc, micro_ap, macro_ap;
  struct PerQuery {
    std::string query_id;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    bool degenerate = false;
    double auc = 0.0;
    double ap = 0.0;
  };
  std::vector<PerQuery> per_query;
};

MetricsReport evaluate(const std::vector<QueryResult>& results);

std::string render_report(const MetricsReport& report);

}  // namespace hgcr::ireval
