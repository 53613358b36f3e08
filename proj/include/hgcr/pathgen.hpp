#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hgcr/kgraph.hpp"

namespace hgcr::pathgen {

/// A concept pair whose direct edge first appears at year t.
struct Query {
  ConceptId source;
  ConceptId target;
  int t = 0;
};

bool operator==(const Query& a, const Query& b);

/// Errors with EndpointMismatch-style codes when the invariants do not hold:
/// source != target, edge present in snapshot(t) and absent in snapshot(t-1).
void check_query(const kgraph::TemporalGraph& g, const Query& q);

/// Simple path source -> ... -> target with at least one intermediate.
/// edge_contexts[i] holds the evidence doc ids of the edge nodes[i]-nodes[i+1]
/// in the sampling snapshot, ordered (year desc, doc_id asc).
struct Path {
  std::vector<ConceptId> nodes;
  std::vector<std::vector<DocId>> edge_contexts;

  std::size_t node_length() const { return nodes.size(); }
  std::vector<ConceptId> intermediates() const {
    return {nodes.begin() + 1, nodes.end() - 1};
  }
  std::vector<DocId> flattened_contexts() const;
};

struct FutureReferenceSet {
  Query query;
  std::set<ConceptId> terms;   // concepts co-mentioned with the pair at year t, endpoints excluded
  std::set<DocId> abstracts;   // the documents providing them
};

enum class Label { positive, negative };
enum class NegativeKind { none, hard, corrupted_path, corrupted_context };

const char* label_name(Label label);
const char* negative_kind_name(NegativeKind kind);
Label label_from_name(const std::string& name);
NegativeKind negative_kind_from_name(const std::string& name);

struct LabeledPathSample {
  Query query;
  Path path;
  std::vector<DocId> contexts;  // flattened per-edge context, or per-node draws for corrupted_context
  Label label = Label::negative;
  NegativeKind kind = NegativeKind::none;
};

/// Documents at year exactly q.t mentioning both endpoints; terms is the
/// union of their concepts minus the endpoints. Errors with NoFutureEvidence
/// when no such document exists.
FutureReferenceSet future_reference(const kgraph::TemporalGraph& g, const Query& q);

/// All simple paths from q.source to q.target with node count in
/// {3, ..., max_nodes}, ordered lexicographically by node sequence and
/// deterministically capped at cap_per_length per node count
/// (0 = unlimited). Errors: DirectEdgePresent, Disconnected.
std::vector<Path> enumerate_candidate_paths(const kgraph::SnapshotView& view, const Query& q,
                                            int max_nodes = 4, std::size_t cap_per_length = 0);

/// Positive iff every intermediate node is in fr.terms. Errors with
/// EndpointMismatch when the path endpoints differ from the query's.
Label label_path(const Path& p, const FutureReferenceSet& fr);

/// Replace exactly one intermediate node with a seeded uniform draw from
/// node_pool; the two incident edges get contexts for the new pairs, falling
/// back to documents mentioning the replacement node alone when the new edge
/// does not exist in the snapshot. Errors with EmptyPool.
Path corrupt_path(const Path& p, const std::vector<ConceptId>& node_pool,
                  const kgraph::SnapshotView& view, std::uint64_t seed);

/// Pair the unchanged path with per-node context draws (one document per
/// node, co-occurrence structure ignored), resampling until the draw is not
/// a subset of the positive contexts. Errors with CannotDiffer after 100
/// attempts.
LabeledPathSample corrupt_context(const LabeledPathSample& positive,
                                  const kgraph::SnapshotView& view, std::uint64_t seed);

enum class DatasetMode { training, test };

struct DatasetCaps {
  std::size_t neg_len3 = 100;
  std::size_t neg_len4 = 100;
};

struct QueryError {
  Query query;
  std::string code;
  std::string message;
};

struct QueryStats {
  Query query;
  std::size_t positives = 0;
  std::size_t hard_negatives = 0;
  std::size_t corrupted_paths = 0;
  std::size_t corrupted_contexts = 0;
  double negative_to_positive_ratio = 0.0;
};

struct DatasetResult {
  std::vector<LabeledPathSample> samples;
  std::vector<QueryError> errors;
  std::vector<QueryStats> stats;
};

/// Per query: every positive within the length bound, hard negatives capped
/// per node length, and (training mode) one corrupted-path and one
/// corrupted-context sample per positive. Per-query failures go to the error
/// report; the batch never aborts. When sample_year is given all queries are
/// sampled on snapshot(sample_year), otherwise on snapshot(q.t - 1).
DatasetResult build_dataset(const kgraph::TemporalGraph& g, const std::vector<Query>& queries,
                            const DatasetCaps& caps, DatasetMode mode, std::uint64_t seed,
                            std::optional<int> sample_year = std::nullopt, int max_nodes = 4);

/// Queries whose endpoints co-occur in the title of a future-reference
/// document or appear as an annotated (source, verb, target) predicate
/// there.
std::vector<Query> filter_expl_queries(const kgraph::TemporalGraph& g,
                                       const std::vector<Query>& queries);

/// All concept pairs whose edge first appears at year >= split_year, as
/// queries stamped with that first year. Deterministic (edge key order).
std::vector<Query> discover_queries(const kgraph::TemporalGraph& g, int split_year);

/// Dataset file: one JSON object per line with fields query, path_nodes,
/// context_doc_ids, label, negative_kind, node_length.
void save_dataset(const std::string& path, const std::vector<LabeledPathSample>& samples);
std::vector<LabeledPathSample> load_dataset(const std::string& path);

}  // namespace hgcr::pathgen
