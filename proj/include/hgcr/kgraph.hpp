#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hgcr/error.hpp"
#include "hgcr/types.hpp"

namespace hgcr::kgraph {

/// Predicate annotation carried by a corpus record.
struct DocPredicate {
  ConceptId subject;
  std::string verb;
  ConceptId object;
};

/// One corpus document: pre-extracted concepts plus optional abstract text
/// and optional annotations (title concepts, predicates).
struct DocRecord {
  DocId doc_id;
  int year = 0;
  std::vector<ConceptId> concepts;
  std::string text;
  std::vector<ConceptId> title_concepts;
  std::vector<DocPredicate> predicates;
};

struct Evidence {
  DocId doc_id;
  int year = 0;
};

/// Unordered concept pair, normalized so first <= second.
using EdgeKey = std::pair<ConceptId, ConceptId>;

inline EdgeKey make_edge_key(const ConceptId& a, const ConceptId& b) {
  return a <= b ? EdgeKey{a, b} : EdgeKey{b, a};
}

struct Edge {
  ConceptId u;
  ConceptId v;
  std::vector<Evidence> evidence;  // sorted (year desc, doc_id asc) after freeze
  int first_year = 0;              // min year over evidence
};

class SnapshotView;

/// Cumulative co-occurrence graph over a timestamped document corpus. Every
/// unordered concept pair co-mentioned by a document becomes an edge whose
/// evidence records (doc_id, year) pairs.
///
/// Mutation is single-writer; after freeze() the graph and all views are
/// immutable and safe for unrestricted concurrent reads.
class TemporalGraph {
 public:
  /// Ingest one document: adds all its concepts as nodes and appends
  /// evidence to every pairwise edge among them. Self-pairs never create
  /// edges.
  void add_document(const DocRecord& doc);

  /// Make the graph immutable. Idempotent.
  void freeze();

  bool frozen() const { return frozen_; }

  /// View of the graph restricted to edges first evidenced at year <= t.
  /// Requires a frozen graph.
  SnapshotView snapshot(int t) const;

  const std::set<ConceptId>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t doc_count() const { return docs_.size(); }

  const std::vector<DocRecord>& docs() const { return docs_; }
  const DocRecord* find_doc(const DocId& id) const;

  /// Indices into docs() of documents mentioning the concept, in ingestion
  /// order. Empty when the concept is unknown.
  const std::vector<std::size_t>& doc_indices_for(const ConceptId& c) const;

  const std::map<EdgeKey, Edge>& edges() const { return edges_; }
  const Edge* find_edge(const ConceptId& a, const ConceptId& b) const;

  /// First year the concept is mentioned by any document.
  std::optional<int> first_mention_year(const ConceptId& c) const;

  std::optional<int> min_year() const;
  std::optional<int> max_year() const;

 private:
  friend class SnapshotView;

  bool frozen_ = false;
  std::set<ConceptId> nodes_;
  std::map<EdgeKey, Edge> edges_;
  std::map<ConceptId, std::set<ConceptId>> adjacency_;
  std::vector<DocRecord> docs_;
  std::map<DocId, std::size_t> doc_index_;
  std::map<ConceptId, std::vector<std::size_t>> docs_by_concept_;
  std::map<ConceptId, int> first_mention_;
};

/// Cheap value-type view of a frozen TemporalGraph at time t. Contains
/// exactly the edges with first_year <= t; evidence lists are filtered to
/// year <= t. Snapshots are cumulative: view(t-1) edges are a subset of
/// view(t) edges.
class SnapshotView {
 public:
  SnapshotView(const TemporalGraph& base, int t) : base_(&base), t_(t) {}

  int t() const { return t_; }
  const TemporalGraph& base() const { return *base_; }

  bool has_node(const ConceptId& c) const;

  /// Concepts first mentioned at year <= t.
  std::set<ConceptId> nodes() const;

  bool has_edge(const ConceptId& a, const ConceptId& b) const;

  /// Neighbors of c in the view. Errors with UnknownConcept when c is not a
  /// node of the base graph.
  std::set<ConceptId> neighbors(const ConceptId& c) const;

  /// Evidence of edge (u, v) restricted to year <= t, sorted by
  /// (year desc, doc_id asc). Errors with NoSuchEdge when the edge is not
  /// part of the view.
  std::vector<Evidence> edge_evidence(const ConceptId& u, const ConceptId& v) const;

  /// Doc ids of edge_evidence, same order.
  std::vector<DocId> edge_context_docs(const ConceptId& u, const ConceptId& v) const;

  /// All edges of the view, in key order.
  std::vector<EdgeKey> edge_keys() const;
  std::size_t edge_count() const;

  /// Doc ids (ingestion order) of documents with year <= t mentioning c.
  std::vector<DocId> docs_mentioning(const ConceptId& c) const;

 private:
  const TemporalGraph* base_;
  int t_;
};

/// Corpus file: one JSON object per line with fields doc_id (string),
/// year (int), concepts (array of strings), and optional text,
/// title_concepts, predicates.
std::vector<DocRecord> read_corpus(std::istream& in);
std::vector<DocRecord> read_corpus_file(const std::string& path);
void write_corpus(std::ostream& out, const std::vector<DocRecord>& docs);

/// Build a frozen graph from corpus records.
TemporalGraph build_graph(const std::vector<DocRecord>& docs);

/// Graph persistence. The serialized form is the ingested corpus plus a
/// meta line; loading re-ingests and freezes, which reproduces the graph
/// exactly.
void save_graph(const std::string& path, const TemporalGraph& g);
TemporalGraph load_graph(const std::string& path);

}  // namespace hgcr::kgraph
