#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hgcr/error.hpp"
#include "hgcr/types.hpp"

namespace hgcr::embed {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

/// Cosine similarity in [-1, 1]. Errors with ZeroVector when either input
/// has zero norm, DimMismatch when dimensions differ.
double cosine(const Vec& a, const Vec& b);

/// Like cosine but returns 0 for zero vectors instead of raising. Internal
/// ranking helpers use it where a missing signal should rank last, not
/// abort.
double cosine_or_zero(const Vec& a, const Vec& b);

enum class TableKind { concept_space, context_space };

const char* table_kind_name(TableKind kind);

/// Immutable id -> vector map with a uniform dimension. Safe for concurrent
/// reads after construction.
class EmbeddingTable {
 public:
  EmbeddingTable(int dim, TableKind kind) : dim_(dim), kind_(kind) {}

  int dim() const { return dim_; }
  TableKind kind() const { return kind_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& id) const { return entries_.count(id) != 0; }

  /// Errors with DimMismatch on wrong dimension, DuplicateId on repeat.
  void insert(const std::string& id, Vec v);

  /// Errors with UnknownId when absent: a silent zero vector would corrupt
  /// rankings downstream.
  const Vec& lookup(const std::string& id) const;

  const std::map<std::string, Vec>& entries() const { return entries_; }

 private:
  int dim_;
  TableKind kind_;
  std::map<std::string, Vec> entries_;
};

/// Embedding file: header line "dim=<int> kind=<concept|context>", then one
/// line per entry: id, whitespace, dim space-separated decimal reals.
EmbeddingTable load_table(std::istream& in, const std::string& origin);
EmbeddingTable load_table_file(const std::string& path);
void save_table(std::ostream& out, const EmbeddingTable& table);

/// Deterministic pseudo-random unit vector derived from hash(id, seed).
/// Same inputs always produce the identical vector.
Vec synthetic_embed(const std::string& id, int dim, std::uint64_t seed);

/// Mock document encoder: unit-normalized mean of the synthetic concept
/// vectors of the document's concepts. Returns a zero vector when the
/// concept list is empty.
Vec doc_vector(const std::vector<ConceptId>& concepts, int dim, std::uint64_t seed);

/// Concept ids detected in text via the lexicon, in order of first
/// appearance, deduplicated. Tokens are maximal runs of [A-Za-z0-9_:-].
std::vector<ConceptId> detect_concepts(const std::string& text, const Lexicon& lexicon);

/// Mock text encoder: unit-normalized mean of the synthetic vectors of the
/// concepts detected in the text. Zero vector when nothing is detected.
Vec text_vector(const std::string& text, const Lexicon& lexicon, int dim, std::uint64_t seed);

}  // namespace hgcr::embed
