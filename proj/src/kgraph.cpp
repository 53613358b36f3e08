#include "hgcr/kgraph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hgcr::kgraph {

using nlohmann::json;

void TemporalGraph::add_document(const DocRecord& doc) {
  if (frozen_) {
    raise(ErrorCode::FrozenGraph, "cannot add document '" + doc.doc_id + "' to a frozen graph");
  }
  if (doc_index_.count(doc.doc_id)) {
    raise(ErrorCode::DuplicateDocument, "document '" + doc.doc_id + "' already ingested");
  }

  DocRecord stored = doc;
  std::set<ConceptId> unique(doc.concepts.begin(), doc.concepts.end());
  stored.concepts.assign(unique.begin(), unique.end());

  std::size_t index = docs_.size();
  docs_.push_back(std::move(stored));
  doc_index_[doc.doc_id] = index;

  const DocRecord& rec = docs_.back();
  for (const ConceptId& c : rec.concepts) {
    nodes_.insert(c);
    docs_by_concept_[c].push_back(index);
    auto [it, inserted] = first_mention_.emplace(c, rec.year);
    if (!inserted && rec.year < it->second) it->second = rec.year;
  }

  for (auto a = rec.concepts.begin(); a != rec.concepts.end(); ++a) {
    for (auto b = std::next(a); b != rec.concepts.end(); ++b) {
      EdgeKey key = make_edge_key(*a, *b);
      auto [it, inserted] = edges_.try_emplace(key, Edge{key.first, key.second, {}, rec.year});
      it->second.evidence.push_back({rec.doc_id, rec.year});
      if (rec.year < it->second.first_year) it->second.first_year = rec.year;
      adjacency_[*a].insert(*b);
      adjacency_[*b].insert(*a);
    }
  }
}

void TemporalGraph::freeze() {
  if (frozen_) return;
  for (auto& [key, edge] : edges_) {
    std::sort(edge.evidence.begin(), edge.evidence.end(),
              [](const Evidence& x, const Evidence& y) {
                if (x.year != y.year) return x.year > y.year;
                return x.doc_id < y.doc_id;
              });
  }
  frozen_ = true;
}

SnapshotView TemporalGraph::snapshot(int t) const {
  if (!frozen_) {
    raise(ErrorCode::NotFrozen, "snapshot requires a frozen graph");
  }
  return SnapshotView(*this, t);
}

const DocRecord* TemporalGraph::find_doc(const DocId& id) const {
  auto it = doc_index_.find(id);
  return it == doc_index_.end() ? nullptr : &docs_[it->second];
}

const std::vector<std::size_t>& TemporalGraph::doc_indices_for(const ConceptId& c) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = docs_by_concept_.find(c);
  return it == docs_by_concept_.end() ? kEmpty : it->second;
}

const Edge* TemporalGraph::find_edge(const ConceptId& a, const ConceptId& b) const {
  auto it = edges_.find(make_edge_key(a, b));
  return it == edges_.end() ? nullptr : &it->second;
}

std::optional<int> TemporalGraph::first_mention_year(const ConceptId& c) const {
  auto it = first_mention_.find(c);
  if (it == first_mention_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> TemporalGraph::min_year() const {
  std::optional<int> y;
  for (const DocRecord& d : docs_) {
    if (!y || d.year < *y) y = d.year;
  }
  return y;
}

std::optional<int> TemporalGraph::max_year() const {
  std::optional<int> y;
  for (const DocRecord& d : docs_) {
    if (!y || d.year > *y) y = d.year;
  }
  return y;
}

bool SnapshotView::has_node(const ConceptId& c) const {
  auto year = base_->first_mention_year(c);
  return year && *year <= t_;
}

std::set<ConceptId> SnapshotView::nodes() const {
  std::set<ConceptId> out;
  for (const auto& [c, year] : base_->first_mention_) {
    if (year <= t_) out.insert(c);
  }
  return out;
}

bool SnapshotView::has_edge(const ConceptId& a, const ConceptId& b) const {
  const Edge* e = base_->find_edge(a, b);
  return e && e->first_year <= t_;
}

std::set<ConceptId> SnapshotView::neighbors(const ConceptId& c) const {
  if (!base_->nodes().count(c)) {
    raise(ErrorCode::UnknownConcept, "concept '" + c + "' not in graph");
  }
  std::set<ConceptId> out;
  auto it = base_->adjacency_.find(c);
  if (it == base_->adjacency_.end()) return out;
  for (const ConceptId& d : it->second) {
    if (has_edge(c, d)) out.insert(d);
  }
  return out;
}

std::vector<Evidence> SnapshotView::edge_evidence(const ConceptId& u, const ConceptId& v) const {
  const Edge* e = base_->find_edge(u, v);
  if (!e || e->first_year > t_) {
    raise(ErrorCode::NoSuchEdge, "edge (" + u + ", " + v + ") not in view at t=" + std::to_string(t_));
  }
  std::vector<Evidence> out;
  for (const Evidence& ev : e->evidence) {
    if (ev.year <= t_) out.push_back(ev);
  }
  return out;
}

std::vector<DocId> SnapshotView::edge_context_docs(const ConceptId& u, const ConceptId& v) const {
  std::vector<DocId> out;
  for (const Evidence& ev : edge_evidence(u, v)) out.push_back(ev.doc_id);
  return out;
}

std::vector<EdgeKey> SnapshotView::edge_keys() const {
  std::vector<EdgeKey> out;
  for (const auto& [key, edge] : base_->edges_) {
    if (edge.first_year <= t_) out.push_back(key);
  }
  return out;
}

std::size_t SnapshotView::edge_count() const {
  std::size_t n = 0;
  for (const auto& [key, edge] : base_->edges_) {
    if (edge.first_year <= t_) ++n;
  }
  return n;
}

std::vector<DocId> SnapshotView::docs_mentioning(const ConceptId& c) const {
  std::vector<DocId> out;
  for (std::size_t i : base_->doc_indices_for(c)) {
    if (base_->docs_[i].year <= t_) out.push_back(base_->docs_[i].doc_id);
  }
  return out;
}

namespace {

DocRecord parse_doc(const json& j, std::size_t line_no) {
  if (!j.is_object()) {
    raise(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": expected an object");
  }
  DocRecord doc;
  try {
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.year = j.at("year").get<int>();
    for (const auto& c : j.at("concepts")) doc.concepts.push_back(c.get<std::string>());
    if (j.contains("text")) doc.text = j.at("text").get<std::string>();
    if (j.contains("title_concepts")) {
      for (const auto& c : j.at("title_concepts")) doc.title_concepts.push_back(c.get<std::string>());
    }
    if (j.contains("predicates")) {
      for (const auto& p : j.at("predicates")) {
        doc.predicates.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>(),
                                  p.at(2).get<std::string>()});
      }
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": " + e.what());
  }
  if (doc.doc_id.empty()) {
    raise(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": empty doc_id");
  }
  return doc;
}

json doc_to_json(const DocRecord& doc) {
  json j{{"doc_id", doc.doc_id}, {"year", doc.year}, {"concepts", doc.concepts}};
  if (!doc.text.empty()) j["text"] = doc.text;
  if (!doc.title_concepts.empty()) j["title_concepts"] = doc.title_concepts;
  if (!doc.predicates.empty()) {
    json preds = json::array();
    for (const DocPredicate& p : doc.predicates) {
      preds.push_back(json::array({p.subject, p.verb, p.object}));
    }
    j["predicates"] = preds;
  }
  return j;
}

}  // namespace

std::vector<DocRecord> read_corpus(std::istream& in) {
  std::vector<DocRecord> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      raise(ErrorCode::ParseError, "corpus line " + std::to_string(line_no) + ": invalid JSON");
    }
    docs.push_back(parse_doc(j, line_no));
  }
  return docs;
}

std::vector<DocRecord> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open corpus file '" + path + "'");
  }
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<DocRecord>& docs) {
  for (const DocRecord& doc : docs) {
    out << doc_to_json(doc).dump() << '\n';
  }
}

TemporalGraph build_graph(const std::vector<DocRecord>& docs) {
  TemporalGraph g;
  for (const DocRecord& doc : docs) g.add_document(doc);
  g.freeze();
  return g;
}

void save_graph(const std::string& path, const TemporalGraph& g) {
  std::ofstream out(path);
  if (!out) {
    raise(ErrorCode::IoError, "cannot open graph file '" + path + "' for writing");
  }
  json meta{{"type", "graph_meta"},
            {"nodes", g.node_count()},
            {"edges", g.edge_count()},
            {"docs", g.doc_count()}};
  out << meta.dump() << '\n';
  write_corpus(out, g.docs());
}

TemporalGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open graph file '" + path + "'");
  }
  std::string meta_line;
  if (!std::getline(in, meta_line)) {
    raise(ErrorCode::ParseError, "graph file '" + path + "' is empty");
  }
  json meta = json::parse(meta_line, nullptr, false);
  if (meta.is_discarded() || meta.value("type", "") != "graph_meta") {
    raise(ErrorCode::ParseError, "graph file '" + path + "' missing meta line");
  }
  return build_graph(read_corpus(in));
}

}  // namespace hgcr::kgraph
