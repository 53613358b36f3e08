#include "hgcr/pathgen.hpp"

#include <algorithm>
#include <fstream>

#include "hgcr/rng.hpp"
#include "json.hpp"

namespace hgcr::pathgen {

using nlohmann::json;

bool operator==(const Query& a, const Query& b) {
  return a.source == b.source && a.target == b.target && a.t == b.t;
}

void check_query(const kgraph::TemporalGraph& g, const Query& q) {
  if (q.source == q.target) {
    raise(ErrorCode::EndpointMismatch, "query endpoints must differ");
  }
  if (!g.snapshot(q.t).has_edge(q.source, q.target)) {
    raise(ErrorCode::NoSuchEdge,
          "query (" + q.source + ", " + q.target + ") has no edge at t=" + std::to_string(q.t));
  }
  if (g.snapshot(q.t - 1).has_edge(q.source, q.target)) {
    raise(ErrorCode::DirectEdgePresent,
          "query (" + q.source + ", " + q.target + ") already connected before t=" +
              std::to_string(q.t));
  }
}

std::vector<DocId> Path::flattened_contexts() const {
  std::vector<DocId> out;
  std::set<DocId> seen;
  for (const auto& ctx : edge_contexts) {
    for (const DocId& d : ctx) {
      if (seen.insert(d).second) out.push_back(d);
    }
  }
  return out;
}

const char* label_name(Label label) {
  return label == Label::positive ? "positive" : "negative";
}

const char* negative_kind_name(NegativeKind kind) {
  switch (kind) {
    case NegativeKind::none: return "none";
    case NegativeKind::hard: return "hard";
    case NegativeKind::corrupted_path: return "corrupted_path";
    case NegativeKind::corrupted_context: return "corrupted_context";
  }
  return "none";
}

Label label_from_name(const std::string& name) {
  if (name == "positive") return Label::positive;
  if (name == "negative") return Label::negative;
  raise(ErrorCode::ParseError, "unknown label '" + name + "'");
}

NegativeKind negative_kind_from_name(const std::string& name) {
  if (name == "none") return NegativeKind::none;
  if (name == "hard") return NegativeKind::hard;
  if (name == "corrupted_path") return NegativeKind::corrupted_path;
  if (name == "corrupted_context") return NegativeKind::corrupted_context;
  raise(ErrorCode::ParseError, "unknown negative kind '" + name + "'");
}

FutureReferenceSet future_reference(const kgraph::TemporalGraph& g, const Query& q) {
  FutureReferenceSet fr;
  fr.query = q;
  for (std::size_t i : g.doc_indices_for(q.source)) {
    const kgraph::DocRecord& doc = g.docs()[i];
    if (doc.year != q.t) continue;
    if (std::find(doc.concepts.begin(), doc.concepts.end(), q.target) == doc.concepts.end()) {
      continue;
    }
    fr.abstracts.insert(doc.doc_id);
    for (const ConceptId& c : doc.concepts) {
      if (c != q.source && c != q.target) fr.terms.insert(c);
    }
  }
  if (fr.abstracts.empty()) {
    raise(ErrorCode::NoFutureEvidence, "no document at t=" + std::to_string(q.t) +
                                           " co-mentions (" + q.source + ", " + q.target + ")");
  }
  return fr;
}

std::vector<Path> enumerate_candidate_paths(const kgraph::SnapshotView& view, const Query& q,
                                            int max_nodes, std::size_t cap_per_length) {
  if (max_nodes < 3 || max_nodes > 4) {
    raise(ErrorCode::ConfigError, "max_nodes must be 3 or 4");
  }
  if (view.has_edge(q.source, q.target)) {
    raise(ErrorCode::DirectEdgePresent, "(" + q.source + ", " + q.target +
                                            ") are directly connected at t=" +
                                            std::to_string(view.t()));
  }

  std::vector<std::vector<ConceptId>> found;
  if (view.has_node(q.source) && view.has_node(q.target)) {
    std::vector<ConceptId> stack{q.source};
    std::set<ConceptId> on_path{q.source};
    // neighbors() returns sorted sets, so the DFS emits node sequences in
    // lexicographic order already; we still sort below to keep the contract
    // independent of traversal details.
    auto dfs = [&](auto&& self, const ConceptId& current) -> void {
      if (static_cast<int>(stack.size()) >= max_nodes) return;
      for (const ConceptId& next : view.neighbors(current)) {
        if (on_path.count(next)) continue;
        if (next == q.target) {
          if (stack.size() >= 2) {  // at least one intermediate
            std::vector<ConceptId> path = stack;
            path.push_back(next);
            found.push_back(std::move(path));
          }
          continue;
        }
        stack.push_back(next);
        on_path.insert(next);
        self(self, next);
        on_path.erase(next);
        stack.pop_back();
      }
    };
    dfs(dfs, q.source);
  }

  if (found.empty()) {
    raise(ErrorCode::Disconnected, "no path of at most " + std::to_string(max_nodes) +
                                       " nodes between (" + q.source + ", " + q.target +
                                       ") at t=" + std::to_string(view.t()));
  }
  std::sort(found.begin(), found.end());

  std::vector<Path> out;
  std::map<std::size_t, std::size_t> kept_per_length;
  for (auto& nodes : found) {
    if (cap_per_length > 0 && kept_per_length[nodes.size()] >= cap_per_length) continue;
    ++kept_per_length[nodes.size()];
    Path p;
    p.nodes = std::move(nodes);
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
      p.edge_contexts.push_back(view.edge_context_docs(p.nodes[i], p.nodes[i + 1]));
    }
    out.push_back(std::move(p));
  }
  return out;
}

Label label_path(const Path& p, const FutureReferenceSet& fr) {
  if (p.nodes.size() < 3 || p.nodes.front() != fr.query.source ||
      p.nodes.back() != fr.query.target) {
    raise(ErrorCode::EndpointMismatch, "path endpoints do not match the query");
  }
  for (const ConceptId& c : p.intermediates()) {
    if (!fr.terms.count(c)) return Label::negative;
  }
  return Label::positive;
}

Path corrupt_path(const Path& p, const std::vector<ConceptId>& node_pool,
                  const kgraph::SnapshotView& view, std::uint64_t seed) {
  if (node_pool.empty()) {
    raise(ErrorCode::EmptyPool, "no replacement candidates for path corruption");
  }
  rng::Stream stream(seed);
  std::size_t n_inter = p.nodes.size() - 2;
  std::size_t position = 1 + stream.bounded(n_inter);
  const ConceptId& replacement = node_pool[stream.bounded(node_pool.size())];

  Path out = p;
  out.nodes[position] = replacement;
  for (std::size_t e : {position - 1, position}) {
    const ConceptId& a = out.nodes[e];
    const ConceptId& b = out.nodes[e + 1];
    if (view.has_edge(a, b)) {
      out.edge_contexts[e] = view.edge_context_docs(a, b);
    } else {
      // the replacement edge does not exist; degrade to documents mentioning
      // the replacement node alone
      out.edge_contexts[e] = view.docs_mentioning(replacement);
    }
  }
  return out;
}

LabeledPathSample corrupt_context(const LabeledPathSample& positive,
                                  const kgraph::SnapshotView& view, std::uint64_t seed) {
  const std::set<DocId> positive_docs(positive.contexts.begin(), positive.contexts.end());
  rng::Stream stream(seed);

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<DocId> draw;
    std::set<DocId> seen;
    for (const ConceptId& node : positive.path.nodes) {
      std::vector<DocId> docs = view.docs_mentioning(node);
      if (docs.empty()) continue;
      const DocId& pick = docs[stream.bounded(docs.size())];
      if (seen.insert(pick).second) draw.push_back(pick);
    }
    bool subset = std::all_of(draw.begin(), draw.end(),
                              [&](const DocId& d) { return positive_docs.count(d) != 0; });
    if (!draw.empty() && !subset) {
      LabeledPathSample out;
      out.query = positive.query;
      out.path = positive.path;
      out.contexts = std::move(draw);
      out.label = Label::negative;
      out.kind = NegativeKind::corrupted_context;
      return out;
    }
  }
  raise(ErrorCode::CannotDiffer,
        "per-node contexts cannot differ from the positive context set");
}

DatasetResult build_dataset(const kgraph::TemporalGraph& g, const std::vector<Query>& queries,
                            const DatasetCaps& caps, DatasetMode mode, std::uint64_t seed,
                            std::optional<int> sample_year, int max_nodes) {
  DatasetResult result;
  for (const Query& q : queries) {
    std::uint64_t query_seed =
        rng::derive(seed, "dataset:" + q.source + "|" + q.target + "|" + std::to_string(q.t));
    QueryStats stats;
    stats.query = q;
    try {
      check_query(g, q);
      FutureReferenceSet fr = future_reference(g, q);
      kgraph::SnapshotView view = g.snapshot(sample_year.value_or(q.t - 1));

      std::vector<Path> candidates = enumerate_candidate_paths(view, q, max_nodes, 0);

      std::vector<LabeledPathSample> positives;
      std::vector<LabeledPathSample> hard;
      std::map<std::size_t, std::size_t> hard_per_length;
      for (Path& p : candidates) {
        LabeledPathSample sample;
        sample.query = q;
        sample.contexts = p.flattened_contexts();
        sample.label = label_path(p, fr);
        sample.path = std::move(p);
        if (sample.label == Label::positive) {
          sample.kind = NegativeKind::none;
          positives.push_back(std::move(sample));
        } else {
          std::size_t cap =
              sample.path.node_length() == 3 ? caps.neg_len3 : caps.neg_len4;
          if (hard_per_length[sample.path.node_length()] < cap) {
            ++hard_per_length[sample.path.node_length()];
            sample.kind = NegativeKind::hard;
            hard.push_back(std::move(sample));
          }
        }
      }

      std::vector<LabeledPathSample> corrupted;
      if (mode == DatasetMode::training) {
        std::set<ConceptId> view_nodes = view.nodes();
        for (std::size_t i = 0; i < positives.size(); ++i) {
          const LabeledPathSample& pos = positives[i];
          std::vector<ConceptId> pool;
          for (const ConceptId& c : view_nodes) {
            if (std::find(pos.path.nodes.begin(), pos.path.nodes.end(), c) ==
                pos.path.nodes.end()) {
              pool.push_back(c);
            }
          }
          try {
            LabeledPathSample sample;
            sample.query = q;
            sample.path = corrupt_path(pos.path, pool, view,
                                       rng::mix(query_seed, 2 * i));
            sample.contexts = sample.path.flattened_contexts();
            sample.label = Label::negative;
            sample.kind = NegativeKind::corrupted_path;
            corrupted.push_back(std::move(sample));
            ++stats.corrupted_paths;
          } catch (const Error& e) {
            result.errors.push_back({q, error_code_name(e.code()), e.what()});
          }
          try {
            corrupted.push_back(corrupt_context(pos, view, rng::mix(query_seed, 2 * i + 1)));
            ++stats.corrupted_contexts;
          } catch (const Error& e) {
            result.errors.push_back({q, error_code_name(e.code()), e.what()});
          }
        }
      }

      stats.positives = positives.size();
      stats.hard_negatives = hard.size();
      std::size_t negatives = hard.size() + corrupted.size();
      stats.negative_to_positive_ratio =
          positives.empty() ? 0.0
                            : static_cast<double>(negatives) / static_cast<double>(positives.size());
      result.stats.push_back(stats);

      for (auto& s : positives) result.samples.push_back(std::move(s));
      for (auto& s : hard) result.samples.push_back(std::move(s));
      for (auto& s : corrupted) result.samples.push_back(std::move(s));
    } catch (const Error& e) {
      result.errors.push_back({q, error_code_name(e.code()), e.what()});
    }
  }
  return result;
}

std::vector<Query> filter_expl_queries(const kgraph::TemporalGraph& g,
                                       const std::vector<Query>& queries) {
  std::vector<Query> kept;
  for (const Query& q : queries) {
    bool keep = false;
    for (std::size_t i : g.doc_indices_for(q.source)) {
      const kgraph::DocRecord& doc = g.docs()[i];
      if (doc.year != q.t) continue;
      if (std::find(doc.concepts.begin(), doc.concepts.end(), q.target) == doc.concepts.end()) {
        continue;
      }
      bool title_src = std::find(doc.title_concepts.begin(), doc.title_concepts.end(),
                                 q.source) != doc.title_concepts.end();
      bool title_tgt = std::find(doc.title_concepts.begin(), doc.title_concepts.end(),
                                 q.target) != doc.title_concepts.end();
      if (title_src && title_tgt) {
        keep = true;
        break;
      }
      for (const kgraph::DocPredicate& p : doc.predicates) {
        if (p.subject == q.source && p.object == q.target) {
          keep = true;
          break;
        }
      }
      if (keep) break;
    }
    if (keep) kept.push_back(q);
  }
  return kept;
}

std::vector<Query> discover_queries(const kgraph::TemporalGraph& g, int split_year) {
  std::vector<Query> out;
  for (const auto& [key, edge] : g.edges()) {
    if (edge.first_year >= split_year) {
      out.push_back({key.first, key.second, edge.first_year});
    }
  }
  return out;
}

namespace {

json sample_to_json(const LabeledPathSample& s) {
  json contexts = json::array();
  for (const auto& edge_ctx : s.path.edge_contexts) contexts.push_back(edge_ctx);
  return json{{"query", {{"source", s.query.source}, {"target", s.query.target}, {"t", s.query.t}}},
              {"path_nodes", s.path.nodes},
              {"edge_contexts", contexts},
              {"context_doc_ids", s.contexts},
              {"label", label_name(s.label)},
              {"negative_kind", negative_kind_name(s.kind)},
              {"node_length", s.path.nodes.size()}};
}

LabeledPathSample sample_from_json(const json& j) {
  LabeledPathSample s;
  s.query.source = j.at("query").at("source").get<std::string>();
  s.query.target = j.at("query").at("target").get<std::string>();
  s.query.t = j.at("query").at("t").get<int>();
  for (const auto& n : j.at("path_nodes")) s.path.nodes.push_back(n.get<std::string>());
  for (const auto& ctx : j.at("edge_contexts")) {
    std::vector<DocId> docs;
    for (const auto& d : ctx) docs.push_back(d.get<std::string>());
    s.path.edge_contexts.push_back(std::move(docs));
  }
  for (const auto& d : j.at("context_doc_ids")) s.contexts.push_back(d.get<std::string>());
  s.label = label_from_name(j.at("label").get<std::string>());
  s.kind = negative_kind_from_name(j.at("negative_kind").get<std::string>());
  return s;
}

}  // namespace

void save_dataset(const std::string& path, const std::vector<LabeledPathSample>& samples) {
  std::ofstream out(path);
  if (!out) {
    raise(ErrorCode::IoError, "cannot open dataset file '" + path + "' for writing");
  }
  for (const LabeledPathSample& s : samples) out << sample_to_json(s).dump() << '\n';
}

std::vector<LabeledPathSample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open dataset file '" + path + "'");
  }
  std::vector<LabeledPathSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      raise(ErrorCode::ParseError, "dataset line " + std::to_string(line_no) + ": invalid JSON");
    }
    try {
      samples.push_back(sample_from_json(j));
    } catch (const json::exception& e) {
      raise(ErrorCode::ParseError, "dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

}  // namespace hgcr::pathgen
