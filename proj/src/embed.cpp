#include "hgcr/embed.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hgcr/rng.hpp"

namespace hgcr::embed {

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    raise(ErrorCode::DimMismatch, "dot: dims " + std::to_string(a.size()) + " vs " +
                                      std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

double cosine(const Vec& a, const Vec& b) {
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    raise(ErrorCode::ZeroVector, "cosine of a zero vector is undefined");
  }
  return dot(a, b) / (na * nb);
}

double cosine_or_zero(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return 0.0;
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

const char* table_kind_name(TableKind kind) {
  return kind == TableKind::concept_space ? "concept" : "context";
}

void EmbeddingTable::insert(const std::string& id, Vec v) {
  if (static_cast<int>(v.size()) != dim_) {
    raise(ErrorCode::DimMismatch, "entry '" + id + "' has dim " + std::to_string(v.size()) +
                                      ", table dim is " + std::to_string(dim_));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      raise(ErrorCode::ParseError, "entry '" + id + "' contains a non-finite value");
    }
  }
  auto [it, inserted] = entries_.emplace(id, std::move(v));
  if (!inserted) {
    raise(ErrorCode::DuplicateId, "entry '" + id + "' repeated");
  }
}

const Vec& EmbeddingTable::lookup(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    raise(ErrorCode::UnknownId, std::string("no ") + table_kind_name(kind_) +
                                    " embedding for id '" + id + "'");
  }
  return it->second;
}

EmbeddingTable load_table(std::istream& in, const std::string& origin) {
  std::string header;
  if (!std::getline(in, header)) {
    raise(ErrorCode::ParseError, origin + ": empty embedding file");
  }
  int dim = 0;
  std::string kind_str;
  {
    std::istringstream hs(header);
    std::string dim_field, kind_field;
    hs >> dim_field >> kind_field;
    if (dim_field.rfind("dim=", 0) != 0 || kind_field.rfind("kind=", 0) != 0) {
      raise(ErrorCode::ParseError, origin + ": header must be 'dim=<int> kind=<concept|context>'");
    }
    try {
      dim = std::stoi(dim_field.substr(4));
    } catch (const std::exception&) {
      raise(ErrorCode::ParseError, origin + ": bad dim in header");
    }
    kind_str = kind_field.substr(5);
  }
  if (dim <= 0) {
    raise(ErrorCode::ParseError, origin + ": dim must be positive");
  }
  TableKind kind;
  if (kind_str == "concept") {
    kind = TableKind::concept_space;
  } else if (kind_str == "context") {
    kind = TableKind::context_space;
  } else {
    raise(ErrorCode::ParseError, origin + ": kind must be 'concept' or 'context'");
  }

  EmbeddingTable table(dim, kind);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id;
    ls >> id;
    if (id.empty()) {
      raise(ErrorCode::ParseError, origin + " line " + std::to_string(line_no) + ": missing id");
    }
    Vec v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) {
      raise(ErrorCode::ParseError, origin + " line " + std::to_string(line_no) + ": bad number");
    }
    if (static_cast<int>(v.size()) != dim) {
      raise(ErrorCode::DimMismatch, origin + " line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(dim) + " values, got " +
                                        std::to_string(v.size()));
    }
    table.insert(id, std::move(v));
  }
  return table;
}

EmbeddingTable load_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open embedding file '" + path + "'");
  }
  return load_table(in, path);
}

void save_table(std::ostream& out, const EmbeddingTable& table) {
  out << "dim=" << table.dim() << " kind=" << table_kind_name(table.kind()) << '\n';
  char buf[32];
  for (const auto& [id, v] : table.entries()) {
    out << id;
    for (double x : v) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

Vec synthetic_embed(const std::string& id, int dim, std::uint64_t seed) {
  rng::Stream stream(rng::mix(seed, rng::fnv1a64(id)));
  Vec v(dim);
  double sq = 0.0;
  for (int i = 0; i < dim; ++i) {
    v[i] = stream.gaussian();
    sq += v[i] * v[i];
  }
  // regenerate on the (measure-zero) chance of an all-zero draw
  if (sq == 0.0) {
    v[0] = 1.0;
    sq = 1.0;
  }
  double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return v;
}

namespace {

Vec normalized_mean(const std::vector<Vec>& vs, int dim) {
  Vec mean(dim, 0.0);
  if (vs.empty()) return mean;
  for (const Vec& v : vs) {
    for (int i = 0; i < dim; ++i) mean[i] += v[i];
  }
  for (double& x : mean) x /= static_cast<double>(vs.size());
  double n = norm(mean);
  if (n > 0.0) {
    for (double& x : mean) x /= n;
  }
  return mean;
}

}  // namespace

Vec doc_vector(const std::vector<ConceptId>& concepts, int dim, std::uint64_t seed) {
  std::vector<Vec> vs;
  vs.reserve(concepts.size());
  for (const ConceptId& c : concepts) vs.push_back(synthetic_embed(c, dim, seed));
  return normalized_mean(vs, dim);
}

std::vector<ConceptId> detect_concepts(const std::string& text, const Lexicon& lexicon) {
  std::vector<ConceptId> out;
  std::set<ConceptId> seen;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    auto it = lexicon.find(token);
    if (it != lexicon.end() && seen.insert(it->second).second) {
      out.push_back(it->second);
    }
    token.clear();
  };
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '_' || ch == ':' || ch == '-') {
      token.push_back(ch);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Vec text_vector(const std::string& text, const Lexicon& lexicon, int dim, std::uint64_t seed) {
  std::vector<Vec> vs;
  for (const ConceptId& c : detect_concepts(text, lexicon)) {
    vs.push_back(synthetic_embed(c, dim, seed));
  }
  return normalized_mean(vs, dim);
}

}  // namespace hgcr::embed
