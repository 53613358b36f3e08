#include "hgcr/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hgcr/rng.hpp"

namespace hgcr::ranker {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void fill_uniform(Mat& m, std::uint64_t seed, double bound) {
  rng::Stream stream(seed);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = stream.uniform(-bound, bound);
  }
}

}  // namespace

void RankerConfig::validate() const {
  if (d_model <= 0 || heads <= 0 || d_model % heads != 0) {
    raise(ErrorCode::ShapeMismatch, "d_model must be a positive multiple of heads");
  }
  if (d_n <= 0 || d_p <= 0) {
    raise(ErrorCode::ShapeMismatch, "d_n and d_p must be positive");
  }
  if (margin <= 0.0) {
    raise(ErrorCode::ConfigError, "margin must be > 0");
  }
  if (lr <= 0.0) {
    raise(ErrorCode::ConfigError, "lr must be > 0");
  }
}

RankerParams zero_params(const RankerConfig& config) {
  config.validate();
  std::size_t dm = static_cast<std::size_t>(config.d_model);
  RankerParams p;
  p.config = config;
  p.proj_ctx = Mat(static_cast<std::size_t>(config.d_p), dm);
  p.proj_node = Mat(static_cast<std::size_t>(config.d_n), dm);
  for (AttentionWeights* block : {&p.self_attn, &p.cross_attn}) {
    block->wq = Mat(dm, dm);
    block->wk = Mat(dm, dm);
    block->wv = Mat(dm, dm);
    block->wo = Mat(dm, dm);
  }
  p.head_w = Mat(1, dm);
  p.bias = Mat(1, 1);
  return p;
}

RankerParams init_params(const RankerConfig& config) {
  RankerParams p = zero_params(config);
  std::uint64_t base = rng::derive(config.seed, "init");
  p.for_each_tensor([&](const char* name, Mat& m) {
    if (std::string_view(name) == "bias") return;  // bias starts at zero
    double bound = 1.0 / std::sqrt(static_cast<double>(m.rows()));
    fill_uniform(m, rng::derive(base, name), bound);
  });
  return p;
}

namespace {

struct AttentionOut {
  Mat q, k, v;            // inputs x d_model
  std::vector<Mat> attn;  // per head, queries x keys
  Mat concat;             // queries x d_model
  Mat out;                // queries x d_model
};

AttentionOut attention_forward(const AttentionWeights& w, const Mat& queries_in,
                               const Mat& keys_in, int heads) {
  AttentionOut r;
  r.q = linalg::matmul(queries_in, w.wq);
  r.k = linalg::matmul(keys_in, w.wk);
  r.v = linalg::matmul(keys_in, w.wv);
  std::size_t dm = w.wq.cols();
  std::size_t dh = dm / static_cast<std::size_t>(heads);
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  r.concat = Mat(queries_in.rows(), dm);
  for (int h = 0; h < heads; ++h) {
    std::size_t col0 = static_cast<std::size_t>(h) * dh;
    Mat qh = linalg::slice_cols(r.q, col0, dh);
    Mat kh = linalg::slice_cols(r.k, col0, dh);
    Mat vh = linalg::slice_cols(r.v, col0, dh);
    Mat scores = linalg::matmul_nt(qh, kh);
    linalg::scale_inplace(scores, scale);
    Mat attn = linalg::softmax_rows(scores);
    Mat head_out = linalg::matmul(attn, vh);
    linalg::add_into_cols(r.concat, col0, head_out);
    r.attn.push_back(std::move(attn));
  }
  r.out = linalg::matmul(r.concat, w.wo);
  return r;
}

struct AttentionGrads {
  Mat d_queries_in;
  Mat d_keys_in;
};

/// Backward through one attention block. d_out is the gradient at the block
/// output; weight gradients accumulate into gw.
AttentionGrads attention_backward(const AttentionWeights& w, AttentionWeights& gw,
                                  const Mat& queries_in, const Mat& keys_in, const Mat& q,
                                  const Mat& k, const Mat& v, const std::vector<Mat>& attn,
                                  const Mat& concat, const Mat& d_out, int heads) {
  std::size_t dm = w.wq.cols();
  std::size_t dh = dm / static_cast<std::size_t>(heads);
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  linalg::add_inplace(gw.wo, linalg::matmul_tn(concat, d_out));
  Mat d_concat = linalg::matmul_nt(d_out, w.wo);

  Mat dq(q.rows(), dm), dk(k.rows(), dm), dv(v.rows(), dm);
  for (int h = 0; h < heads; ++h) {
    std::size_t col0 = static_cast<std::size_t>(h) * dh;
    Mat qh = linalg::slice_cols(q, col0, dh);
    Mat kh = linalg::slice_cols(k, col0, dh);
    Mat vh = linalg::slice_cols(v, col0, dh);
    Mat d_head_out = linalg::slice_cols(d_concat, col0, dh);

    Mat d_attn = linalg::matmul_nt(d_head_out, vh);
    Mat d_vh = linalg::matmul_tn(attn[h], d_head_out);
    Mat d_scores = linalg::softmax_rows_backward(attn[h], d_attn);
    linalg::scale_inplace(d_scores, scale);
    Mat d_qh = linalg::matmul(d_scores, kh);
    Mat d_kh = linalg::matmul_tn(d_scores, qh);

    linalg::add_into_cols(dq, col0, d_qh);
    linalg::add_into_cols(dk, col0, d_kh);
    linalg::add_into_cols(dv, col0, d_vh);
  }

  linalg::add_inplace(gw.wq, linalg::matmul_tn(queries_in, dq));
  linalg::add_inplace(gw.wk, linalg::matmul_tn(keys_in, dk));
  linalg::add_inplace(gw.wv, linalg::matmul_tn(keys_in, dv));

  AttentionGrads g;
  g.d_queries_in = linalg::matmul_nt(dq, w.wq);
  g.d_keys_in = linalg::matmul_nt(dk, w.wk);
  linalg::add_inplace(g.d_keys_in, linalg::matmul_nt(dv, w.wv));
  return g;
}

}  // namespace

double forward(const RankerParams& params, const Mat& ctx, const Mat& nodes,
               ForwardCache* cache) {
  const RankerConfig& cfg = params.config;
  if (ctx.rows() < 1) {
    raise(ErrorCode::ShapeMismatch, "need at least one context row");
  }
  if (nodes.rows() < 3) {
    raise(ErrorCode::ShapeMismatch, "need at least three path-node rows");
  }
  if (ctx.cols() != static_cast<std::size_t>(cfg.d_p)) {
    raise(ErrorCode::ShapeMismatch, "context dim " + std::to_string(ctx.cols()) +
                                        " != d_p " + std::to_string(cfg.d_p));
  }
  if (nodes.cols() != static_cast<std::size_t>(cfg.d_n)) {
    raise(ErrorCode::ShapeMismatch, "node dim " + std::to_string(nodes.cols()) +
                                        " != d_n " + std::to_string(cfg.d_n));
  }

  Mat c0 = linalg::matmul(ctx, params.proj_ctx);
  Mat p0 = linalg::matmul(nodes, params.proj_node);

  AttentionOut self = attention_forward(params.self_attn, c0, c0, cfg.heads);
  AttentionOut cross = attention_forward(params.cross_attn, self.out, p0, cfg.heads);

  std::size_t m = ctx.rows();
  std::size_t dm = static_cast<std::size_t>(cfg.d_model);
  std::vector<double> pooled(dm, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < dm; ++j) pooled[j] += cross.out.at(i, j);
  }
  for (double& x : pooled) x /= static_cast<double>(m);

  double z = params.bias.at(0, 0);
  for (std::size_t j = 0; j < dm; ++j) z += params.head_w.at(0, j) * pooled[j];
  double score = sigmoid(z);

  if (cache) {
    cache->ctx_in = ctx;
    cache->node_in = nodes;
    cache->c0 = std::move(c0);
    cache->p0 = std::move(p0);
    cache->qs = std::move(self.q);
    cache->ks = std::move(self.k);
    cache->vs = std::move(self.v);
    cache->attn_self = std::move(self.attn);
    cache->concat_self = std::move(self.concat);
    cache->cprime = std::move(self.out);
    cache->qc = std::move(cross.q);
    cache->kc = std::move(cross.k);
    cache->vc = std::move(cross.v);
    cache->attn_cross = std::move(cross.attn);
    cache->concat_cross = std::move(cross.concat);
    cache->pooled = std::move(pooled);
    cache->z = z;
    cache->score = score;
  }
  return score;
}

void backward(const RankerParams& params, const ForwardCache& cache, double dscore,
              RankerParams& grads) {
  const RankerConfig& cfg = params.config;
  std::size_t m = cache.ctx_in.rows();
  std::size_t dm = static_cast<std::size_t>(cfg.d_model);

  double dz = dscore * cache.score * (1.0 - cache.score);
  grads.bias.at(0, 0) += dz;
  for (std::size_t j = 0; j < dm; ++j) {
    grads.head_w.at(0, j) += dz * cache.pooled[j];
  }

  Mat d_cross_out(m, dm);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < dm; ++j) {
      d_cross_out.at(i, j) = dz * params.head_w.at(0, j) / static_cast<double>(m);
    }
  }

  AttentionGrads cross_g = attention_backward(
      params.cross_attn, grads.cross_attn, cache.cprime, cache.p0, cache.qc, cache.kc, cache.vc,
      cache.attn_cross, cache.concat_cross, d_cross_out, cfg.heads);

  AttentionGrads self_g = attention_backward(
      params.self_attn, grads.self_attn, cache.c0, cache.c0, cache.qs, cache.ks, cache.vs,
      cache.attn_self, cache.concat_self, cross_g.d_queries_in, cfg.heads);

  Mat d_c0 = self_g.d_queries_in;
  linalg::add_inplace(d_c0, self_g.d_keys_in);

  linalg::add_inplace(grads.proj_ctx, linalg::matmul_tn(cache.ctx_in, d_c0));
  linalg::add_inplace(grads.proj_node, linalg::matmul_tn(cache.node_in, cross_g.d_keys_in));
}

double margin_loss(double s_pos, const std::vector<double>& s_negs, double margin) {
  if (s_negs.empty()) {
    raise(ErrorCode::EmptyNegatives, "margin loss needs at least one negative score");
  }
  double total = 0.0;
  for (double s_neg : s_negs) {
    total += std::max(0.0, margin - (s_pos - s_neg));
  }
  return total / static_cast<double>(s_negs.size());
}

GradientResult gradients(const RankerParams& params, const TrainGroup& group) {
  if (group.negatives.empty()) {
    raise(ErrorCode::EmptyNegatives, "group has no negative samples");
  }
  GradientResult result;
  result.grads = zero_params(params.config);

  ForwardCache pos_cache;
  double s_pos = forward(params, group.positive.ctx, group.positive.nodes, &pos_cache);

  std::vector<ForwardCache> neg_caches(group.negatives.size());
  std::vector<double> s_negs(group.negatives.size());
  for (std::size_t i = 0; i < group.negatives.size(); ++i) {
    s_negs[i] = forward(params, group.negatives[i].ctx, group.negatives[i].nodes, &neg_caches[i]);
  }

  double n = static_cast<double>(group.negatives.size());
  double margin = params.config.margin;
  double d_pos = 0.0;
  for (std::size_t i = 0; i < group.negatives.size(); ++i) {
    double hinge = margin - (s_pos - s_negs[i]);
    result.loss += std::max(0.0, hinge);
    if (hinge > 0.0) {
      d_pos -= 1.0 / n;
      backward(params, neg_caches[i], 1.0 / n, result.grads);
    }
  }
  result.loss /= n;
  if (d_pos != 0.0) {
    backward(params, pos_cache, d_pos, result.grads);
  }
  return result;
}

TrainResult train(const RankerConfig& config, const std::vector<TrainGroup>& groups) {
  config.validate();
  if (groups.empty()) {
    raise(ErrorCode::EmptyDataset, "training requires at least one group");
  }
  for (const TrainGroup& g : groups) {
    if (g.negatives.empty()) {
      raise(ErrorCode::EmptyNegatives, "every group needs at least one negative");
    }
  }

  TrainResult result;
  result.params = init_params(config);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (const TrainGroup& group : groups) {
      GradientResult g = gradients(result.params, group);
      epoch_loss += g.loss;
      result.params.for_each_tensor([&](const char* name, Mat& m) {
        Mat* gm = nullptr;
        g.grads.for_each_tensor([&](const char* gname, Mat& cand) {
          if (std::string_view(gname) == name) gm = &cand;
        });
        linalg::axpy_inplace(m, -config.lr, *gm);
      });
    }
    result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(groups.size()));
  }
  return result;
}

SampleMats sample_mats(const pathgen::LabeledPathSample& sample,
                       const embed::EmbeddingTable& concepts,
                       const embed::EmbeddingTable& contexts) {
  SampleMats mats;
  mats.ctx = Mat(sample.contexts.size(), static_cast<std::size_t>(contexts.dim()));
  for (std::size_t i = 0; i < sample.contexts.size(); ++i) {
    mats.ctx.set_row(i, contexts.lookup(sample.contexts[i]));
  }
  mats.nodes = Mat(sample.path.nodes.size(), static_cast<std::size_t>(concepts.dim()));
  for (std::size_t i = 0; i < sample.path.nodes.size(); ++i) {
    mats.nodes.set_row(i, concepts.lookup(sample.path.nodes[i]));
  }
  return mats;
}

std::vector<ScoredSample> score_paths(const RankerParams& params,
                                      const std::vector<pathgen::LabeledPathSample>& samples,
                                      const embed::EmbeddingTable& concepts,
                                      const embed::EmbeddingTable& contexts) {
  std::vector<ScoredSample> scored;
  scored.reserve(samples.size());
  for (const pathgen::LabeledPathSample& s : samples) {
    SampleMats mats = sample_mats(s, concepts, contexts);
    scored.push_back({s, forward(params, mats.ctx, mats.nodes)});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const ScoredSample& a, const ScoredSample& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.sample.path.nodes < b.sample.path.nodes;
  });
  return scored;
}

namespace {

void write_double(std::ostream& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out << buf;
}

}  // namespace

void save_checkpoint(std::ostream& out, const RankerParams& params) {
  const RankerConfig& c = params.config;
  out << "hgcr-checkpoint v1\n";
  out << "d_model=" << c.d_model << "\nheads=" << c.heads << "\nd_n=" << c.d_n
      << "\nd_p=" << c.d_p << "\nmargin=";
  write_double(out, c.margin);
  out << "\nlr=";
  write_double(out, c.lr);
  out << "\nepochs=" << c.epochs << "\nseed=" << c.seed << "\n";
  params.for_each_tensor([&](const char* name, const Mat& m) {
    out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j) out << ' ';
        write_double(out, m.at(i, j));
      }
      out << '\n';
    }
  });
  out << "end\n";
}

void save_checkpoint_file(const std::string& path, const RankerParams& params) {
  std::ofstream out(path);
  if (!out) {
    raise(ErrorCode::IoError, "cannot open checkpoint file '" + path + "' for writing");
  }
  save_checkpoint(out, params);
}

RankerParams load_checkpoint(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line) || line != "hgcr-checkpoint v1") {
    raise(ErrorCode::ParseError, origin + ": not a checkpoint file");
  }
  RankerConfig cfg;
  auto read_kv = [&](const std::string& key) -> std::string {
    if (!std::getline(in, line) || line.rfind(key + "=", 0) != 0) {
      raise(ErrorCode::ParseError, origin + ": expected '" + key + "='");
    }
    return line.substr(key.size() + 1);
  };
  try {
    cfg.d_model = std::stoi(read_kv("d_model"));
    cfg.heads = std::stoi(read_kv("heads"));
    cfg.d_n = std::stoi(read_kv("d_n"));
    cfg.d_p = std::stoi(read_kv("d_p"));
    cfg.margin = std::strtod(read_kv("margin").c_str(), nullptr);
    cfg.lr = std::strtod(read_kv("lr").c_str(), nullptr);
    cfg.epochs = std::stoi(read_kv("epochs"));
    cfg.seed = std::stoull(read_kv("seed"));
  } catch (const std::exception& e) {
    raise(ErrorCode::ParseError, origin + ": bad config value: " + e.what());
  }

  RankerParams params = zero_params(cfg);
  params.for_each_tensor([&](const char* name, Mat& m) {
    if (!std::getline(in, line)) {
      raise(ErrorCode::ParseError, origin + ": missing tensor '" + std::string(name) + "'");
    }
    std::istringstream header(line);
    std::string kw, tname;
    std::size_t rows = 0, cols = 0;
    header >> kw >> tname >> rows >> cols;
    if (kw != "tensor" || tname != name || rows != m.rows() || cols != m.cols()) {
      raise(ErrorCode::ParseError, origin + ": tensor header mismatch for '" +
                                       std::string(name) + "' (got '" + line + "')");
    }
    for (std::size_t i = 0; i < rows; ++i) {
      if (!std::getline(in, line)) {
        raise(ErrorCode::ParseError, origin + ": truncated tensor '" + std::string(name) + "'");
      }
      const char* p = line.c_str();
      char* end = nullptr;
      for (std::size_t j = 0; j < cols; ++j) {
        double x = std::strtod(p, &end);
        if (end == p) {
          raise(ErrorCode::ParseError, origin + ": bad value in tensor '" + std::string(name) + "'");
        }
        m.at(i, j) = x;
        p = end;
      }
    }
  });
  if (!std::getline(in, line) || line != "end") {
    raise(ErrorCode::ParseError, origin + ": missing end marker");
  }
  return params;
}

RankerParams load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(ErrorCode::IoError, "cannot open checkpoint file '" + path + "'");
  }
  return load_checkpoint(in, path);
}

}  // namespace hgcr::ranker
