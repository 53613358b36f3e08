#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hgcr/embed.hpp"
#include "hgcr/error.hpp"
#include "hgcr/linalg.hpp"
#include "hgcr/pathgen.hpp"

namespace hgcr::ranker {

using linalg::Mat;

struct RankerConfig {
  int d_model = 32;
  int heads = 2;
  int d_n = 32;
  int d_p = 32;
  double margin = 0.3;
  double lr = 0.05;
  int epochs = 200;
  std::uint64_t seed = 0;

  int head_dim() const { return d_model / heads; }
  void validate() const;
};

struct AttentionWeights {
  Mat wq, wk, wv, wo;  // each d_model x d_model; heads live in column blocks
};

/// All weights of the scorer: input projections, one multi-head
/// self-attention block over contexts, one cross-attention block onto path
/// nodes, and the pooled affine+sigmoid head.
struct RankerParams {
  RankerConfig config;
  Mat proj_ctx;   // d_p x d_model
  Mat proj_node;  // d_n x d_model
  AttentionWeights self_attn;
  AttentionWeights cross_attn;
  Mat head_w;  // 1 x d_model
  Mat bias;    // 1 x 1

  /// Visit every parameter tensor with a stable name, in a fixed order.
  template <typename F>
  void for_each_tensor(F&& f) {
    f("proj_ctx", proj_ctx);
    f("proj_node", proj_node);
    f("self_wq", self_attn.wq);
    f("self_wk", self_attn.wk);
    f("self_wv", self_attn.wv);
    f("self_wo", self_attn.wo);
    f("cross_wq", cross_attn.wq);
    f("cross_wk", cross_attn.wk);
    f("cross_wv", cross_attn.wv);
    f("cross_wo", cross_attn.wo);
    f("head_w", head_w);
    f("bias", bias);
  }

  template <typename F>
  void for_each_tensor(F&& f) const {
    const_cast<RankerParams*>(this)->for_each_tensor(
        [&](const char* name, Mat& m) { f(name, static_cast<const Mat&>(m)); });
  }
};

/// Zero-shaped parameter structure for the given config.
RankerParams zero_params(const RankerConfig& config);

/// Scaled uniform init: every weight entry drawn from
/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) on a per-tensor stream derived
/// from config.seed. The bias starts at zero.
RankerParams init_params(const RankerConfig& config);

struct ForwardCache {
  Mat ctx_in, node_in;
  Mat c0, p0;
  Mat qs, ks, vs;
  std::vector<Mat> attn_self;
  Mat concat_self;
  Mat cprime;
  Mat qc, kc, vc;
  std::vector<Mat> attn_cross;
  Mat concat_cross;
  std::vector<double> pooled;
  double z = 0.0;
  double score = 0.0;
};

/// Plausibility score in (0, 1) for m context vectors (rows of ctx, m >= 1)
/// and k path-node vectors (rows of nodes, k >= 3). Errors with
/// ShapeMismatch. Pass a cache to enable backward().
double forward(const RankerParams& params, const Mat& ctx, const Mat& nodes,
               ForwardCache* cache = nullptr);

/// Accumulate d(loss)/d(params) into grads given d(loss)/d(score).
void backward(const RankerParams& params, const ForwardCache& cache, double dscore,
              RankerParams& grads);

/// Mean over negatives of max(0, margin - (s_pos - s_neg)). Errors with
/// EmptyNegatives.
double margin_loss(double s_pos, const std::vector<double>& s_negs, double margin);

struct SampleMats {
  Mat ctx;    // m x d_p
  Mat nodes;  // k x d_n
};

/// One positive with its negative set, as the loss is defined.
struct TrainGroup {
  SampleMats positive;
  std::vector<SampleMats> negatives;
};

struct GradientResult {
  double loss = 0.0;
  RankerParams grads;
};

/// Exact analytic gradient of margin_loss composed with forward over one
/// group.
GradientResult gradients(const RankerParams& params, const TrainGroup& group);

struct TrainResult {
  RankerParams params;
  std::vector<double> epoch_mean_loss;
};

/// Deterministic-order gradient descent from seed-initialized weights; one
/// update per group per epoch. Errors with EmptyDataset / EmptyNegatives.
TrainResult train(const RankerConfig& config, const std::vector<TrainGroup>& groups);

/// Embedding matrices for a labeled sample: context rows from the context
/// table (sample.contexts order), node rows from the concept table (path
/// order).
SampleMats sample_mats(const pathgen::LabeledPathSample& sample,
                       const embed::EmbeddingTable& concepts,
                       const embed::EmbeddingTable& contexts);

struct ScoredSample {
  pathgen::LabeledPathSample sample;
  double score = 0.0;
};

/// Score every sample and sort by score descending; ties broken by
/// lexicographic path nodes, original order otherwise preserved.
std::vector<ScoredSample> score_paths(const RankerParams& params,
                                      const std::vector<pathgen::LabeledPathSample>& samples,
                                      const embed::EmbeddingTable& concepts,
                                      const embed::EmbeddingTable& contexts);

/// Checkpoint file: config block plus named tensors as decimal reals with
/// enough digits for an exact round-trip.
void save_checkpoint(std::ostream& out, const RankerParams& params);
void save_checkpoint_file(const std::string& path, const RankerParams& params);
RankerParams load_checkpoint(std::istream& in, const std::string& origin);
RankerParams load_checkpoint_file(const std::string& path);

}  // namespace hgcr::ranker
