#ifndef MVGCCA_MODEL_HPP
#define MVGCCA_MODEL_HPP

#include "mvgcca/dataset.hpp"
#include "mvgcca/graph_ops.hpp"
#include "mvgcca/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mvgcca {

enum class Nonlinearity { ReLU, Tanh };

struct TrainConfig {
  int latent_dim = 3;
  int hops = 3;         // Krylov order inside every layer
  int layers = 4;
  int hidden = 1024;
  int batch_size = 512;
  double dropout = 0.5;
  double learning_rate = 1e-4;
  int epochs = 100;
  std::uint64_t seed = 0;
  int mc_samples = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Nonlinearity nonlinearity = Nonlinearity::ReLU;
  Propagation propagation = Propagation::Sym;
  double link_scale = 1.0;   // ELBO term scales, 1 = the unweighted bound
  double recon_scale = 1.0;
  bool normalized_link = false;  // include the continuous-Bernoulli constant
  double logsig_clamp = 6.0;     // |log sigma| bound before exponentiation
  Index embed_tile_size = 4096;  // full-graph embedding above this uses tiles

  void validate() const;
};

struct LinearLayer {
  Matrix w;
  Vector b;
};

/// Per-view encoder: a stack of Krylov graph-convolution layers (each maps the
/// stacked multi-hop features of its input through a linear map and a
/// nonlinearity) topped by linear heads for the posterior mean and log-sigma.
struct EncoderParams {
  std::vector<LinearLayer> krylov_layers;
  LinearLayer head_mu;
  LinearLayer head_logsigma;
};

/// Per-view decoder: MLP from the latent space plus a linear mean head and a
/// scalar noise parameter; the observation covariance is
/// (exp(log_psi)^2 + 1e-6) I.
struct DecoderParams {
  std::vector<LinearLayer> mlp;
  LinearLayer head_mu;
  double log_psi = 0.0;
};

struct ModelParams {
  std::vector<EncoderParams> enc;
  std::vector<DecoderParams> dec;

  Index num_views() const { return static_cast<Index>(enc.size()); }
  Index latent_dim() const;
  std::vector<Index> view_dims() const;  // from the decoder mean heads
};

/// Fan-in-scaled uniform weights, zero biases, log_psi = 0.
ModelParams init_params(const std::vector<Index>& view_dims, const TrainConfig& cfg,
                        Rng& rng);
ModelParams zeros_like(const ModelParams& p);

/// Flat view over every trainable tensor, in a fixed order with stable names
/// ("enc/0/layer/1/w", "dec/2/log_psi", ...). Mirrored structures (gradients,
/// optimizer moments) enumerate in the same order.
struct TensorRef {
  std::string name;
  double* data;
  Index rows, cols;
  Index size() const { return rows * cols; }
};
std::vector<TensorRef> tensor_refs(ModelParams& p);

/// Per-view diagonal Gaussian posteriors (d x batch each) and their
/// precision-weighted fusion.
struct PosteriorGaussians {
  std::vector<Matrix> mu;
  std::vector<Matrix> logsigma;
  Matrix fused_mu;
  Matrix fused_logsigma;
};

// ---------------------------------------------------------------------------
// Forward operations

/// Runs one view's encoder on a batch. Deterministic when dropout_on is false.
std::pair<Matrix, Matrix> encode_view(Index m, const Matrix& x_batch,
                                      const Adjacency& a_sub,
                                      const ModelParams& params,
                                      const TrainConfig& cfg, bool dropout_on,
                                      Rng& rng);

/// Fills fused_mu / fused_logsigma from the per-view parameters: per
/// coordinate the fused precision is the sum of per-view precisions and the
/// fused mean is the precision-weighted mean.
void fuse_posteriors(PosteriorGaussians& post);

/// Reparameterized draw: mu + exp(logsigma) .* eps with eps standard normal.
Matrix sample_latent(const Matrix& fused_mu, const Matrix& fused_logsigma, Rng& rng);

/// Per-sample Gaussian log-likelihood of view m under the decoder (no dropout).
Vector decode_view_loglik(Index m, const Matrix& z, const Matrix& x_batch,
                          const ModelParams& params, const TrainConfig& cfg);

/// Edge log-likelihood a*log l(z_i.z_j) + (1-a)*log(1-l(z_i.z_j)) with l the
/// logistic sigmoid, computed via log-sigmoid identities. When `normalized`,
/// the continuous-Bernoulli normalizing constant is added.
double decode_link_loglik(const Vector& z_i, const Vector& z_j, double a_ij,
                          bool normalized = false);

/// Closed-form KL(N(mu, diag sigma^2) || N(0, I)) per sample (column).
Vector kl_fused_vs_prior(const Matrix& fused_mu, const Matrix& fused_logsigma);

// ---------------------------------------------------------------------------
// ELBO

struct ElboTerms {
  double link = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double elbo() const { return link + recon - kl; }
  double loss() const { return -elbo(); }
};

/// Evidence lower bound of one batch with its subgraph: link term over all
/// batch pairs, per-view reconstruction terms, minus the KL to the prior.
/// Expectations use cfg.mc_samples reparameterized draws; one draw is shared
/// by all views and the link term.
ElboTerms elbo_batch(const std::vector<Matrix>& views_batch, const Adjacency& a_sub,
                     const ModelParams& params, const TrainConfig& cfg, Rng& rng,
                     bool dropout_on = false);

/// Same forward pass, also accumulating d(loss)/d(params) into `grads`
/// (which must be zeros_like(params) or previously accumulated gradients).
ElboTerms elbo_batch_grad(const std::vector<Matrix>& views_batch,
                          const Adjacency& a_sub, const ModelParams& params,
                          const TrainConfig& cfg, Rng& rng, bool dropout_on,
                          ModelParams& grads);

/// Column slices of every view at the given sample indices.
std::vector<Matrix> slice_views(const MultiviewDataset& dataset,
                                const std::vector<Index>& indices);

} // namespace mvgcca

#endif
