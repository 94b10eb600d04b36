#include "mvgcca/train.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace mvgcca {

namespace {

// Adam with bias correction over the flattened parameter tensors.
struct Adam {
  ModelParams m, v;
  long long t = 0;

  explicit Adam(const ModelParams& p) : m(zeros_like(p)), v(zeros_like(p)) {}

  void step(ModelParams& params, ModelParams& grads, const TrainConfig& cfg) {
    ++t;
    auto pr = tensor_refs(params);
    auto gr = tensor_refs(grads);
    auto mr = tensor_refs(m);
    auto vr = tensor_refs(v);
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (size_t k = 0; k < pr.size(); ++k) {
      double* p = pr[k].data;
      double* g = gr[k].data;
      double* mm = mr[k].data;
      double* vv = vr[k].data;
      const Index n = pr[k].size();
      for (Index i = 0; i < n; ++i) {
        mm[i] = b1 * mm[i] + (1.0 - b1) * g[i];
        vv[i] = b2 * vv[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = mm[i] / corr1;
        const double vhat = vv[i] / corr2;
        p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      }
    }
  }
};

void zero_grads(ModelParams& grads) {
  for (auto& ref : tensor_refs(grads))
    std::fill(ref.data, ref.data + ref.size(), 0.0);
}

double training_loss(const ElboTerms& terms, const TrainConfig& cfg) {
  return -(cfg.link_scale * terms.link + cfg.recon_scale * terms.recon - terms.kl);
}

} // namespace

TrainResult train(const MultiviewDataset& dataset, const TrainConfig& cfg) {
  cfg.validate();
  dataset.validate();
  const Index n = dataset.n();
  if (dataset.adjacency.empty() || dataset.adjacency.size() != n)
    throw std::invalid_argument("dataset has no adjacency of matching size");

  std::vector<Index> dims;
  for (const auto& v : dataset.views) dims.push_back(v.rows());

  Rng rng(cfg.seed);
  TrainResult res;
  res.params = init_params(dims, cfg, rng);
  res.log.seed = cfg.seed;

  Adam adam(res.params);
  ModelParams grads = zeros_like(res.params);
  ModelParams snapshot = res.params;  // last finite epoch end

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  const Index batch = std::min<Index>(cfg.batch_size, n);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);

    EpochRecord rec;
    rec.epoch = epoch;
    bool finite = true;
    for (Index start = 0; start < n; start += batch) {
      const Index size = std::min(batch, n - start);
      std::vector<Index> idx(order.begin() + start, order.begin() + start + size);
      auto views_batch = slice_views(dataset, idx);
      Adjacency a_sub = batch_subgraph(dataset.adjacency, idx);

      zero_grads(grads);
      ElboTerms terms;
      try {
        terms = elbo_batch_grad(views_batch, a_sub, res.params, cfg, rng,
                                /*dropout_on=*/true, grads);
      } catch (const std::runtime_error&) {
        finite = false;
        break;
      }
      const double loss = training_loss(terms, cfg);
      if (!std::isfinite(loss)) {
        finite = false;
        break;
      }
      rec.link += terms.link;
      rec.recon += terms.recon;
      rec.kl += terms.kl;
      rec.neg_elbo += terms.loss();
      adam.step(res.params, grads, cfg);
    }
    if (!finite) {
      res.params = snapshot;
      res.log.diverged = true;
      break;
    }
    rec.wall_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                       .count();
    res.log.epochs.push_back(rec);
    res.log.last_finite_epoch = epoch;
    snapshot = res.params;
  }
  return res;
}

Matrix embed(const MultiviewDataset& dataset, const ModelParams& params,
             const TrainConfig& cfg) {
  dataset.validate();
  const Index n = dataset.n();
  if (dataset.adjacency.empty() || dataset.adjacency.size() != n)
    throw std::invalid_argument("dataset has no adjacency of matching size");
  const Index d = params.latent_dim();
  Matrix z(d, n);
  Rng rng(0);  // unused: dropout off, no sampling

  const Index tile = std::max<Index>(Index{1}, cfg.embed_tile_size);
  for (Index start = 0; start < n; start += tile) {
    const Index size = std::min(tile, n - start);
    std::vector<Index> idx(size);
    std::iota(idx.begin(), idx.end(), start);
    auto views_batch = slice_views(dataset, idx);
    Adjacency a_sub = batch_subgraph(dataset.adjacency, idx);

    PosteriorGaussians post;
    for (Index m = 0; m < params.num_views(); ++m) {
      auto [mu, logsig] =
          encode_view(m, views_batch[m], a_sub, params, cfg, false, rng);
      post.mu.push_back(std::move(mu));
      post.logsigma.push_back(std::move(logsig));
    }
    fuse_posteriors(post);
    z.middleCols(start, size) = post.fused_mu;
  }
  return z;
}

void write_training_log(const std::filesystem::path& file, const TrainingLog& log) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write training log: " + file.string());
  for (const auto& rec : log.epochs) {
    nlohmann::json j{{"epoch", rec.epoch},     {"link", rec.link},
                     {"recon", rec.recon},     {"kl", rec.kl},
                     {"neg_elbo", rec.neg_elbo}, {"wall_sec", rec.wall_sec},
                     {"seed", log.seed}};
    out << j.dump() << "\n";
  }
}

} // namespace mvgcca
