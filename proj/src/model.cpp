#include "mvgcca/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mvgcca {

// ---------------------------------------------------------------------------
// Config and parameters

void TrainConfig::validate() const {
  if (latent_dim < 1) throw std::invalid_argument("latent_dim must be positive");
  if (hops < 0) throw std::invalid_argument("hops must be nonnegative");
  if (layers < 1) throw std::invalid_argument("layers must be positive");
  if (hidden < 1) throw std::invalid_argument("hidden must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("dropout must lie in [0, 1)");
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  if (mc_samples < 1) throw std::invalid_argument("mc_samples must be positive");
  if (logsig_clamp <= 0.0) throw std::invalid_argument("logsig_clamp must be positive");
}

Index ModelParams::latent_dim() const {
  return enc.empty() ? 0 : enc[0].head_mu.w.rows();
}

std::vector<Index> ModelParams::view_dims() const {
  std::vector<Index> dims;
  for (const auto& d : dec) dims.push_back(d.head_mu.w.rows());
  return dims;
}

namespace {

LinearLayer init_layer(Index out, Index in, Rng& rng) {
  LinearLayer l;
  l.w.resize(out, in);
  const double bound = std::sqrt(6.0 / static_cast<double>(in));
  std::uniform_real_distribution<double> uni(-bound, bound);
  for (Index j = 0; j < in; ++j)
    for (Index i = 0; i < out; ++i) l.w(i, j) = uni(rng);
  l.b = Vector::Zero(out);
  return l;
}

} // namespace

ModelParams init_params(const std::vector<Index>& view_dims, const TrainConfig& cfg,
                        Rng& rng) {
  cfg.validate();
  ModelParams p;
  const Index stack = cfg.hops + 1;
  for (Index dm : view_dims) {
    if (dm < 1) throw std::invalid_argument("view dimension must be positive");
    EncoderParams e;
    Index in = dm;
    for (int l = 0; l < cfg.layers; ++l) {
      e.krylov_layers.push_back(init_layer(cfg.hidden, stack * in, rng));
      in = cfg.hidden;
    }
    e.head_mu = init_layer(cfg.latent_dim, cfg.hidden, rng);
    e.head_logsigma = init_layer(cfg.latent_dim, cfg.hidden, rng);
    p.enc.push_back(std::move(e));
  }
  for (Index dm : view_dims) {
    DecoderParams d;
    Index in = cfg.latent_dim;
    for (int l = 0; l < cfg.layers; ++l) {
      d.mlp.push_back(init_layer(cfg.hidden, in, rng));
      in = cfg.hidden;
    }
    d.head_mu = init_layer(dm, cfg.hidden, rng);
    d.log_psi = 0.0;
    p.dec.push_back(std::move(d));
  }
  return p;
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  for (auto& e : z.enc) {
    for (auto& l : e.krylov_layers) { l.w.setZero(); l.b.setZero(); }
    e.head_mu.w.setZero(); e.head_mu.b.setZero();
    e.head_logsigma.w.setZero(); e.head_logsigma.b.setZero();
  }
  for (auto& d : z.dec) {
    for (auto& l : d.mlp) { l.w.setZero(); l.b.setZero(); }
    d.head_mu.w.setZero(); d.head_mu.b.setZero();
    d.log_psi = 0.0;
  }
  return z;
}

std::vector<TensorRef> tensor_refs(ModelParams& p) {
  std::vector<TensorRef> refs;
  auto add_mat = [&](std::string name, Matrix& m) {
    refs.push_back({std::move(name), m.data(), m.rows(), m.cols()});
  };
  auto add_vec = [&](std::string name, Vector& v) {
    refs.push_back({std::move(name), v.data(), v.size(), 1});
  };
  auto add_layer = [&](const std::string& prefix, LinearLayer& l) {
    add_mat(prefix + "/w", l.w);
    add_vec(prefix + "/b", l.b);
  };
  for (size_t m = 0; m < p.enc.size(); ++m) {
    const std::string base = "enc/" + std::to_string(m);
    for (size_t l = 0; l < p.enc[m].krylov_layers.size(); ++l)
      add_layer(base + "/layer/" + std::to_string(l), p.enc[m].krylov_layers[l]);
    add_layer(base + "/head_mu", p.enc[m].head_mu);
    add_layer(base + "/head_logsigma", p.enc[m].head_logsigma);
  }
  for (size_t m = 0; m < p.dec.size(); ++m) {
    const std::string base = "dec/" + std::to_string(m);
    for (size_t l = 0; l < p.dec[m].mlp.size(); ++l)
      add_layer(base + "/layer/" + std::to_string(l), p.dec[m].mlp[l]);
    add_layer(base + "/head_mu", p.dec[m].head_mu);
    refs.push_back({base + "/log_psi", &p.dec[m].log_psi, 1, 1});
  }
  return refs;
}

// ---------------------------------------------------------------------------
// Scalar numerics

namespace {

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log of the continuous-Bernoulli normalizing constant as a function of the
// logit x: log(x / tanh(x/2)), an even smooth function with value log 2 at 0.
double log_cb_const(double x) {
  if (std::abs(x) < 1e-2) {
    const double x2 = x * x;
    return std::log(2.0) + x2 / 12.0 - 7.0 * x2 * x2 / 1440.0;
  }
  return std::log(std::abs(x) / std::tanh(std::abs(x) / 2.0));
}

double dlog_cb_const(double x) {
  if (std::abs(x) < 1e-2) return x / 6.0 - 7.0 * x * x * x / 360.0;
  const double t = std::tanh(x / 2.0);
  return 1.0 / x - (1.0 - t * t) / (2.0 * t);
}

double psi_of(double log_psi) {
  const double s = std::exp(log_psi);
  return s * s + 1e-6;
}

Matrix apply_nonlin(const Matrix& u, Nonlinearity f) {
  if (f == Nonlinearity::ReLU) return u.cwiseMax(0.0);
  return u.array().tanh().matrix();
}

// Derivative expressed through the activation value (exact for both choices).
Matrix nonlin_deriv_from_act(const Matrix& act, Nonlinearity f) {
  if (f == Nonlinearity::ReLU)
    return (act.array() > 0.0).cast<double>().matrix();
  return (1.0 - act.array().square()).matrix();
}

Matrix dropout_mask(Index rows, Index cols, double rate, Rng& rng) {
  const double keep = 1.0 - rate;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Matrix mask(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      mask(i, j) = uni(rng) < keep ? 1.0 / keep : 0.0;
  return mask;
}

Matrix apply_mask(const Matrix& act, const Matrix& mask) {
  if (mask.size() == 0) return act;
  return act.cwiseProduct(mask);
}

// ---------------------------------------------------------------------------
// Layer-stack forward/backward

struct StackCache {
  std::vector<Matrix> act;   // post-nonlinearity, per layer
  std::vector<Matrix> mask;  // dropout masks (empty matrices when off)
};

struct EncCache {
  StackCache net;
  Matrix mu, logsig_raw, logsig;
};

struct DecCache {
  StackCache net;
  Matrix mean;
};

void check_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite())
    throw std::runtime_error("training fault: non-finite values in " + what);
}

EncCache encoder_forward(Index m, const Matrix& x, const SpMatrix& prop,
                         const EncoderParams& ep, const TrainConfig& cfg,
                         bool dropout_on, Rng& rng) {
  EncCache c;
  const int layers = static_cast<int>(ep.krylov_layers.size());
  c.net.act.resize(layers);
  c.net.mask.resize(layers);
  Matrix input = x;
  for (int l = 0; l < layers; ++l) {
    Matrix stack = krylov_stack(input, prop, cfg.hops);
    Matrix u = ep.krylov_layers[l].w * stack;
    u.colwise() += ep.krylov_layers[l].b;
    c.net.act[l] = apply_nonlin(u, cfg.nonlinearity);
    check_finite(c.net.act[l], "encoder view " + std::to_string(m) + " layer " +
                                   std::to_string(l));
    if (dropout_on && cfg.dropout > 0.0)
      c.net.mask[l] = dropout_mask(c.net.act[l].rows(), c.net.act[l].cols(),
                                   cfg.dropout, rng);
    input = apply_mask(c.net.act[l], c.net.mask[l]);
  }
  c.mu = ep.head_mu.w * input;
  c.mu.colwise() += ep.head_mu.b;
  c.logsig_raw = ep.head_logsigma.w * input;
  c.logsig_raw.colwise() += ep.head_logsigma.b;
  check_finite(c.mu, "encoder view " + std::to_string(m) + " mean head");
  check_finite(c.logsig_raw, "encoder view " + std::to_string(m) + " log-sigma head");
  c.logsig = c.logsig_raw.cwiseMax(-cfg.logsig_clamp).cwiseMin(cfg.logsig_clamp);
  return c;
}

void encoder_backward(const Matrix& x, const SpMatrix& prop, const EncoderParams& ep,
                      const EncCache& c, const TrainConfig& cfg, const Matrix& dmu,
                      const Matrix& dlogsig, EncoderParams& g) {
  // Clamp passes gradient only in the open interval.
  Matrix dls_raw =
      dlogsig.cwiseProduct((c.logsig_raw.array().abs() < cfg.logsig_clamp)
                               .cast<double>()
                               .matrix());
  const int layers = static_cast<int>(ep.krylov_layers.size());
  Matrix feat = apply_mask(c.net.act[layers - 1], c.net.mask[layers - 1]);
  g.head_mu.w += dmu * feat.transpose();
  g.head_mu.b += dmu.rowwise().sum();
  g.head_logsigma.w += dls_raw * feat.transpose();
  g.head_logsigma.b += dls_raw.rowwise().sum();

  Matrix dfeat = ep.head_mu.w.transpose() * dmu +
                 ep.head_logsigma.w.transpose() * dls_raw;
  for (int l = layers - 1; l >= 0; --l) {
    Matrix da = apply_mask(dfeat, c.net.mask[l]);
    Matrix du = da.cwiseProduct(nonlin_deriv_from_act(c.net.act[l], cfg.nonlinearity));
    const Matrix& input =
        l == 0 ? x : apply_mask(c.net.act[l - 1], c.net.mask[l - 1]);
    Matrix stack = krylov_stack(input, prop, cfg.hops);
    g.krylov_layers[l].w += du * stack.transpose();
    g.krylov_layers[l].b += du.rowwise().sum();
    if (l == 0) break;  // gradient w.r.t. the data is not needed
    Matrix dstack = ep.krylov_layers[l].w.transpose() * du;
    // d(input) = sum_t dstack_t (P^t)^T, accumulated Horner-style; the
    // transpose matters for the (asymmetric) random-walk operator.
    const Index w_in = input.rows();
    Matrix r = dstack.middleRows(cfg.hops * w_in, w_in);
    for (int t = cfg.hops - 1; t >= 0; --t)
      r = Matrix(r * prop.transpose()) + dstack.middleRows(t * w_in, w_in);
    dfeat = std::move(r);
  }
}

DecCache decoder_forward(Index m, const Matrix& z, const DecoderParams& dp,
                         const TrainConfig& cfg, bool dropout_on, Rng& rng) {
  DecCache c;
  const int layers = static_cast<int>(dp.mlp.size());
  c.net.act.resize(layers);
  c.net.mask.resize(layers);
  Matrix input = z;
  for (int l = 0; l < layers; ++l) {
    Matrix u = dp.mlp[l].w * input;
    u.colwise() += dp.mlp[l].b;
    c.net.act[l] = apply_nonlin(u, cfg.nonlinearity);
    check_finite(c.net.act[l], "decoder view " + std::to_string(m) + " layer " +
                                   std::to_string(l));
    if (dropout_on && cfg.dropout > 0.0)
      c.net.mask[l] = dropout_mask(c.net.act[l].rows(), c.net.act[l].cols(),
                                   cfg.dropout, rng);
    input = apply_mask(c.net.act[l], c.net.mask[l]);
  }
  c.mean = dp.head_mu.w * input;
  c.mean.colwise() += dp.head_mu.b;
  check_finite(c.mean, "decoder view " + std::to_string(m) + " mean head");
  return c;
}

void decoder_backward(const Matrix& z, const DecoderParams& dp, const DecCache& c,
                      const TrainConfig& cfg, const Matrix& dmean, DecoderParams& g,
                      Matrix& dz_accum) {
  const int layers = static_cast<int>(dp.mlp.size());
  Matrix feat = apply_mask(c.net.act[layers - 1], c.net.mask[layers - 1]);
  g.head_mu.w += dmean * feat.transpose();
  g.head_mu.b += dmean.rowwise().sum();

  Matrix dfeat = dp.head_mu.w.transpose() * dmean;
  for (int l = layers - 1; l >= 0; --l) {
    Matrix da = apply_mask(dfeat, c.net.mask[l]);
    Matrix du = da.cwiseProduct(nonlin_deriv_from_act(c.net.act[l], cfg.nonlinearity));
    const Matrix& input =
        l == 0 ? z : apply_mask(c.net.act[l - 1], c.net.mask[l - 1]);
    g.mlp[l].w += du * input.transpose();
    g.mlp[l].b += du.rowwise().sum();
    dfeat = dp.mlp[l].w.transpose() * du;
  }
  dz_accum += dfeat;
}

} // namespace

// ---------------------------------------------------------------------------
// Public forward operations

std::pair<Matrix, Matrix> encode_view(Index m, const Matrix& x_batch,
                                      const Adjacency& a_sub,
                                      const ModelParams& params,
                                      const TrainConfig& cfg, bool dropout_on,
                                      Rng& rng) {
  if (m < 0 || m >= params.num_views())
    throw std::invalid_argument("view index out of range");
  if (x_batch.cols() != a_sub.size())
    throw std::invalid_argument("batch features do not match subgraph size");
  const Index expect = params.enc[m].krylov_layers[0].w.cols() / (cfg.hops + 1);
  if (x_batch.rows() != expect)
    throw std::invalid_argument("view feature dimension does not match encoder");
  SpMatrix prop = propagation_operator(a_sub, cfg.propagation);
  EncCache c = encoder_forward(m, x_batch, prop, params.enc[m], cfg, dropout_on, rng);
  return {std::move(c.mu), std::move(c.logsig)};
}

void fuse_posteriors(PosteriorGaussians& post) {
  if (post.mu.empty() || post.mu.size() != post.logsigma.size())
    throw std::invalid_argument("posterior views are empty or inconsistent");
  const Index d = post.mu[0].rows(), b = post.mu[0].cols();
  Eigen::ArrayXXd sum_prec = Eigen::ArrayXXd::Zero(d, b);
  Eigen::ArrayXXd weighted = Eigen::ArrayXXd::Zero(d, b);
  for (size_t m = 0; m < post.mu.size(); ++m) {
    if (post.mu[m].rows() != d || post.mu[m].cols() != b ||
        post.logsigma[m].rows() != d || post.logsigma[m].cols() != b)
      throw std::invalid_argument("posterior shapes differ across views");
    const Eigen::ArrayXXd prec = (-2.0 * post.logsigma[m].array()).exp();
    sum_prec += prec;
    weighted += post.mu[m].array() * prec;
  }
  post.fused_mu = (weighted / sum_prec).matrix();
  post.fused_logsigma = (-0.5 * sum_prec.log()).matrix();
}

Matrix sample_latent(const Matrix& fused_mu, const Matrix& fused_logsigma, Rng& rng) {
  if (fused_mu.rows() != fused_logsigma.rows() ||
      fused_mu.cols() != fused_logsigma.cols())
    throw std::invalid_argument("mean and log-sigma shapes differ");
  std::normal_distribution<double> gauss;
  Matrix eps(fused_mu.rows(), fused_mu.cols());
  for (Index j = 0; j < eps.cols(); ++j)
    for (Index i = 0; i < eps.rows(); ++i) eps(i, j) = gauss(rng);
  return fused_mu + fused_logsigma.array().exp().matrix().cwiseProduct(eps);
}

Vector decode_view_loglik(Index m, const Matrix& z, const Matrix& x_batch,
                          const ModelParams& params, const TrainConfig& cfg) {
  if (m < 0 || m >= params.num_views())
    throw std::invalid_argument("view index out of range");
  if (z.cols() != x_batch.cols())
    throw std::invalid_argument("latent and feature batch sizes differ");
  if (x_batch.rows() != params.dec[m].head_mu.w.rows())
    throw std::invalid_argument("view feature dimension does not match decoder");
  Rng unused(0);
  DecCache c = decoder_forward(m, z, params.dec[m], cfg, false, unused);
  const double psi = psi_of(params.dec[m].log_psi);
  const Index dm = x_batch.rows();
  const Vector sq = (x_batch - c.mean).colwise().squaredNorm();
  const double log_norm =
      -0.5 * static_cast<double>(dm) * std::log(2.0 * M_PI * psi);
  return (log_norm - (sq.array() / (2.0 * psi))).matrix();
}

double decode_link_loglik(const Vector& z_i, const Vector& z_j, double a_ij,
                          bool normalized) {
  if (a_ij < 0.0 || a_ij > 1.0)
    throw std::invalid_argument("edge weight must lie in [0, 1]");
  const double x = z_i.dot(z_j);
  double ll = -a_ij * softplus(-x) - (1.0 - a_ij) * softplus(x);
  if (normalized) ll += log_cb_const(x);
  return ll;
}

Vector kl_fused_vs_prior(const Matrix& fused_mu, const Matrix& fused_logsigma) {
  if (fused_mu.rows() != fused_logsigma.rows() ||
      fused_mu.cols() != fused_logsigma.cols())
    throw std::invalid_argument("mean and log-sigma shapes differ");
  const Eigen::ArrayXXd var = (2.0 * fused_logsigma.array()).exp();
  const Eigen::ArrayXXd per_coord =
      0.5 * (fused_mu.array().square() + var - 1.0 - 2.0 * fused_logsigma.array());
  return per_coord.colwise().sum().transpose().matrix();
}

// ---------------------------------------------------------------------------
// ELBO forward / backward

namespace {

struct LinkResult {
  double loglik = 0.0;
  Matrix g;  // d(loglik)/d(logits), batch x batch
};

LinkResult link_term(const Matrix& z, const Matrix& a_dense, bool normalized,
                     bool want_grad) {
  const Index b = z.cols();
  Matrix logits = z.transpose() * z;
  LinkResult res;
  if (want_grad) res.g.resize(b, b);
  for (Index j = 0; j < b; ++j)
    for (Index i = 0; i < b; ++i) {
      const double x = logits(i, j);
      const double a = a_dense(i, j);
      double ll = -a * softplus(-x) - (1.0 - a) * softplus(x);
      if (normalized) ll += log_cb_const(x);
      res.loglik += ll;
      if (want_grad) {
        double g = a - sigmoid(x);
        if (normalized) g += dlog_cb_const(x);
        res.g(i, j) = g;
      }
    }
  return res;
}

} // namespace

std::vector<Matrix> slice_views(const MultiviewDataset& dataset,
                                const std::vector<Index>& indices) {
  std::vector<Matrix> out;
  out.reserve(dataset.views.size());
  for (const auto& v : dataset.views) out.push_back(v(Eigen::all, indices));
  return out;
}

namespace {

ElboTerms elbo_impl(const std::vector<Matrix>& views_batch, const Adjacency& a_sub,
                    const ModelParams& params, const TrainConfig& cfg, Rng& rng,
                    bool dropout_on, ModelParams* grads) {
  cfg.validate();
  const Index m_views = params.num_views();
  if (static_cast<Index>(views_batch.size()) != m_views)
    throw std::invalid_argument("batch view count does not match model");
  const Index b = a_sub.size();
  for (const auto& v : views_batch)
    if (v.cols() != b)
      throw std::invalid_argument("batch columns do not match subgraph size");
  for (Index m = 0; m < m_views; ++m) {
    const Index expect = params.enc[m].krylov_layers[0].w.cols() / (cfg.hops + 1);
    if (views_batch[m].rows() != expect ||
        views_batch[m].rows() != params.dec[m].head_mu.w.rows())
      throw std::invalid_argument("view " + std::to_string(m) +
                                  " feature dimension does not match the model");
  }

  const SpMatrix prop = propagation_operator(a_sub, cfg.propagation);

  // Encoders and fusion.
  std::vector<EncCache> enc(m_views);
  PosteriorGaussians post;
  for (Index m = 0; m < m_views; ++m) {
    enc[m] = encoder_forward(m, views_batch[m], prop, params.enc[m], cfg,
                             dropout_on, rng);
    post.mu.push_back(enc[m].mu);
    post.logsigma.push_back(enc[m].logsig);
  }
  fuse_posteriors(post);
  const Matrix fused_sigma = post.fused_logsigma.array().exp().matrix();

  ElboTerms terms;
  terms.kl = kl_fused_vs_prior(post.fused_mu, post.fused_logsigma).sum();
  if (!std::isfinite(terms.kl))
    throw std::runtime_error("training fault: non-finite KL term");

  const Matrix a_dense = a_sub.dense();
  const double inv_mc = 1.0 / static_cast<double>(cfg.mc_samples);

  // Gradient accumulators w.r.t. the fused posterior; the KL contributes
  // directly, each draw adds its pathwise terms.
  Matrix gmu, gls;
  if (grads) {
    gmu = post.fused_mu;                                              // dKL/dmu
    gls = ((2.0 * post.fused_logsigma.array()).exp() - 1.0).matrix(); // dKL/dls
  }

  std::normal_distribution<double> gauss;
  for (int s = 0; s < cfg.mc_samples; ++s) {
    Matrix eps(post.fused_mu.rows(), b);
    for (Index j = 0; j < b; ++j)
      for (Index i = 0; i < eps.rows(); ++i) eps(i, j) = gauss(rng);
    const Matrix z = post.fused_mu + fused_sigma.cwiseProduct(eps);

    LinkResult link = link_term(z, a_dense, cfg.normalized_link, grads != nullptr);
    if (!std::isfinite(link.loglik))
      throw std::runtime_error("training fault: non-finite link term");
    terms.link += link.loglik * inv_mc;

    Matrix dz;
    if (grads)
      dz = (-cfg.link_scale * inv_mc) * (z * (link.g + link.g.transpose()));

    for (Index m = 0; m < m_views; ++m) {
      DecCache dec = decoder_forward(m, z, params.dec[m], cfg, dropout_on, rng);
      const Matrix resid = views_batch[m] - dec.mean;
      const double psi = psi_of(params.dec[m].log_psi);
      const double dm = static_cast<double>(views_batch[m].rows());
      const double sq = resid.squaredNorm();
      const double loglik =
          -0.5 * dm * static_cast<double>(b) * std::log(2.0 * M_PI * psi) -
          sq / (2.0 * psi);
      if (!std::isfinite(loglik))
        throw std::runtime_error("training fault: non-finite reconstruction term (view " +
                                 std::to_string(m) + ")");
      terms.recon += loglik * inv_mc;

      if (grads) {
        // loss includes -recon_scale/mc * loglik; dloglik/dmean = resid/psi
        const Matrix dmean = (-cfg.recon_scale * inv_mc / psi) * resid;
        decoder_backward(z, params.dec[m], dec, cfg, dmean, grads->dec[m], dz);
        const double dloss_dpsi =
            -cfg.recon_scale * inv_mc *
            (-0.5 * dm * static_cast<double>(b) / psi + sq / (2.0 * psi * psi));
        const double e = std::exp(params.dec[m].log_psi);
        grads->dec[m].log_psi += dloss_dpsi * 2.0 * e * e;
      }
    }

    if (grads) {
      gmu += dz;
      gls += dz.cwiseProduct(eps).cwiseProduct(fused_sigma);
    }
  }

  if (grads) {
    // Fusion backward: fused precision P, per-view precision p_m.
    const Eigen::ArrayXXd sum_prec = (-2.0 * post.fused_logsigma.array()).exp();
    const Eigen::ArrayXXd dnum = gmu.array() / sum_prec;
    const Eigen::ArrayXXd dsum = -gmu.array() * post.fused_mu.array() / sum_prec -
                                 gls.array() / (2.0 * sum_prec);
    for (Index m = 0; m < m_views; ++m) {
      const Eigen::ArrayXXd prec = (-2.0 * post.logsigma[m].array()).exp();
      const Matrix dmu = (dnum * prec).matrix();
      const Eigen::ArrayXXd dprec = dnum * post.mu[m].array() + dsum;
      const Matrix dls = (-2.0 * prec * dprec).matrix();
      encoder_backward(views_batch[m], prop, params.enc[m], enc[m], cfg, dmu, dls,
                       grads->enc[m]);
    }
  }

  return terms;
}

} // namespace

ElboTerms elbo_batch(const std::vector<Matrix>& views_batch, const Adjacency& a_sub,
                     const ModelParams& params, const TrainConfig& cfg, Rng& rng,
                     bool dropout_on) {
  return elbo_impl(views_batch, a_sub, params, cfg, rng, dropout_on, nullptr);
}

ElboTerms elbo_batch_grad(const std::vector<Matrix>& views_batch,
                          const Adjacency& a_sub, const ModelParams& params,
                          const TrainConfig& cfg, Rng& rng, bool dropout_on,
                          ModelParams& grads) {
  return elbo_impl(views_batch, a_sub, params, cfg, rng, dropout_on, &grads);
}

} // namespace mvgcca
