#include "locscale/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace locscale {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int popcount(const std::vector<std::uint8_t>& bits) {
  int c = 0;
  for (const auto b : bits) c += b ? 1 : 0;
  return c;
}

}  // namespace

int ChainState::n_gamma() const { return popcount(gamma); }
int ChainState::n_delta() const { return popcount(delta); }

double adapt_scale(double scale, double batch_rate, int batch_index) {
  const double kappa = std::min(0.05, 1.0 / std::sqrt(static_cast<double>(batch_index)));
  if (batch_rate > 0.25) return scale * std::exp(kappa);
  if (batch_rate < 0.20) return scale * std::exp(-kappa);
  return scale;
}

Sampler::Sampler(const DesignMatrices& design, const PriorConfig& priors, SamplerOptions opts)
    : design_(design), priors_(priors), opts_(std::move(opts)) {
  if (static_cast<int>(priors_.pi_mu.size()) != static_cast<int>(design_.mean_blocks.size()) ||
      static_cast<int>(priors_.pi_sigma.size()) != static_cast<int>(design_.var_blocks.size()))
    throw std::runtime_error("prior configuration does not match the design's term counts");
  ztz_ = design_.Z.transpose() * design_.Z;
  z_colsum_ = design_.Z.colwise().sum();
}

ChainState Sampler::initial_state() const {
  ChainState s;
  s.gamma.assign(static_cast<std::size_t>(design_.p1), 0);
  s.delta.assign(static_cast<std::size_t>(design_.p2), 0);
  s.alpha = Eigen::VectorXd::Zero(design_.p2);
  const double ybar = design_.y.mean();
  s.sigma2 = (design_.y.array() - ybar).square().sum() / std::max(1, design_.n - 1);
  if (s.sigma2 <= 0.0) s.sigma2 = 1.0;
  s.c_beta = static_cast<double>(design_.n);
  s.c_alpha = 1.0;
  s.beta = Eigen::VectorXd::Zero(1 + design_.p1);
  return s;
}

MarginalStats Sampler::marginal_stats(const Eigen::VectorXd& alpha,
                                      const std::vector<std::uint8_t>& gamma) const {
  MarginalStats m;
  const int n = design_.n;
  if (design_.p2 == 0 || alpha.isZero(0.0)) {
    m.w = Eigen::VectorXd::Ones(n);
    m.za = Eigen::VectorXd::Zero(n);
    m.logdet_d2 = 0.0;
  } else {
    m.za = design_.Z * alpha;
    m.logdet_d2 = m.za.sum();
    m.w = (-0.5 * m.za.array()).exp();
    if (!m.w.allFinite()) return m;
  }
  const Eigen::VectorXd yt = m.w.cwiseProduct(design_.y);
  m.T = yt.squaredNorm();
  if (!std::isfinite(m.T)) return m;

  m.sel.push_back(0);
  for (int j = 0; j < design_.p1; ++j)
    if (gamma[static_cast<std::size_t>(j)]) m.sel.push_back(1 + j);
  const auto k = static_cast<Eigen::Index>(m.sel.size());
  Eigen::MatrixXd xt(n, k);
  for (Eigen::Index c = 0; c < k; ++c)
    xt.col(c) = m.w.cwiseProduct(design_.Xstar.col(m.sel[static_cast<std::size_t>(c)]));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xt);
  qr.setThreshold(opts_.rank_tolerance);
  if (qr.rank() < k) return m;  // rank-deficient proposal: certain rejection
  m.theta = qr.solve(yt);
  m.R = m.theta.dot(xt.transpose() * yt);
  if (!std::isfinite(m.R)) return m;
  m.ok = true;
  return m;
}

double Sampler::log_marginal_likelihood(const ChainState& state) const {
  const MarginalStats m = marginal_stats(state.alpha, state.gamma);
  if (!m.ok) return kNegInf;
  const double s_quad = residual_quadratic(m, state.c_beta);
  return -0.5 * (design_.n * std::log(state.sigma2) + m.logdet_d2) -
         0.5 * (state.n_gamma() + 1) * std::log1p(state.c_beta) -
         s_quad / (2.0 * state.sigma2);
}

int Sampler::draw_block_size(Rng& rng, int term_size) const {
  const int cap = std::min(term_size, opts_.max_block);
  std::vector<double> probs;
  if (opts_.block_size_probs.empty()) {
    double p = 1.0;
    for (int s = 1; s <= cap; ++s) {
      p *= 0.5;
      probs.push_back(p);
    }
  } else {
    const int lim = std::min<int>(cap, static_cast<int>(opts_.block_size_probs.size()));
    probs.assign(opts_.block_size_probs.begin(), opts_.block_size_probs.begin() + lim);
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t s = 0; s < probs.size(); ++s) {
    u -= probs[s];
    if (u < 0.0) return static_cast<int>(s) + 1;
  }
  return static_cast<int>(probs.size());
}

namespace {

// Distinct positions 0..q-1, L of them, by partial Fisher-Yates.
std::vector<int> sample_positions(Rng& rng, int q, int L) {
  std::vector<int> idx(static_cast<std::size_t>(q));
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < L; ++j) {
    const auto pick = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(q - j))) + j;
    std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick)]);
  }
  idx.resize(static_cast<std::size_t>(L));
  return idx;
}

}  // namespace

bool Sampler::update_gamma(ChainState& state, Rng& rng) const {
  if (design_.p1 == 0) return false;
  const auto term_idx = rng.uniform_index(design_.mean_blocks.size());
  const TermBlock& blk = design_.mean_blocks[term_idx];
  const int q = blk.size();
  const int block_len = draw_block_size(rng, q);
  const std::vector<int> pos = sample_positions(rng, q, block_len);

  int rest_on = 0;
  for (int j = 0; j < q; ++j) {
    if (std::find(pos.begin(), pos.end(), j) == pos.end())
      rest_on += state.gamma[static_cast<std::size_t>(blk.begin + j)] ? 1 : 0;
  }
  const auto [c, d] = priors_.pi_mu[term_idx];
  const std::vector<std::uint8_t> proposal =
      sample_block_from_conditional_prior(rng, block_len, rest_on, q, c, d);

  bool same = true;
  for (int j = 0; j < block_len; ++j)
    same = same && proposal[static_cast<std::size_t>(j)] ==
                       state.gamma[static_cast<std::size_t>(blk.begin + pos[static_cast<std::size_t>(j)])];
  if (same) return true;  // likelihood ratio is exactly 1

  std::vector<std::uint8_t> gamma_prop = state.gamma;
  for (int j = 0; j < block_len; ++j)
    gamma_prop[static_cast<std::size_t>(blk.begin + pos[static_cast<std::size_t>(j)])] =
        proposal[static_cast<std::size_t>(j)];

  const MarginalStats cur = marginal_stats(state.alpha, state.gamma);
  const MarginalStats prop = marginal_stats(state.alpha, gamma_prop);
  if (!prop.ok) return false;
  double log_ratio;
  if (!cur.ok) {
    log_ratio = std::numeric_limits<double>::infinity();
  } else {
    const double s_cur = residual_quadratic(cur, state.c_beta);
    const double s_prop = residual_quadratic(prop, state.c_beta);
    const int dn = popcount(gamma_prop) - state.n_gamma();
    log_ratio = -0.5 * dn * std::log1p(state.c_beta) - (s_prop - s_cur) / (2.0 * state.sigma2);
  }
  if (std::log(rng.uniform()) < log_ratio) {
    state.gamma = std::move(gamma_prop);
    return true;
  }
  return false;
}

Eigen::VectorXd Sampler::working_response(const MarginalStats& m, double sigma2,
                                          double c_beta) const {
  const Eigen::VectorXd beta_hat = shrink_factor(c_beta) * m.theta;
  Eigen::VectorXd fitted = Eigen::VectorXd::Zero(design_.n);
  for (std::size_t c = 0; c < m.sel.size(); ++c)
    fitted += beta_hat(static_cast<Eigen::Index>(c)) * design_.Xstar.col(m.sel[c]);
  const double log_s2 = std::log(sigma2);
  Eigen::VectorXd d(design_.n);
  for (int i = 0; i < design_.n; ++i) {
    const double e2 = (design_.y(i) - fitted(i)) * (design_.y(i) - fitted(i));
    const double s2i = sigma2 * std::exp(m.za(i));
    d(i) = log_s2 + m.za(i) + (e2 - s2i) / s2i;
  }
  return d;
}

Sampler::ProposalStats Sampler::proposal_stats(const std::vector<std::uint8_t>& delta,
                                               const Eigen::VectorXd& d, double c_alpha) const {
  ProposalStats ps;
  for (int j = 0; j < design_.p2; ++j)
    if (delta[static_cast<std::size_t>(j)]) ps.idx.push_back(j);
  const auto k = static_cast<Eigen::Index>(ps.idx.size());
  if (k == 0) return ps;
  Eigen::MatrixXd prec(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      prec(a, b) = ztz_(ps.idx[static_cast<std::size_t>(a)], ps.idx[static_cast<std::size_t>(b)]);
  prec.diagonal().array() += 1.0 / c_alpha;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) {
    ps.idx.clear();  // signal failure through an empty index set plus NaN
    ps.logdet_m = std::numeric_limits<double>::quiet_NaN();
    return ps;
  }
  Eigen::VectorXd ztd(k);
  for (Eigen::Index a = 0; a < k; ++a)
    ztd(a) = design_.Z.col(ps.idx[static_cast<std::size_t>(a)]).dot(d);
  ps.ahat = llt.solve(ztd);
  ps.logdet_m = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  ps.chol = llt;
  return ps;
}

double Sampler::proposal_logpdf(const ProposalStats& ps, const Eigen::VectorXd& alpha_sel,
                                double h) const {
  const auto k = static_cast<Eigen::Index>(ps.idx.size());
  if (k == 0) return 0.0;
  const Eigen::VectorXd r = alpha_sel - ps.ahat;
  const Eigen::VectorXd lr = ps.chol.matrixU() * r;  // quad form r'M r = |L'r|^2
  return -0.5 * k * std::log(2.0 * std::numbers::pi * h) + 0.5 * ps.logdet_m -
         lr.squaredNorm() / (2.0 * h);
}

bool Sampler::update_alpha_delta(ChainState& state, Rng& rng, const TuningState& tuning) const {
  if (design_.p2 == 0) return false;
  const auto term_idx = rng.uniform_index(design_.var_blocks.size());
  const TermBlock& blk = design_.var_blocks[term_idx];
  const int q = blk.size();
  const int block_len = draw_block_size(rng, q);
  const std::vector<int> pos = sample_positions(rng, q, block_len);
  int rest_on = 0;
  for (int j = 0; j < q; ++j) {
    if (std::find(pos.begin(), pos.end(), j) == pos.end())
      rest_on += state.delta[static_cast<std::size_t>(blk.begin + j)] ? 1 : 0;
  }
  const auto [c, d_prior] = priors_.pi_sigma[term_idx];
  const std::vector<std::uint8_t> block =
      sample_block_from_conditional_prior(rng, block_len, rest_on, q, c, d_prior);
  std::vector<std::uint8_t> delta_prop = state.delta;
  for (int j = 0; j < block_len; ++j)
    delta_prop[static_cast<std::size_t>(blk.begin + pos[static_cast<std::size_t>(j)])] =
        block[static_cast<std::size_t>(j)];

  const int n_prop = popcount(delta_prop);
  const int n_cur = state.n_delta();
  if (n_prop == 0 && n_cur == 0) return true;  // identical empty models

  const MarginalStats cur = marginal_stats(state.alpha, state.gamma);
  if (!cur.ok) throw std::runtime_error("current chain state has a singular design");
  const Eigen::VectorXd d_cur = working_response(cur, state.sigma2, state.c_beta);
  const ProposalStats fwd = proposal_stats(delta_prop, d_cur, state.c_alpha);
  if (n_prop > 0 && fwd.idx.empty()) return false;  // non-SPD proposal precision

  Eigen::VectorXd alpha_sel(static_cast<Eigen::Index>(n_prop));
  if (n_prop > 0) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(n_prop));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    // covariance h M^{-1} = h L^{-T} L^{-1}
    alpha_sel = fwd.ahat + std::sqrt(tuning.h) * fwd.chol.matrixU().solve(z);
  }
  Eigen::VectorXd alpha_prop = Eigen::VectorXd::Zero(design_.p2);
  for (std::size_t i = 0; i < fwd.idx.size(); ++i)
    alpha_prop(fwd.idx[i]) = alpha_sel(static_cast<Eigen::Index>(i));

  const MarginalStats prop = marginal_stats(alpha_prop, state.gamma);
  if (!prop.ok) return false;
  const Eigen::VectorXd d_prop = working_response(prop, state.sigma2, state.c_beta);
  const ProposalStats rev = proposal_stats(state.delta, d_prop, state.c_alpha);
  if (n_cur > 0 && rev.idx.empty()) return false;

  Eigen::VectorXd alpha_cur_sel(static_cast<Eigen::Index>(n_cur));
  for (std::size_t i = 0; i < rev.idx.size(); ++i)
    alpha_cur_sel(static_cast<Eigen::Index>(i)) = state.alpha(rev.idx[i]);

  const double s_cur = residual_quadratic(cur, state.c_beta);
  const double s_prop = residual_quadratic(prop, state.c_beta);
  double log_ratio = -0.5 * (prop.logdet_d2 - cur.logdet_d2) -
                     (s_prop - s_cur) / (2.0 * state.sigma2);
  const double log_2pi_ca = std::log(2.0 * std::numbers::pi * state.c_alpha);
  log_ratio += -0.5 * n_prop * log_2pi_ca - alpha_sel.squaredNorm() / (2.0 * state.c_alpha);
  log_ratio -= -0.5 * n_cur * log_2pi_ca - alpha_cur_sel.squaredNorm() / (2.0 * state.c_alpha);
  log_ratio += proposal_logpdf(rev, alpha_cur_sel, tuning.h);
  log_ratio -= proposal_logpdf(fwd, alpha_sel, tuning.h);

  if (std::log(rng.uniform()) < log_ratio) {
    state.delta = std::move(delta_prop);
    state.alpha = std::move(alpha_prop);
    return true;
  }
  return false;
}

double Sampler::alpha_delta_log_ratio(const ChainState& state, const Eigen::VectorXd& alpha_from,
                                      const std::vector<std::uint8_t>& delta_from,
                                      const Eigen::VectorXd& alpha_to,
                                      const std::vector<std::uint8_t>& delta_to,
                                      const TuningState& tuning) const {
  const MarginalStats from = marginal_stats(alpha_from, state.gamma);
  const MarginalStats to = marginal_stats(alpha_to, state.gamma);
  if (!from.ok || !to.ok) return kNegInf;
  const Eigen::VectorXd d_from = working_response(from, state.sigma2, state.c_beta);
  const Eigen::VectorXd d_to = working_response(to, state.sigma2, state.c_beta);
  const ProposalStats fwd = proposal_stats(delta_to, d_from, state.c_alpha);
  const ProposalStats rev = proposal_stats(delta_from, d_to, state.c_alpha);
  auto gather = [](const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
  };
  const Eigen::VectorXd a_to = gather(alpha_to, fwd.idx);
  const Eigen::VectorXd a_from = gather(alpha_from, rev.idx);
  const double log_2pi_ca = std::log(2.0 * std::numbers::pi * state.c_alpha);
  double log_ratio = -0.5 * (to.logdet_d2 - from.logdet_d2) -
                     (residual_quadratic(to, state.c_beta) - residual_quadratic(from, state.c_beta)) /
                         (2.0 * state.sigma2);
  log_ratio += -0.5 * static_cast<double>(fwd.idx.size()) * log_2pi_ca -
               a_to.squaredNorm() / (2.0 * state.c_alpha);
  log_ratio -= -0.5 * static_cast<double>(rev.idx.size()) * log_2pi_ca -
               a_from.squaredNorm() / (2.0 * state.c_alpha);
  log_ratio += proposal_logpdf(rev, a_from, tuning.h);
  log_ratio -= proposal_logpdf(fwd, a_to, tuning.h);
  return log_ratio;
}

double Sampler::hn_log_conditional(double sigma2, double S) const {
  if (sigma2 <= 0.0) return kNegInf;
  return -0.5 * design_.n * std::log(sigma2) - S / (2.0 * sigma2) -
         sigma2 / (2.0 * priors_.phi2_sigma);
}

std::optional<bool> Sampler::update_sigma2(ChainState& state, Rng& rng,
                                           const TuningState& tuning) const {
  const MarginalStats cur = marginal_stats(state.alpha, state.gamma);
  if (!cur.ok) throw std::runtime_error("current chain state has a singular design");
  const double S = residual_quadratic(cur, state.c_beta);
  if (priors_.sigma2_ig) {
    state.sigma2 = rng.inverse_gamma(0.5 * design_.n + priors_.a_sigma, 0.5 * S + priors_.b_sigma);
    return std::nullopt;
  }
  const double prop = rng.normal(state.sigma2, std::sqrt(tuning.f2));
  if (prop <= 0.0) return false;
  const double log_ratio = hn_log_conditional(prop, S) - hn_log_conditional(state.sigma2, S);
  if (std::log(rng.uniform()) < log_ratio) {
    state.sigma2 = prop;
    return true;
  }
  return false;
}

double Sampler::cbeta_log_conditional(double c, double T, double R, int n_gamma,
                                      double sigma2) const {
  if (c <= 0.0) return kNegInf;
  const double S = T - shrink_factor(c) * R;
  return -0.5 * (n_gamma + 1) * std::log1p(c) - S / (2.0 * sigma2) -
         (priors_.a_beta + 1.0) * std::log(c) - priors_.b_beta / c;
}

bool Sampler::update_cbeta(ChainState& state, Rng& rng, const TuningState& tuning) const {
  const MarginalStats cur = marginal_stats(state.alpha, state.gamma);
  if (!cur.ok) throw std::runtime_error("current chain state has a singular design");
  const double T = cur.T, R = cur.R;
  const int ng = state.n_gamma();
  const double s2 = state.sigma2;

  auto dl = [&](double c) {
    return -0.5 * (ng + 1) / (1.0 + c) + R / (2.0 * s2 * (1.0 + c) * (1.0 + c)) -
           (priors_.a_beta + 1.0) / c + priors_.b_beta / (c * c);
  };
  auto d2l = [&](double c) {
    return 0.5 * (ng + 1) / ((1.0 + c) * (1.0 + c)) - R / (s2 * std::pow(1.0 + c, 3)) +
           (priors_.a_beta + 1.0) / (c * c) - 2.0 * priors_.b_beta / std::pow(c, 3);
  };

  // Newton-Raphson from the current value; fall back to a log-scale random
  // walk when the mode search fails or the curvature is not negative.
  double chat = state.c_beta;
  bool mode_found = false;
  for (int it = 0; it < 100; ++it) {
    const double g = dl(chat);
    const double hss = d2l(chat);
    if (hss == 0.0 || !std::isfinite(g) || !std::isfinite(hss)) break;
    double step = g / hss;
    double next = chat - step;
    int halvings = 0;
    while (next <= 0.0 && halvings < 60) {
      step *= 0.5;
      next = chat - step;
      ++halvings;
    }
    if (next <= 0.0) break;
    const double delta_rel = std::abs(next - chat) / (1.0 + std::abs(chat));
    chat = next;
    if (delta_rel < 1e-12 || std::abs(dl(chat)) < 1e-10) {
      mode_found = std::isfinite(chat) && chat > 0.0 && d2l(chat) < 0.0;
      break;
    }
  }

  double c_prop, log_ratio;
  if (mode_found) {
    const double var = -tuning.g2 / d2l(chat);
    c_prop = rng.normal(chat, std::sqrt(var));
    if (c_prop <= 0.0) return false;
    log_ratio = cbeta_log_conditional(c_prop, T, R, ng, s2) -
                cbeta_log_conditional(state.c_beta, T, R, ng, s2) +
                ((c_prop - chat) * (c_prop - chat) - (state.c_beta - chat) * (state.c_beta - chat)) /
                    (2.0 * var);
  } else {
    c_prop = state.c_beta * std::exp(std::sqrt(tuning.g2) * rng.normal());
    log_ratio = cbeta_log_conditional(c_prop, T, R, ng, s2) -
                cbeta_log_conditional(state.c_beta, T, R, ng, s2) +
                std::log(c_prop / state.c_beta);
  }
  if (std::log(rng.uniform()) < log_ratio) {
    state.c_beta = c_prop;
    return true;
  }
  return false;
}

void Sampler::update_calpha(ChainState& state, Rng& rng) const {
  const double quad = state.alpha.squaredNorm();
  state.c_alpha =
      rng.inverse_gamma(priors_.a_alpha + 0.5 * state.n_delta(), priors_.b_alpha + 0.5 * quad);
}

Eigen::VectorXd Sampler::draw_beta(const ChainState& state, Rng& rng) const {
  MarginalStats m = marginal_stats(state.alpha, state.gamma);
  if (!m.ok) throw std::runtime_error("draw_beta: singular X'X for the current state");
  const Eigen::VectorXd yt = m.w.cwiseProduct(design_.y);
  const auto k = static_cast<Eigen::Index>(m.sel.size());
  Eigen::MatrixXd xt(design_.n, k);
  for (Eigen::Index c = 0; c < k; ++c)
    xt.col(c) = m.w.cwiseProduct(design_.Xstar.col(m.sel[static_cast<std::size_t>(c)]));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xt);
  qr.setThreshold(opts_.rank_tolerance);
  if (qr.rank() < k) throw std::runtime_error("draw_beta: singular X'X for the current state");
  const double shrink = shrink_factor(state.c_beta);
  const Eigen::VectorXd mean = shrink * qr.solve(yt);
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = rng.normal();
  // (X'X)^{-1} = P Rinv Rinv' P' for X P = Q R.
  const Eigen::VectorXd v =
      qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(z);
  const Eigen::VectorXd draw_sel = mean + std::sqrt(state.sigma2 * shrink) *
                                              (qr.colsPermutation() * v);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(1 + design_.p1);
  for (std::size_t c = 0; c < m.sel.size(); ++c)
    beta(m.sel[c]) = draw_sel(static_cast<Eigen::Index>(c));
  return beta;
}

namespace {

struct MoveCounter {
  long attempts = 0, accepts = 0;
  long batch_attempts = 0, batch_accepts = 0;
  void record(bool accepted, bool counting) {
    if (!counting) return;
    ++attempts;
    ++batch_attempts;
    if (accepted) {
      ++accepts;
      ++batch_accepts;
    }
  }
  double batch_rate() const {
    return batch_attempts > 0 ? static_cast<double>(batch_accepts) / batch_attempts : -1.0;
  }
  void reset_batch() { batch_attempts = batch_accepts = 0; }
  double rate() const { return attempts > 0 ? static_cast<double>(accepts) / attempts : 0.0; }
};

}  // namespace

RunManifest run_chain(const ModelSpec& spec, const DataTable& data, const PriorStrings& priors,
                      const RunConfig& config) {
  if (config.sweeps <= 0) throw std::runtime_error("sweeps must be positive");
  if (config.burn < 0 || config.burn >= config.sweeps)
    throw std::runtime_error("burn-in must satisfy 0 <= burn < sweeps");
  if (config.thin < 1) throw std::runtime_error("thin must be at least 1");
  if (config.store_dir.empty())
    throw std::runtime_error("no storage directory given; posterior samples have nowhere to go");

  const auto start = std::chrono::steady_clock::now();
  const DesignMatrices design = build_design(spec, data);
  const PriorConfig prior_cfg = PriorConfig::build(
      design.n, static_cast<int>(design.mean_blocks.size()),
      static_cast<int>(design.var_blocks.size()), priors.c_beta, priors.c_alpha, priors.pi_mu,
      priors.pi_sigma, priors.sigma);
  SamplerOptions opts;
  opts.block_size_probs = config.block_size_probs;
  const Sampler sampler(design, prior_cfg, opts);

  SampleStore store(config.store_dir);  // fails before sampling if unwritable

  Rng rng(config.seed);
  ChainState state = sampler.initial_state();
  TuningState tuning;
  MoveCounter acc_gamma, acc_ad, acc_s2, acc_cb;  // post-burn-in rates
  MoveCounter burn_ad, burn_s2, burn_cb;          // batch bookkeeping during burn-in
  int batch_index = 0;
  double max_abs_colsum = 0.0;
  const bool hn_sigma = !prior_cfg.sigma2_ig;

  for (long sweep = 1; sweep <= config.sweeps; ++sweep) {
    const bool post_burn = sweep > config.burn;
    if (design.p1 > 0) acc_gamma.record(sampler.update_gamma(state, rng), post_burn);
    if (design.p2 > 0) {
      const bool a = sampler.update_alpha_delta(state, rng, tuning);
      acc_ad.record(a, post_burn);
      burn_ad.record(a, !post_burn);
    }
    const auto s2_acc = sampler.update_sigma2(state, rng, tuning);
    if (s2_acc.has_value()) {
      acc_s2.record(*s2_acc, post_burn);
      burn_s2.record(*s2_acc, !post_burn);
    }
    {
      const bool a = sampler.update_cbeta(state, rng, tuning);
      acc_cb.record(a, post_burn);
      burn_cb.record(a, !post_burn);
    }
    sampler.update_calpha(state, rng);

    if (design.p2 > 0)
      max_abs_colsum = std::max(max_abs_colsum, std::abs(sampler.z_colsum().dot(state.alpha)));

    if (!post_burn && sweep % config.adapt_batch == 0) {
      ++batch_index;
      if (burn_ad.batch_rate() >= 0.0) tuning.h = adapt_scale(tuning.h, burn_ad.batch_rate(), batch_index);
      if (hn_sigma && burn_s2.batch_rate() >= 0.0)
        tuning.f2 = adapt_scale(tuning.f2, burn_s2.batch_rate(), batch_index);
      if (burn_cb.batch_rate() >= 0.0)
        tuning.g2 = adapt_scale(tuning.g2, burn_cb.batch_rate(), batch_index);
      burn_ad.reset_batch();
      burn_s2.reset_batch();
      burn_cb.reset_batch();
    }

    if (post_burn && (sweep - config.burn) % config.thin == 0) {
      state.beta = sampler.draw_beta(state, rng);
      store.write_sweep(state.beta, state.gamma, state.alpha, state.delta, state.c_beta,
                        state.c_alpha, state.sigma2);
    }
  }

  RunManifest m;
  m.sweeps = config.sweeps;
  m.burn = config.burn;
  m.thin = config.thin;
  m.seed = config.seed;
  m.retained = store.lines_written();
  m.formula = spec.render();
  {
    const auto desc = prior_cfg.describe();
    m.priors["c.beta"] = desc[0].substr(desc[0].find("= ") + 2);
    m.priors["c.alpha"] = desc[1].substr(desc[1].find("= ") + 2);
    m.priors["pi.mu"] = desc[2].substr(desc[2].find("= ") + 2);
    m.priors["pi.sigma"] = desc[3].substr(desc[3].find("= ") + 2);
    m.priors["sigma"] = desc[4].substr(desc[4].find("= ") + 2);
  }
  m.generator = Rng::kGeneratorId;
  m.data_rows = static_cast<long>(data.n_rows());
  m.data_cols = static_cast<long>(data.n_cols());
  {
    std::ostringstream hash;
    hash << "fnv1a:" << std::hex << data.fingerprint();
    m.data_hash = hash.str();
  }
  m.dropped_rows = design.dropped_rows;
  m.n = design.n;
  m.p1 = design.p1;
  m.p2 = design.p2;
  m.store_dir = config.store_dir;
  m.tuning_h = tuning.h;
  m.tuning_f2 = tuning.f2;
  m.tuning_g2 = tuning.g2;
  if (design.p1 > 0) m.acceptance["gamma"] = acc_gamma.rate();
  if (design.p2 > 0) m.acceptance["alpha_delta"] = acc_ad.rate();
  if (hn_sigma) m.acceptance["sigma2"] = acc_s2.rate();
  m.acceptance["c_beta"] = acc_cb.rate();
  m.max_abs_colsum_z_alpha = max_abs_colsum;
  m.columns["beta"] = design.x_labels;
  m.columns["gamma"] = std::vector<std::string>(design.x_labels.begin() + 1, design.x_labels.end());
  m.columns["alpha"] = design.z_labels;
  m.columns["delta"] = design.z_labels;
  m.columns["cbeta"] = {"cbeta"};
  m.columns["calpha"] = {"calpha"};
  m.columns["sigma2"] = {"sigma2"};
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  store.finalize(m);
  return m;
}

}  // namespace locscale
