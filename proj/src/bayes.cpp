#include "forge/bayes.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <map>
#include <stdexcept>

#include "forge/errors.hpp"

namespace forge {

double cost(const QoRReport& report, const PartSpec& part) {
  if (std::min({report.bram_18k, report.lut, report.dsp, report.ff}) < 0) {
    throw InvalidReport("negative resource count in report");
  }
  const double l = std::max<double>(static_cast<double>(report.worst_case_latency), 1.0);
  const double a = std::max(compute_aru(report, part), 1e-6);
  return std::hypot(std::log10(l), std::log10(a));
}

// ---------------------------------------------------------------------------
// Search space

SearchSpace::SearchSpace(const DesignTree& tree) : tree_(&tree), size_(count_leaves(tree)) {}

Eigen::VectorXd SearchSpace::encode(const PragmaConfig& config) const {
  const auto idx = option_indices(*tree_, config);
  Eigen::VectorXd x(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto n = tree_->options[i].size();
    x[static_cast<Eigen::Index>(i)] = n > 1 ? static_cast<double>(idx[i]) / static_cast<double>(n - 1) : 0.0;
  }
  return x;
}

PragmaConfig SearchSpace::decode(const Eigen::VectorXd& x) const {
  PragmaConfig c;
  for (std::size_t i = 0; i < tree_->sites.size(); ++i) {
    const auto n = tree_->options[i].size();
    const double v = std::clamp(x[static_cast<Eigen::Index>(i)], 0.0, 1.0);
    const auto k = n > 1 ? static_cast<std::size_t>(std::lround(v * static_cast<double>(n - 1))) : 0;
    c.settings.push_back(tree_->options[i][k]);
  }
  return c;
}

const std::vector<PragmaConfig>& SearchSpace::all(std::size_t limit) const {
  if (size_ > limit) throw std::logic_error("search space too large to list");
  if (!all_) all_ = enumerate_designs(*tree_, {std::nullopt, false}).configs;
  return *all_;
}

// ---------------------------------------------------------------------------
// Gaussian process

namespace {

Eigen::MatrixXd se_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double ell) {
  const Eigen::VectorXd an = A.colwise().squaredNorm().transpose();
  const Eigen::RowVectorXd bn = B.colwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * A.transpose() * B).colwise() + an;
  d2.rowwise() += bn;
  return (-d2.array().max(0.0) / (2.0 * ell * ell)).exp().matrix();
}

}  // namespace

Surrogate Surrogate::fit(const std::vector<Eigen::VectorXd>& X, const std::vector<double>& y,
                         const GpOptions& options) {
  if (X.empty() || X.size() != y.size()) throw std::invalid_argument("surrogate needs matching, non-empty data");
  if (options.length_scales.empty()) throw std::invalid_argument("no length scales");
  const auto n = static_cast<Eigen::Index>(X.size());
  Surrogate s;
  s.X_.resize(X.front().size(), n);
  for (Eigen::Index i = 0; i < n; ++i) s.X_.col(i) = X[static_cast<std::size_t>(i)];

  Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  if (options.standardize) {
    s.mean_ = t.mean();
    const double var = (t.array() - s.mean_).square().mean();
    s.degenerate_ = n == 1 || var <= 1e-24 * std::max(1.0, s.mean_ * s.mean_);
    s.scale_ = s.degenerate_ ? 1.0 : std::sqrt(var);
    t = (t.array() - s.mean_) / s.scale_;
    if (s.degenerate_) t.setZero();
  }

  bool have = false;
  for (double ell : options.length_scales) {
    const Eigen::MatrixXd K0 = se_kernel(s.X_, s.X_, ell);
    double noise = options.noise;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd K = K0;
      K.diagonal().array() += noise;
      llt.compute(K);
      if (llt.info() == Eigen::Success) break;
      noise *= 10;
    }
    if (llt.info() != Eigen::Success) continue;
    const Eigen::VectorXd alpha = llt.solve(t);
    const Eigen::MatrixXd L = llt.matrixL();
    const double lml = -0.5 * t.dot(alpha) - L.diagonal().array().log().sum() -
                       0.5 * static_cast<double>(n) * std::log(2 * M_PI);
    if (!have || lml > s.lml_) {
      have = true;
      s.lml_ = lml;
      s.length_scale_ = ell;
      s.noise_ = noise;
      s.llt_ = llt;
      s.alpha_ = alpha;
    }
  }
  if (!have) throw std::runtime_error("GP covariance is not positive definite");
  return s;
}

void Surrogate::predict(const Eigen::MatrixXd& Q, Eigen::VectorXd& mean, Eigen::VectorXd& std) const {
  const Eigen::MatrixXd Ks = se_kernel(X_, Q, length_scale_);
  const Eigen::VectorXd m = Ks.transpose() * alpha_;
  const Eigen::MatrixXd V = llt_.matrixL().solve(Ks);
  const Eigen::VectorXd var = (1.0 - V.colwise().squaredNorm().transpose().array()).max(0.0);
  mean = (m.array() * scale_ + mean_).matrix();
  std = (var.array().sqrt() * scale_).matrix();
}

std::pair<double, double> Surrogate::predict(const Eigen::VectorXd& x) const {
  Eigen::VectorXd m, s;
  predict(Eigen::MatrixXd(x), m, s);
  return {m[0], s[0]};
}

double expected_improvement(double mu, double sigma, double best) {
  const double gain = best - mu;
  if (!(sigma > 0)) return std::max(gain, 0.0);
  const double z = gain / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI);
  return std::max(gain * cdf + sigma * pdf, 0.0);
}

double expected_improvement(const Surrogate& s, const Eigen::VectorXd& x, double best) {
  const auto [mu, sigma] = s.predict(x);
  return expected_improvement(mu, sigma, best);
}

// ---------------------------------------------------------------------------
// Proposal

namespace {

constexpr std::size_t kCandidates = 10000;

}  // namespace

PragmaConfig random_unevaluated(const SearchSpace& space, Rng& rng, const EvaluatedSet& evaluated) {
  if (evaluated.size() >= space.size()) throw SpaceExhausted("every legal config has been evaluated");
  const auto& tree = space.tree();
  if (space.size() <= kCandidates) {
    std::vector<const PragmaConfig*> fresh;
    for (const auto& c : space.all(kCandidates)) {
      if (!evaluated.contains(option_indices(tree, c))) fresh.push_back(&c);
    }
    if (fresh.empty()) throw SpaceExhausted("every legal config has been evaluated");
    return *fresh[rng.below(fresh.size())];
  }
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    auto c = sample_uniform(tree, rng);
    if (!evaluated.contains(option_indices(tree, c))) return c;
  }
  throw SpaceExhausted("no unevaluated config found by sampling");
}

PragmaConfig propose_next(const Surrogate& s, const SearchSpace& space, double best, Rng& rng,
                          const EvaluatedSet& evaluated) {
  if (evaluated.size() >= space.size()) throw SpaceExhausted("every legal config has been evaluated");
  const auto& tree = space.tree();
  std::vector<PragmaConfig> sampled;
  const std::vector<PragmaConfig>* cands;
  if (space.size() <= kCandidates) {
    cands = &space.all(kCandidates);
  } else {
    sampled.reserve(kCandidates);
    for (std::size_t i = 0; i < kCandidates; ++i) sampled.push_back(sample_uniform(tree, rng));
    cands = &sampled;
  }

  Eigen::MatrixXd Q(static_cast<Eigen::Index>(space.dims()), static_cast<Eigen::Index>(cands->size()));
  for (std::size_t i = 0; i < cands->size(); ++i) Q.col(static_cast<Eigen::Index>(i)) = space.encode((*cands)[i]);
  Eigen::VectorXd mu, sigma;
  s.predict(Q, mu, sigma);

  std::size_t arg = 0;
  double top = -1;
  std::vector<std::size_t> arg_key;
  for (std::size_t i = 0; i < cands->size(); ++i) {
    const auto ei = expected_improvement(mu[static_cast<Eigen::Index>(i)], sigma[static_cast<Eigen::Index>(i)], best);
    if (ei > top) {
      top = ei;
      arg = i;
      arg_key.clear();
    } else if (ei == top) {
      // Sampled candidates arrive in random order; keep the depth-first first.
      if (arg_key.empty()) arg_key = option_indices(tree, (*cands)[arg]);
      auto key = option_indices(tree, (*cands)[i]);
      if (key < arg_key) {
        arg = i;
        arg_key = std::move(key);
      }
    }
  }
  const auto& pick = (*cands)[arg];
  if (!evaluated.contains(option_indices(tree, pick))) return pick;
  return random_unevaluated(space, rng, evaluated);
}

// ---------------------------------------------------------------------------
// Exploration

std::string RunLogRecord::line() const {
  char buf[64];
  std::string out = std::to_string(restart) + "\t" + std::to_string(iteration) + "\t" + config_text + "\t";
  if (cost) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *cost);
    out.append(buf, p);
  } else {
    out += "FAILED";
  }
  std::snprintf(buf, sizeof buf, "\t%.6f", seconds);
  return out + buf;
}

namespace {

class Restart {
 public:
  Restart(const ExploreContext& ctx, const SearchSpace& space, int index, std::uint64_t seed)
      : ctx_(ctx), space_(space), index_(index), rng_(seed) {}

  // Evaluates one config; records the observation and the log entry.
  void evaluate(const PragmaConfig& config, ExploreResult& out) {
    const auto& tree = space_.tree();
    auto key = option_indices(tree, config);
    evaluated_.insert(key);
    const auto start = std::chrono::steady_clock::now();
    DesignPoint p;
    p.config = config;
    p.config_text = config_text(tree.sites, config);
    p.canonical = std::move(key);
    p.source = insert_pragmas(*ctx_.unit, *ctx_.info, config);
    const auto workdir = ctx_.work_root / ("r" + std::to_string(index_) + "_e" + std::to_string(iteration_));
    p.report = ctx_.evaluator->evaluate(p.source, *ctx_.info, config, ctx_.part, workdir);
    std::optional<double> c;
    if (p.report.ok()) {
      try {
        c = cost(p.report, ctx_.part);
        p.latency = static_cast<double>(p.report.worst_case_latency);
        p.aru = compute_aru(p.report, ctx_.part);
      } catch (const InvalidReport& e) {
        p.report = QoRReport::failed(e.what());
      }
    }
    RunLogRecord rec{index_, iteration_++, p.config_text, c,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    if (ctx_.on_record) ctx_.on_record(rec);
    out.log.push_back(rec);
    if (c) {
      xs_.push_back(space_.encode(config));
      ys_.push_back(*c);
      best_ = std::min(best_.value_or(*c), *c);
      if (ctx_.on_design) ctx_.on_design(p);
      points_.push_back(std::move(p));
    }
  }

  void run(const ExplorerBudget& b, ExploreResult& out) {
    try {
      for (int i = 0; i < b.n_init; ++i) evaluate(random_unevaluated(space_, rng_, evaluated_), out);
      for (int j = 0; j < b.n_calls; ++j) {
        if (ys_.empty()) {
          evaluate(random_unevaluated(space_, rng_, evaluated_), out);
          continue;
        }
        const auto s = Surrogate::fit(xs_, ys_, ctx_.gp);
        evaluate(propose_next(s, space_, *best_, rng_, evaluated_), out);
      }
    } catch (const SpaceExhausted&) {
      // Small spaces run out before the budget does.
    }
  }

  std::vector<DesignPoint>& points() { return points_; }

 private:
  const ExploreContext& ctx_;
  const SearchSpace& space_;
  int index_;
  Rng rng_;
  int iteration_ = 0;
  EvaluatedSet evaluated_;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<double> ys_;
  std::optional<double> best_;
  std::vector<DesignPoint> points_;
};

}  // namespace

ExploreResult explore_bayesian(const ExploreContext& ctx, const ExplorerBudget& budget) {
  if (!ctx.unit || !ctx.info || !ctx.tree || !ctx.evaluator) throw std::invalid_argument("incomplete explore context");
  if (budget.n_opt < 1 || budget.n_init < 1 || budget.n_calls < 0) throw std::invalid_argument("bad explorer budget");
  const SearchSpace space(*ctx.tree);
  ExploreResult out;
  EvaluatedSet kept;
  for (int r = 0; r < budget.n_opt; ++r) {
    Restart restart(ctx, space, r, budget.seed + static_cast<std::uint64_t>(r));
    restart.run(budget, out);
    for (auto& p : restart.points()) {
      if (kept.insert(p.canonical).second) out.designs.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace forge
