#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forge/design_point.hpp"
#include "forge/design_space.hpp"
#include "forge/qor.hpp"
#include "forge/random.hpp"

namespace forge {

// sqrt(log10(L)^2 + log10(ARU)^2) with L = max(worst-case latency, 1) and
// ARU clamped to 1e-6. Throws InvalidReport on negative resource counts.
double cost(const QoRReport& report, const PartSpec& part);

// One real dimension per site; option k of n maps to k/(n-1).
class SearchSpace {
 public:
  explicit SearchSpace(const DesignTree& tree);

  const DesignTree& tree() const { return *tree_; }
  std::size_t dims() const { return tree_->sites.size(); }
  std::uint64_t size() const { return size_; }

  Eigen::VectorXd encode(const PragmaConfig& config) const;
  // Nearest option per dimension.
  PragmaConfig decode(const Eigen::VectorXd& x) const;

  // Every legal config in depth-first order; only when size() <= limit.
  const std::vector<PragmaConfig>& all(std::size_t limit) const;

 private:
  const DesignTree* tree_;
  std::uint64_t size_;
  mutable std::optional<std::vector<PragmaConfig>> all_;
};

struct GpOptions {
  double noise = 1e-6;  // variance on the standardized scale
  std::vector<double> length_scales{0.05, 0.1, 0.2, 0.4, 0.8};
  bool standardize = true;
};

// Squared-exponential GP with unit signal variance on standardized targets.
class Surrogate {
 public:
  // Throws std::invalid_argument when X is empty or sizes disagree.
  static Surrogate fit(const std::vector<Eigen::VectorXd>& X, const std::vector<double>& y,
                       const GpOptions& options = {});

  // Posterior mean and standard deviation in cost units.
  std::pair<double, double> predict(const Eigen::VectorXd& x) const;
  // Batched predict; columns of Q are query points.
  void predict(const Eigen::MatrixXd& Q, Eigen::VectorXd& mean, Eigen::VectorXd& std) const;

  double length_scale() const { return length_scale_; }
  double noise() const { return noise_; }
  // All targets equal (or a single one): constant mean, prior variance away
  // from the data.
  bool degenerate() const { return degenerate_; }
  double log_marginal_likelihood() const { return lml_; }

 private:
  Eigen::MatrixXd X_;  // columns are training points
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double length_scale_ = 0.2;
  double noise_ = 1e-6;
  double mean_ = 0;
  double scale_ = 1;
  double lml_ = 0;
  bool degenerate_ = false;
};

// (best-mu)*Phi(z) + sigma*phi(z), z = (best-mu)/sigma; max(best-mu, 0) when
// sigma is 0. Never negative.
double expected_improvement(double mu, double sigma, double best);
double expected_improvement(const Surrogate& s, const Eigen::VectorXd& x, double best);

// Option-index keys of evaluated configs.
using EvaluatedSet = std::set<std::vector<std::size_t>>;

// Argmax of EI over every legal config (at most 10,000) or over 10,000
// uniform samples; ties go to the earliest depth-first config. A duplicate
// argmax is replaced by a random unevaluated config. Throws SpaceExhausted.
PragmaConfig propose_next(const Surrogate& s, const SearchSpace& space, double best, Rng& rng,
                          const EvaluatedSet& evaluated);

// A uniformly drawn legal config not in evaluated. Throws SpaceExhausted.
PragmaConfig random_unevaluated(const SearchSpace& space, Rng& rng, const EvaluatedSet& evaluated);

struct ExplorerBudget {
  int n_opt = 1;
  int n_init = 20;
  int n_calls = 40;
  std::uint64_t seed = 0;
};

struct RunLogRecord {
  int restart = 0;
  int iteration = 0;  // evaluation index within the restart, initial draws first
  std::string config_text;
  std::optional<double> cost;  // nullopt = FAILED
  double seconds = 0;

  // "restart\titeration\tconfig\tcost|FAILED\tseconds"
  std::string line() const;
};

struct ExploreContext {
  const SourceUnit* unit = nullptr;
  const KernelInfo* info = nullptr;
  const DesignTree* tree = nullptr;
  Evaluator* evaluator = nullptr;
  PartSpec part;
  // Per-evaluation workdirs are created below this directory.
  std::filesystem::path work_root;
  GpOptions gp;
  // Called after every evaluation, in order, from the exploring thread.
  std::function<void(const RunLogRecord&)> on_record;
  // Called for every valid design as soon as it is evaluated.
  std::function<void(const DesignPoint&)> on_design;
};

struct ExploreResult {
  std::vector<DesignPoint> designs;  // valid, deduplicated, first-seen order
  std::vector<RunLogRecord> log;
};

// Restarts run one after another with seeds seed + restart index.
ExploreResult explore_bayesian(const ExploreContext& ctx, const ExplorerBudget& budget);

}  // namespace forge
