#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace monoped {

// Standard normal draws via plain Box-Muller: every call consumes exactly two
// 64-bit draws from the engine and nothing is cached, so a stream of k
// normals always advances the engine by 2k states. That makes candidate
// sampling reproducible regardless of how results are consumed.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double operator()();

 private:
  std::mt19937_64 rng_;
};

struct CmaParams {
  int dimension = 0;
  std::vector<double> mean0;
  double sigma0 = 0.3;
  // Component-wise box; leave empty for an unconstrained search.
  std::vector<double> lower;
  std::vector<double> upper;
  int lambda = 0;  // 0 = 4 + floor(3 ln n)
  int resample_limit = 10;
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
  int effective_lambda() const;
};

// Covariance matrix adaptation evolution strategy, weighted-recombination
// form with cumulative step-size control and rank-one plus rank-mu updates.
// Out-of-box candidates are resampled up to resample_limit times, then
// clipped; the update always uses the pre-clip displacement so the adapted
// distribution stays consistent with what was sampled.
class CmaEs {
 public:
  explicit CmaEs(const CmaParams& params);

  // Sample one population. Returned points are inside the box (if any).
  const std::vector<std::vector<double>>& ask();

  // Rank the population just asked for and update mean, paths, covariance,
  // and step size. Costs must be finite and in candidate order.
  void tell(const std::vector<double>& costs);

  int dimension() const { return n_; }
  int lambda() const { return lambda_; }
  int generation() const { return generation_; }
  double sigma() const { return sigma_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::VectorXd& path_sigma() const { return path_sigma_; }
  const Eigen::VectorXd& path_cov() const { return path_cov_; }
  double best_cost() const { return best_cost_; }
  const std::vector<double>& best_point() const { return best_point_; }
  // True when the last decomposition had to floor an eigenvalue to keep the
  // sampling covariance positive definite.
  bool repaired() const { return repaired_; }

 private:
  void decompose();
  bool in_box(const Eigen::VectorXd& x) const;

  int n_ = 0;
  int lambda_ = 0;
  int mu_ = 0;
  int resample_limit_ = 10;
  Eigen::VectorXd weights_;
  double mu_eff_ = 0.0;
  double c_sigma_ = 0.0, d_sigma_ = 0.0;
  double c_cov_path_ = 0.0, c_rank1_ = 0.0, c_rankmu_ = 0.0;
  double chi_n_ = 0.0;

  Eigen::VectorXd lower_, upper_;
  bool bounded_ = false;

  Eigen::VectorXd mean_;
  double sigma_ = 0.0;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd eigen_basis_;   // B
  Eigen::VectorXd eigen_scale_;   // sqrt of eigenvalues, floored
  Eigen::VectorXd path_sigma_;
  Eigen::VectorXd path_cov_;
  int generation_ = 0;

  NormalSampler sampler_{0};
  std::vector<std::vector<double>> asked_;     // clipped points handed out
  std::vector<Eigen::VectorXd> displacement_;  // pre-clip B D z per candidate
  bool pending_ = false;
  bool repaired_ = false;

  double best_cost_;
  std::vector<double> best_point_;
};

struct CmaGenerationStat {
  int generation = 0;      // 1-based, matches CmaEs::generation() after tell
  double best_cost = 0.0;  // best-ever, so the column is non-increasing
  double median_cost = 0.0;
  double sigma = 0.0;
};

struct CmaResult {
  std::vector<double> best_point;
  double best_cost = 0.0;
  int generations = 0;
  long evaluations = 0;
  std::vector<CmaGenerationStat> history;
};

// Serial convenience loop: run up to max_generations, stopping early once
// best_cost <= target_cost (pass -inf to disable).
CmaResult minimize(const CmaParams& params,
                   const std::function<double(const std::vector<double>&)>& cost,
                   int max_generations, double target_cost);

}  // namespace monoped
