#include "monoped/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace monoped {

double NormalSampler::operator()() {
  // Two uniforms in (0,1), each from the top 53 bits of one engine draw.
  const double u1 =
      (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
  const double u2 =
      (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

void CmaParams::validate() const {
  if (dimension < 1) throw std::invalid_argument("cmaes: dimension must be positive");
  if (mean0.size() != static_cast<std::size_t>(dimension))
    throw std::invalid_argument("cmaes: mean0 size does not match dimension");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw std::invalid_argument("cmaes: sigma0 must be positive and finite");
  if (lambda != 0 && lambda < 2)
    throw std::invalid_argument("cmaes: lambda must be at least 2");
  if (resample_limit < 0)
    throw std::invalid_argument("cmaes: resample_limit must be non-negative");
  if (lower.empty() != upper.empty())
    throw std::invalid_argument("cmaes: bounds must be given as a pair or not at all");
  if (!lower.empty()) {
    if (lower.size() != static_cast<std::size_t>(dimension) ||
        upper.size() != static_cast<std::size_t>(dimension))
      throw std::invalid_argument("cmaes: bound sizes do not match dimension");
    for (int i = 0; i < dimension; ++i) {
      if (!(lower[i] < upper[i]))
        throw std::invalid_argument("cmaes: each lower bound must be below its upper bound");
      if (mean0[i] < lower[i] || mean0[i] > upper[i])
        throw std::invalid_argument("cmaes: mean0 must start inside the bounds");
    }
  }
}

int CmaParams::effective_lambda() const {
  if (lambda > 0) return lambda;
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

CmaEs::CmaEs(const CmaParams& params) {
  params.validate();
  n_ = params.dimension;
  lambda_ = params.effective_lambda();
  mu_ = lambda_ / 2;
  resample_limit_ = params.resample_limit;

  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i)
    weights_[i] = std::log(mu_ + 0.5) - std::log(static_cast<double>(i + 1));
  weights_ /= weights_.sum();
  mu_eff_ = 1.0 / weights_.squaredNorm();

  const double n = static_cast<double>(n_);
  c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
  c_cov_path_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  c_rank1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  c_rankmu_ = std::min(1.0 - c_rank1_,
                       2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  bounded_ = !params.lower.empty();
  if (bounded_) {
    lower_ = Eigen::Map<const Eigen::VectorXd>(params.lower.data(), n_);
    upper_ = Eigen::Map<const Eigen::VectorXd>(params.upper.data(), n_);
  }

  mean_ = Eigen::Map<const Eigen::VectorXd>(params.mean0.data(), n_);
  sigma_ = params.sigma0;
  cov_ = Eigen::MatrixXd::Identity(n_, n_);
  path_sigma_ = Eigen::VectorXd::Zero(n_);
  path_cov_ = Eigen::VectorXd::Zero(n_);
  best_cost_ = std::numeric_limits<double>::infinity();

  sampler_ = NormalSampler(params.seed);
  decompose();
}

void CmaEs::decompose() {
  const Eigen::MatrixXd sym = 0.5 * (cov_ + cov_.transpose());
  cov_ = sym;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("cmaes: eigendecomposition failed");
  eigen_basis_ = solver.eigenvectors();
  Eigen::VectorXd values = solver.eigenvalues();
  repaired_ = false;
  for (int i = 0; i < n_; ++i) {
    if (values[i] < 1e-14) {
      values[i] = 1e-14;
      repaired_ = true;
    }
  }
  eigen_scale_ = values.cwiseSqrt();
  // Fix each eigenvector's sign so equal runs on any backend agree: the
  // entry of largest magnitude (first such, scanning down) is made positive.
  for (int j = 0; j < n_; ++j) {
    int pivot = 0;
    double biggest = -1.0;
    for (int i = 0; i < n_; ++i) {
      const double a = std::abs(eigen_basis_(i, j));
      if (a > biggest) {
        biggest = a;
        pivot = i;
      }
    }
    if (eigen_basis_(pivot, j) < 0.0) eigen_basis_.col(j) = -eigen_basis_.col(j);
  }
}

bool CmaEs::in_box(const Eigen::VectorXd& x) const {
  for (int i = 0; i < n_; ++i)
    if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
  return true;
}

const std::vector<std::vector<double>>& CmaEs::ask() {
  asked_.assign(lambda_, std::vector<double>(n_));
  displacement_.assign(lambda_, Eigen::VectorXd(n_));
  Eigen::VectorXd z(n_), y(n_), x(n_);
  for (int k = 0; k < lambda_; ++k) {
    for (int attempt = 0;; ++attempt) {
      for (int i = 0; i < n_; ++i) z[i] = sampler_();
      y = eigen_basis_ * (eigen_scale_.asDiagonal() * z);
      x = mean_ + sigma_ * y;
      if (!bounded_ || in_box(x)) break;
      if (attempt == resample_limit_) {
        x = x.cwiseMax(lower_).cwiseMin(upper_);
        break;
      }
    }
    displacement_[k] = y;
    Eigen::Map<Eigen::VectorXd>(asked_[k].data(), n_) = x;
  }
  pending_ = true;
  return asked_;
}

void CmaEs::tell(const std::vector<double>& costs) {
  if (!pending_) throw std::logic_error("cmaes: tell without a matching ask");
  if (costs.size() != static_cast<std::size_t>(lambda_))
    throw std::invalid_argument("cmaes: cost count does not match the population");
  for (double c : costs)
    if (!std::isfinite(c)) throw std::runtime_error("cmaes: non-finite cost");

  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (costs[a] != costs[b]) return costs[a] < costs[b];
    return a < b;  // deterministic ranking under ties
  });

  if (costs[order[0]] < best_cost_) {
    best_cost_ = costs[order[0]];
    best_point_ = asked_[order[0]];
  }

  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < mu_; ++i) y_w += weights_[i] * displacement_[order[i]];

  mean_ += sigma_ * y_w;

  // C^(-1/2) y_w through the cached eigenpair.
  const Eigen::VectorXd whitened =
      eigen_basis_ *
      (eigen_scale_.cwiseInverse().asDiagonal() * (eigen_basis_.transpose() * y_w));

  path_sigma_ = (1.0 - c_sigma_) * path_sigma_ +
                std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * whitened;

  const double decay = 1.0 - std::pow(1.0 - c_sigma_, 2.0 * (generation_ + 1));
  const bool stalled =
      path_sigma_.norm() / std::sqrt(decay) >=
      (1.4 + 2.0 / (n_ + 1.0)) * chi_n_;
  const double h_sigma = stalled ? 0.0 : 1.0;

  path_cov_ = (1.0 - c_cov_path_) * path_cov_ +
              h_sigma * std::sqrt(c_cov_path_ * (2.0 - c_cov_path_) * mu_eff_) * y_w;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < mu_; ++i) {
    const Eigen::VectorXd& y = displacement_[order[i]];
    rank_mu.noalias() += weights_[i] * (y * y.transpose());
  }

  cov_ = (1.0 - c_rank1_ - c_rankmu_) * cov_ +
         c_rank1_ * (path_cov_ * path_cov_.transpose() +
                     (1.0 - h_sigma) * c_cov_path_ * (2.0 - c_cov_path_) * cov_) +
         c_rankmu_ * rank_mu;

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (path_sigma_.norm() / chi_n_ - 1.0));

  decompose();
  ++generation_;
  pending_ = false;
}

CmaResult minimize(const CmaParams& params,
                   const std::function<double(const std::vector<double>&)>& cost,
                   int max_generations, double target_cost) {
  if (max_generations < 1)
    throw std::invalid_argument("cmaes: max_generations must be positive");
  CmaEs es(params);
  CmaResult result;
  std::vector<double> costs(es.lambda());
  std::vector<double> sorted(es.lambda());
  for (int g = 0; g < max_generations; ++g) {
    const auto& pop = es.ask();
    for (int k = 0; k < es.lambda(); ++k) costs[k] = cost(pop[k]);
    es.tell(costs);
    sorted = costs;
    std::sort(sorted.begin(), sorted.end());
    result.history.push_back({es.generation(), es.best_cost(),
                              sorted[(sorted.size() - 1) / 2], es.sigma()});
    result.evaluations += es.lambda();
    result.generations = g + 1;
    if (es.best_cost() <= target_cost) break;
  }
  result.best_point = es.best_point();
  result.best_cost = es.best_cost();
  return result;
}

}  // namespace monoped
