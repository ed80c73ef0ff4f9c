#include "monoped/codesign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <stdexcept>
#include <thread>

#include "monoped/cmaes.hpp"

namespace monoped {

const std::array<const char*, kDesignDim> kDesignVariableNames = {
    "thigh_length_m",           "shank_length_m",
    "knee_gear_ratio",          "hip_gear_ratio",
    "spring_stiffness_N_per_m", "spring_damping_Ns_per_m",
    "torsion_stiffness_Nm_per_rad"};

std::array<double, kDesignDim> DesignVector::to_array() const {
  return {thigh_length_m,         shank_length_m,          knee_gear_ratio,
          hip_gear_ratio,         spring_stiffness_N_per_m, spring_damping_Ns_per_m,
          torsion_stiffness_Nm_per_rad};
}

DesignVector DesignVector::from_array(const std::array<double, kDesignDim>& a) {
  DesignVector y;
  y.thigh_length_m = a[0];
  y.shank_length_m = a[1];
  y.knee_gear_ratio = a[2];
  y.hip_gear_ratio = a[3];
  y.spring_stiffness_N_per_m = a[4];
  y.spring_damping_Ns_per_m = a[5];
  y.torsion_stiffness_Nm_per_rad = a[6];
  return y;
}

void DesignBounds::validate() const {
  for (int i = 0; i < kDesignDim; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
      throw std::invalid_argument(std::string("bounds: bad interval for ") +
                                  kDesignVariableNames[i]);
  }
}

bool DesignBounds::contains(const std::array<double, kDesignDim>& y) const {
  return first_violation(y) < 0;
}

int DesignBounds::first_violation(const std::array<double, kDesignDim>& y) const {
  for (int i = 0; i < kDesignDim; ++i)
    if (!(y[i] >= lower[i] && y[i] <= upper[i])) return i;
  return -1;
}

void CostConfig::validate() const {
  if (lambda_height < 0.0 || lambda_energy < 0.0)
    throw std::invalid_argument("cost: weights must be >= 0");
  if (lambda_height == 0.0 && lambda_energy == 0.0)
    throw std::invalid_argument("cost: at least one weight must be positive");
  if (!(height_scale_J > 0.0))
    throw std::invalid_argument("cost: height_scale_J must be > 0");
  if (!(infeasible_penalty_J > 0.0) || !std::isfinite(infeasible_penalty_J))
    throw std::invalid_argument("cost: infeasible_penalty_J must be positive and finite");
}

CaseSpec CaseSpec::nominal() {
  CaseSpec s;
  s.label = "nominal";
  s.frozen.fill(true);
  return s;
}

CaseSpec CaseSpec::fixed_links() {
  CaseSpec s;
  s.label = "a";
  s.frozen[0] = true;
  s.frozen[1] = true;
  return s;
}

CaseSpec CaseSpec::fixed_ratios() {
  CaseSpec s;
  s.label = "b";
  s.frozen[2] = true;
  s.frozen[3] = true;
  return s;
}

CaseSpec CaseSpec::free_all() {
  CaseSpec s;
  s.label = "c";
  return s;
}

CaseSpec CaseSpec::from_name(const std::string& name) {
  if (name == "nominal" || name == "nominal-eval") return nominal();
  if (name == "a") return fixed_links();
  if (name == "b") return fixed_ratios();
  if (name == "c") return free_all();
  throw std::invalid_argument("unknown study case: " + name);
}

int CaseSpec::free_count() const {
  int n = 0;
  for (bool f : frozen)
    if (!f) ++n;
  return n;
}

void CaseSpec::validate(const DesignBounds& bounds) const {
  const auto values = frozen_values.to_array();
  for (int i = 0; i < kDesignDim; ++i) {
    if (!frozen[i]) continue;
    if (!(values[i] >= bounds.lower[i] && values[i] <= bounds.upper[i]))
      throw std::invalid_argument(std::string("case ") + label + ": frozen " +
                                  kDesignVariableNames[i] + " is outside its bounds");
  }
}

void DecodeConfig::validate() const {
  if (!(base_mass_kg > 0.0)) throw std::invalid_argument("decode: base_mass_kg must be > 0");
  if (!(rest_length_scale > 0.0) || rest_length_scale > 1.0)
    throw std::invalid_argument("decode: rest_length_scale must be in (0, 1]");
  if (!std::isfinite(rest_angle_rad))
    throw std::invalid_argument("decode: rest_angle_rad must be finite");
  if (!(gravity_mps2 > 0.0)) throw std::invalid_argument("decode: gravity_mps2 must be > 0");
  link.validate();
  materials.validate();
}

std::optional<DecodedDesign> decode_design(const DesignVector& y,
                                           const ActuatorCatalog& catalog,
                                           const DecodeConfig& config) {
  const ActuatorDesign* knee = catalog.lookup(y.knee_gear_ratio);
  const ActuatorDesign* hip = catalog.lookup(y.hip_gear_ratio);
  if (knee == nullptr || hip == nullptr) return std::nullopt;

  DecodedDesign d;
  d.hip = *hip;
  d.knee = *knee;

  d.model.base_mass_kg = config.base_mass_kg + hip->mass_kg + knee->mass_kg;
  d.model.thigh_mass_kg = link_mass_kg(y.thigh_length_m, config.link, config.materials);
  d.model.shank_mass_kg = link_mass_kg(y.shank_length_m, config.link, config.materials);
  d.model.thigh_length_m = y.thigh_length_m;
  d.model.shank_length_m = y.shank_length_m;
  d.model.hip_peak_torque_Nm = hip->peak_torque_Nm;
  d.model.knee_peak_torque_Nm = knee->peak_torque_Nm;
  // Reflected inertia scales with the realized ratio, not the bin center.
  d.model.hip_reflected_inertia_kgm2 =
      hip->ratio * hip->ratio * catalog.motor.rotor_inertia_kgm2;
  d.model.knee_reflected_inertia_kgm2 =
      knee->ratio * knee->ratio * catalog.motor.rotor_inertia_kgm2;
  d.model.gravity_mps2 = config.gravity_mps2;

  d.controller.spring_stiffness_N_per_m = y.spring_stiffness_N_per_m;
  d.controller.spring_damping_Ns_per_m = y.spring_damping_Ns_per_m;
  d.controller.torsion_stiffness_Nm_per_rad = y.torsion_stiffness_Nm_per_rad;
  d.controller.rest_length_m =
      config.rest_length_scale * (y.thigh_length_m + y.shank_length_m);
  d.controller.rest_angle_rad = config.rest_angle_rad;

  d.model.validate();
  d.controller.validate();
  return d;
}

CostBreakdown evaluate_design(const DesignVector& y, const ActuatorCatalog& catalog,
                              const DecodeConfig& decode, const SimConfig& sim,
                              const CostConfig& cost) {
  CostBreakdown out;
  const auto design = decode_design(y, catalog, decode);
  if (!design) {
    out.cost = cost.infeasible_penalty_J;
    out.penalized = true;
    out.decode_failed = true;
    return out;
  }

  const JumpResult r = rollout(design->model, design->controller, sim);
  out.reason = r.reason;
  out.jump_height_m = r.jump_height_m;
  out.positive_work_J = r.positive_work_J;
  out.liftoff_speed_mps = r.liftoff_speed_mps;
  out.liftoff_time_s = r.liftoff_time_s;

  const bool jumped = r.reason == TerminationReason::Landed ||
                      r.reason == TerminationReason::MaxSimTime;
  if (!jumped) {
    out.cost = cost.infeasible_penalty_J;
    out.penalized = true;
    return out;
  }
  out.cost = cost.lambda_height * cost.height_scale_J * std::exp(-r.jump_height_m) +
             cost.lambda_energy * r.positive_work_J;
  return out;
}

void CodesignConfig::validate() const {
  bounds.validate();
  study.validate(bounds);
  cost.validate();
  decode.validate();
  sim.validate();
  if (population < 2) throw std::invalid_argument("codesign: population must be >= 2");
  if (max_generations < 1)
    throw std::invalid_argument("codesign: max_generations must be >= 1");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("codesign: sigma0 must be > 0");
  if (jobs < 0) throw std::invalid_argument("codesign: jobs must be >= 0");
}

namespace {

// Evaluate one population, results stored by candidate index so the outcome
// does not depend on the worker count.
void evaluate_population(const std::vector<DesignVector>& designs,
                         const ActuatorCatalog& catalog, const DecodeConfig& decode,
                         const SimConfig& sim, const CostConfig& cost, int jobs,
                         std::vector<CostBreakdown>& out) {
  const std::size_t count = designs.size();
  out.assign(count, CostBreakdown{});
  std::size_t workers = jobs > 0
                            ? static_cast<std::size_t>(jobs)
                            : std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&]() {
    try {
      while (true) {
        const std::size_t k = next.fetch_add(1);
        if (k >= count) break;
        out[k] = evaluate_design(designs[k], catalog, decode, sim, cost);
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) std::rethrow_exception(failure);
}

}  // namespace

CodesignResult optimize_case(const CodesignConfig& config, const ActuatorCatalog& catalog) {
  config.validate();

  std::vector<int> free_index;
  for (int i = 0; i < kDesignDim; ++i)
    if (!config.study.frozen[i]) free_index.push_back(i);
  const int dim = static_cast<int>(free_index.size());

  const auto assemble = [&](const std::vector<double>& u) {
    auto full = config.study.frozen_values.to_array();
    for (int j = 0; j < dim; ++j) {
      const int i = free_index[j];
      full[i] = config.bounds.lower[i] + u[j] * (config.bounds.upper[i] - config.bounds.lower[i]);
    }
    return DesignVector::from_array(full);
  };

  CodesignResult result;
  SimConfig trace_sim = config.sim;
  trace_sim.record_trace = true;

  if (dim == 0) {
    result.best = config.study.frozen_values;
    result.best_eval =
        evaluate_design(result.best, catalog, config.decode, config.sim, config.cost);
    result.evaluations = 1;
    if (!result.best_eval.penalized) {
      result.saw_feasible = true;
      result.max_feasible_cost = result.best_eval.cost;
    }
    result.history.push_back({1, result.best_eval.cost, result.best_eval.cost, 0.0,
                              result.best_eval.jump_height_m,
                              result.best_eval.positive_work_J});
    if (const auto d = decode_design(result.best, catalog, config.decode))
      result.best_rollout = rollout(d->model, d->controller, trace_sim);
    return result;
  }

  CmaParams params;
  params.dimension = dim;
  params.mean0.assign(dim, 0.5);
  params.sigma0 = config.sigma0;
  params.lower.assign(dim, 0.0);
  params.upper.assign(dim, 1.0);
  params.lambda = config.population;
  params.seed = config.seed;

  CmaEs es(params);
  std::vector<DesignVector> designs(config.population);
  std::vector<CostBreakdown> evals;
  std::vector<double> costs(config.population);
  std::vector<double> sorted(config.population);

  bool have_best = false;
  double best_cost = 0.0;
  for (int g = 0; g < config.max_generations; ++g) {
    const auto& pop = es.ask();
    for (int k = 0; k < config.population; ++k) designs[k] = assemble(pop[k]);
    evaluate_population(designs, catalog, config.decode, config.sim, config.cost,
                        config.jobs, evals);
    for (int k = 0; k < config.population; ++k) {
      costs[k] = evals[k].cost;
      if (!evals[k].penalized) {
        result.saw_feasible = true;
        result.max_feasible_cost = std::max(result.max_feasible_cost, evals[k].cost);
      }
      if (!have_best || evals[k].cost < best_cost) {
        have_best = true;
        best_cost = evals[k].cost;
        result.best = designs[k];
        result.best_eval = evals[k];
      }
    }
    es.tell(costs);
    result.evaluations += config.population;

    sorted = costs;
    std::sort(sorted.begin(), sorted.end());
    result.history.push_back({g + 1, best_cost, sorted[(sorted.size() - 1) / 2],
                              es.sigma(), result.best_eval.jump_height_m,
                              result.best_eval.positive_work_J});
  }

  if (const auto d = decode_design(result.best, catalog, config.decode))
    result.best_rollout = rollout(d->model, d->controller, trace_sim);
  return result;
}

std::string history_to_csv(const std::vector<GenerationStat>& history) {
  std::string out = "gen,best_cost,median_cost,sigma,best_h,best_E\n";
  char line[192];
  for (const auto& row : history) {
    std::snprintf(line, sizeof(line), "%d,%.9f,%.9f,%.9f,%.9f,%.9f\n", row.generation,
                  row.best_cost, row.median_cost, row.sigma, row.best_height_m,
                  row.best_energy_J);
    out += line;
  }
  return out;
}

}  // namespace monoped
