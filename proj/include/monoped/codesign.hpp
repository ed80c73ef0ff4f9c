#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monoped/dynamics.hpp"
#include "monoped/stage1.hpp"

namespace monoped {

inline constexpr int kDesignDim = 7;

// The 7-D search point: leg geometry, the two gear ratios, and the
// controller gains. Defaults are the nominal robot.
struct DesignVector {
  double thigh_length_m = 0.4;
  double shank_length_m = 0.4;
  double knee_gear_ratio = 6.0;
  double hip_gear_ratio = 6.0;
  double spring_stiffness_N_per_m = 50.0;
  double spring_damping_Ns_per_m = 2.5;
  double torsion_stiffness_Nm_per_rad = 10.0;

  std::array<double, kDesignDim> to_array() const;
  static DesignVector from_array(const std::array<double, kDesignDim>& a);
};

// Coordinate names in to_array order, used for config files, artifacts, and
// bound-violation messages.
extern const std::array<const char*, kDesignDim> kDesignVariableNames;

struct DesignBounds {
  std::array<double, kDesignDim> lower{0.3, 0.3, 4.0, 4.0, 5.0, 0.0, 0.0};
  std::array<double, kDesignDim> upper{0.5, 0.5, 8.7, 8.7, 200.0, 10.0, 50.0};

  void validate() const;
  bool contains(const std::array<double, kDesignDim>& y) const;
  // Index of the first out-of-bounds coordinate, -1 when y is inside.
  int first_violation(const std::array<double, kDesignDim>& y) const;
};

struct CostConfig {
  double lambda_height = 1.0;
  double lambda_energy = 1.0;
  double height_scale_J = 30.0;         // multiplies exp(-h)
  double infeasible_penalty_J = 300.0;  // must dominate every feasible cost

  void validate() const;
};

// Which coordinates the optimizer may move. Frozen coordinates are pinned to
// frozen_values; the named studies pin them at the nominal design.
struct CaseSpec {
  std::string label = "c";
  std::array<bool, kDesignDim> frozen{};
  DesignVector frozen_values;

  static CaseSpec nominal();      // everything pinned: evaluate one point
  static CaseSpec fixed_links();  // study a: link lengths stay nominal
  static CaseSpec fixed_ratios(); // study b: gear ratios stay nominal
  static CaseSpec free_all();     // study c
  // Accepts "nominal" (alias "nominal-eval"), "a", "b", "c".
  static CaseSpec from_name(const std::string& name);

  int free_count() const;
  void validate(const DesignBounds& bounds) const;
};

struct DecodeConfig {
  double base_mass_kg = 1.5;           // chassis before the two actuators bolt on
  double rest_length_scale = 0.9;      // spring rest length over full leg reach
  double rest_angle_rad = 0.0;
  LinkMassParams link;
  MaterialTable materials;
  double gravity_mps2 = 9.81;

  void validate() const;
};

struct DecodedDesign {
  RobotModel model;
  ControllerParams controller;
  ActuatorDesign hip;
  ActuatorDesign knee;
};

// Builds the simulated robot for a point: actuators from the catalog bins the
// two ratios fall in, link masses from the length model, controller gains
// passed through. Returns nullopt when a requested ratio bin has no feasible
// actuator; callers score that with the infeasible penalty.
std::optional<DecodedDesign> decode_design(const DesignVector& y,
                                           const ActuatorCatalog& catalog,
                                           const DecodeConfig& config);

struct CostBreakdown {
  double cost = 0.0;
  bool penalized = false;      // cost is the flat infeasible penalty
  bool decode_failed = false;  // no feasible actuator for a requested ratio
  TerminationReason reason = TerminationReason::NoLiftoff;
  double jump_height_m = 0.0;
  double positive_work_J = 0.0;
  double liftoff_speed_mps = 0.0;
  double liftoff_time_s = -1.0;
};

// cost = lambda_height * height_scale * exp(-h) + lambda_energy * work,
// or the flat penalty when decode fails or the rollout does not jump.
CostBreakdown evaluate_design(const DesignVector& y, const ActuatorCatalog& catalog,
                              const DecodeConfig& decode, const SimConfig& sim,
                              const CostConfig& cost);

struct CodesignConfig {
  DesignBounds bounds;
  CaseSpec study = CaseSpec::free_all();
  CostConfig cost;
  DecodeConfig decode;
  SimConfig sim;
  int population = 16;
  int max_generations = 100;
  double sigma0 = 0.3;  // in unit-box coordinates; one value serves all units
  std::uint64_t seed = 1;
  int jobs = 0;  // parallel rollout evaluation; 0 = hardware default

  void validate() const;
};

struct GenerationStat {
  int generation = 0;
  double best_cost = 0.0;  // best-ever, non-increasing down the history
  double median_cost = 0.0;
  double sigma = 0.0;
  double best_height_m = 0.0;  // of the best-ever design
  double best_energy_J = 0.0;
};

struct CodesignResult {
  DesignVector best;
  CostBreakdown best_eval;
  JumpResult best_rollout;  // best design re-simulated with the trace on
  std::vector<GenerationStat> history;
  long evaluations = 0;
  // Largest non-penalized cost seen; audits that the penalty dominates.
  double max_feasible_cost = 0.0;
  bool saw_feasible = false;
};

// Runs the evolution strategy over the unfrozen coordinates, scaled to the
// unit box. A fully frozen case evaluates the pinned point once and returns.
CodesignResult optimize_case(const CodesignConfig& config,
                             const ActuatorCatalog& catalog);

// Header: gen,best_cost,median_cost,sigma,best_h,best_E
std::string history_to_csv(const std::vector<GenerationStat>& history);

}  // namespace monoped
