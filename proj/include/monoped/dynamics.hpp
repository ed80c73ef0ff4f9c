#pragma once

#include <string>
#include <vector>

namespace monoped {

// Planar monoped: a point-mass base (body plus both actuators) carrying a
// two-link leg. Angles are hip-from-vertical and knee-relative; the foot is
// treated as a pin joint while in stance.
struct RobotModel {
  double base_mass_kg = 0.0;
  double thigh_mass_kg = 0.0;  // acts at the thigh midpoint
  double shank_mass_kg = 0.0;  // acts at the shank midpoint
  double thigh_length_m = 0.0;
  double shank_length_m = 0.0;
  double hip_peak_torque_Nm = 0.0;
  double knee_peak_torque_Nm = 0.0;
  // Rotor inertia as seen at the joint, i.e. gear_ratio^2 * rotor inertia.
  double hip_reflected_inertia_kgm2 = 0.0;
  double knee_reflected_inertia_kgm2 = 0.0;
  double gravity_mps2 = 9.81;

  double total_mass_kg() const {
    return base_mass_kg + thigh_mass_kg + shank_mass_kg;
  }
  void validate() const;  // throws std::invalid_argument
};

// Virtual-model controller: a spring-damper along the hip-to-foot line plus
// a torsion spring on the leg angle, with the robot's weight fed forward.
struct ControllerParams {
  double spring_stiffness_N_per_m = 0.0;
  double spring_damping_Ns_per_m = 0.0;
  double torsion_stiffness_Nm_per_rad = 0.0;
  double rest_length_m = 0.0;
  double rest_angle_rad = 0.0;

  void validate() const;
};

struct SimConfig {
  double dt_s = 0.002;
  double start_leg_length_m = 0.5;  // crouch depth the jump starts from
  double max_sim_time_s = 2.0;
  bool stop_at_apex = true;  // otherwise fly until touchdown
  bool record_trace = false;

  void validate() const;
};

struct LegState {
  double hip_rad = 0.0;
  double knee_rad = 0.0;
  double hip_radps = 0.0;
  double knee_radps = 0.0;
};

// Foot position relative to the base, its polar form, and the velocity
// Jacobian d(foot)/d(hip, knee). Row 1 is x, row 2 is z.
struct LegGeometry {
  double foot_x_m = 0.0;
  double foot_z_m = 0.0;
  double length_m = 0.0;
  double angle_rad = 0.0;  // from straight down, positive toward +x
  double j11 = 0.0, j12 = 0.0;
  double j21 = 0.0, j22 = 0.0;
};

struct BodyWrench {
  double fx_N = 0.0;
  double fz_N = 0.0;  // desired force on the base, world frame
};

struct JointTorques {
  double hip_Nm = 0.0;
  double knee_Nm = 0.0;
};

struct StanceDerivs {
  double hip_acc_radps2 = 0.0;
  double knee_acc_radps2 = 0.0;
  double ground_fx_N = 0.0;  // force the ground applies to the robot
  double ground_fz_N = 0.0;
};

enum class TerminationReason {
  Landed,            // flight completed (apex or touchdown)
  MaxSimTime,        // flight truncated by the time budget
  NoLiftoff,         // stance never produced a tensile contact
  NumericalFailure,  // state stopped being finite
  Singularity,       // crouch unreachable, knee lockout, or chain folded flat
};
const char* to_string(TerminationReason reason);

struct TraceRow {
  double t_s = 0.0;
  double base_z_m = 0.0;
  double hip_rad = 0.0;
  double knee_rad = 0.0;
  double hip_radps = 0.0;
  double knee_radps = 0.0;
  double hip_torque_Nm = 0.0;
  double knee_torque_Nm = 0.0;
  double leg_length_m = 0.0;
  double leg_angle_rad = 0.0;
  double ground_fx_N = 0.0;
  double ground_fz_N = 0.0;
  int phase = 0;  // 0 stance, 1 flight
};

struct JumpResult {
  TerminationReason reason = TerminationReason::NoLiftoff;
  double jump_height_m = 0.0;     // peak base height, foot pin at z = 0
  double liftoff_time_s = -1.0;   // -1 when stance never ends
  double liftoff_speed_mps = 0.0; // vertical base speed when contact breaks
  double positive_work_J = 0.0;   // actuator work, positive lobes only
  int stance_steps = 0;
  std::vector<TraceRow> trace;    // filled when SimConfig::record_trace
};

LegGeometry leg_geometry(const RobotModel& model, double hip_rad, double knee_rad);

// Time derivatives of (length, angle) for the given joint rates.
void leg_polar_rates(const LegGeometry& geom, double hip_radps, double knee_radps,
                     double* length_rate_mps, double* angle_rate_radps);

// Crouch pose: leg vertical at the given length, knee folded backward, at
// rest. Throws std::domain_error when the length is outside the workspace.
LegState leg_ik(const RobotModel& model, double length_m);

BodyWrench vmc_wrench(const RobotModel& model, const ControllerParams& controller,
                      const LegGeometry& geom, double length_rate_mps);

// Joint torques realizing a desired base wrench through the pinned leg.
JointTorques joint_torques(const LegGeometry& geom, const BodyWrench& wrench);

JointTorques clamp_torques(const JointTorques& raw, const RobotModel& model);

// Joint-space mass matrix [m11 m12; m12 m22] at the given knee angle,
// including reflected rotor terms.
void stance_mass_matrix(const RobotModel& model, double knee_rad, double out[3]);

// Kinetic plus potential energy of the pinned chain.
double stance_energy(const RobotModel& model, const LegState& state);

StanceDerivs stance_dynamics(const RobotModel& model, const LegState& state,
                             const JointTorques& torques);

// Semi-implicit Euler: rates first, then angles.
LegState stance_step(const RobotModel& model, const LegState& state,
                     const JointTorques& torques, double dt_s);

// Positive part of the actuator power, integrated with fixed step dt. All
// four series share the same sample times.
double positive_actuator_work_J(const std::vector<double>& hip_torque_Nm,
                                const std::vector<double>& hip_radps,
                                const std::vector<double>& knee_torque_Nm,
                                const std::vector<double>& knee_radps, double dt_s);

// One jump: crouched stance under the virtual-model controller until the
// required ground force turns tensile, then ballistic flight of the frozen
// configuration.
JumpResult rollout(const RobotModel& model, const ControllerParams& controller,
                   const SimConfig& sim);

std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace monoped
