#include "monoped/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace monoped {

namespace {

// Lumped coefficients of the pinned two-link chain. With thigh and shank
// masses at the link midpoints the mass matrix, Coriolis vector, and gravity
// vector all reduce to five pose-independent constants.
struct ChainCoeffs {
  double a;   // l1^2 (mB + mT/4)
  double b;   // l2^2 (mB + mT + mS/4)
  double d;   // l1 l2 (mB + mT/2)
  double ga;  // l1 (mB + mT/2)
  double gb;  // l2 (mB + mT + mS/2)
};

ChainCoeffs chain_coeffs(const RobotModel& m) {
  const double l1 = m.thigh_length_m, l2 = m.shank_length_m;
  ChainCoeffs c;
  c.a = l1 * l1 * (m.base_mass_kg + 0.25 * m.thigh_mass_kg);
  c.b = l2 * l2 * (m.base_mass_kg + m.thigh_mass_kg + 0.25 * m.shank_mass_kg);
  c.d = l1 * l2 * (m.base_mass_kg + 0.5 * m.thigh_mass_kg);
  c.ga = l1 * (m.base_mass_kg + 0.5 * m.thigh_mass_kg);
  c.gb = l2 * (m.base_mass_kg + m.thigh_mass_kg + 0.5 * m.shank_mass_kg);
  return c;
}

bool finite(const LegState& s) {
  return std::isfinite(s.hip_rad) && std::isfinite(s.knee_rad) &&
         std::isfinite(s.hip_radps) && std::isfinite(s.knee_radps);
}

// The stance model only describes a leg while the knee stays on the bent-back
// branch. Within this margin of straight (lockout) or folded flat the chain
// is about to cross the singular pose, where a contact-force sign flip can
// masquerade as liftoff; stop and report instead.
constexpr double kKneeBranchMarginRad = 1e-2;
constexpr double kPiKnee = 3.141592653589793238462643383279502884;

bool on_knee_branch(const LegState& s) {
  return s.knee_rad > kKneeBranchMarginRad &&
         s.knee_rad < kPiKnee - kKneeBranchMarginRad;
}

}  // namespace

void RobotModel::validate() const {
  if (base_mass_kg <= 0.0) throw std::invalid_argument("robot: base_mass_kg must be > 0");
  if (thigh_mass_kg <= 0.0 || shank_mass_kg <= 0.0)
    throw std::invalid_argument("robot: link masses must be > 0");
  if (thigh_length_m <= 0.0 || shank_length_m <= 0.0)
    throw std::invalid_argument("robot: link lengths must be > 0");
  if (!(hip_peak_torque_Nm > 0.0) || !(knee_peak_torque_Nm > 0.0))
    throw std::invalid_argument("robot: peak torques must be > 0");
  if (hip_reflected_inertia_kgm2 < 0.0 || knee_reflected_inertia_kgm2 < 0.0)
    throw std::invalid_argument("robot: reflected inertias must be >= 0");
  if (gravity_mps2 <= 0.0) throw std::invalid_argument("robot: gravity_mps2 must be > 0");
}

void ControllerParams::validate() const {
  if (spring_stiffness_N_per_m < 0.0)
    throw std::invalid_argument("controller: spring_stiffness_N_per_m must be >= 0");
  if (spring_damping_Ns_per_m < 0.0)
    throw std::invalid_argument("controller: spring_damping_Ns_per_m must be >= 0");
  if (torsion_stiffness_Nm_per_rad < 0.0)
    throw std::invalid_argument("controller: torsion_stiffness_Nm_per_rad must be >= 0");
  if (rest_length_m <= 0.0)
    throw std::invalid_argument("controller: rest_length_m must be > 0");
  if (!std::isfinite(rest_angle_rad))
    throw std::invalid_argument("controller: rest_angle_rad must be finite");
}

void SimConfig::validate() const {
  if (dt_s <= 0.0) throw std::invalid_argument("sim: dt_s must be > 0");
  if (start_leg_length_m <= 0.0)
    throw std::invalid_argument("sim: start_leg_length_m must be > 0");
  if (max_sim_time_s < dt_s)
    throw std::invalid_argument("sim: max_sim_time_s must cover at least one step");
}

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::Landed: return "landed";
    case TerminationReason::MaxSimTime: return "max-sim-time";
    case TerminationReason::NoLiftoff: return "no-liftoff";
    case TerminationReason::NumericalFailure: return "numerical-failure";
    case TerminationReason::Singularity: return "singularity";
  }
  return "unknown";
}

LegGeometry leg_geometry(const RobotModel& model, double hip_rad, double knee_rad) {
  const double l1 = model.thigh_length_m, l2 = model.shank_length_m;
  const double s1 = std::sin(hip_rad), c1 = std::cos(hip_rad);
  const double s12 = std::sin(hip_rad + knee_rad), c12 = std::cos(hip_rad + knee_rad);
  LegGeometry g;
  g.foot_x_m = l1 * s1 + l2 * s12;
  g.foot_z_m = -(l1 * c1 + l2 * c12);
  g.length_m = std::hypot(g.foot_x_m, g.foot_z_m);
  g.angle_rad = std::atan2(g.foot_x_m, -g.foot_z_m);
  g.j11 = l1 * c1 + l2 * c12;
  g.j12 = l2 * c12;
  g.j21 = l1 * s1 + l2 * s12;
  g.j22 = l2 * s12;
  return g;
}

void leg_polar_rates(const LegGeometry& geom, double hip_radps, double knee_radps,
                     double* length_rate_mps, double* angle_rate_radps) {
  const double rx_dot = geom.j11 * hip_radps + geom.j12 * knee_radps;
  const double rz_dot = geom.j21 * hip_radps + geom.j22 * knee_radps;
  const double l2 = geom.length_m * geom.length_m;
  if (length_rate_mps)
    *length_rate_mps =
        (geom.foot_x_m * rx_dot + geom.foot_z_m * rz_dot) / geom.length_m;
  if (angle_rate_radps)
    *angle_rate_radps = (geom.foot_x_m * rz_dot - rx_dot * geom.foot_z_m) / l2;
}

LegState leg_ik(const RobotModel& model, double length_m) {
  const double l1 = model.thigh_length_m, l2 = model.shank_length_m;
  const double c2 =
      (length_m * length_m - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (!(c2 > -1.0 && c2 < 1.0))
    throw std::domain_error("leg_ik: length outside the leg workspace");
  LegState s;
  s.knee_rad = std::acos(c2);  // fold backward: knee angle in (0, pi)
  s.hip_rad = -std::atan2(l2 * std::sin(s.knee_rad), l1 + l2 * c2);
  return s;
}

BodyWrench vmc_wrench(const RobotModel& model, const ControllerParams& controller,
                      const LegGeometry& geom, double length_rate_mps) {
  const double axial =
      controller.spring_stiffness_N_per_m * (controller.rest_length_m - geom.length_m) -
      controller.spring_damping_Ns_per_m * length_rate_mps;
  const double torsion = controller.torsion_stiffness_Nm_per_rad *
                         (controller.rest_angle_rad - geom.angle_rad);
  const double sa = std::sin(geom.angle_rad), ca = std::cos(geom.angle_rad);
  const double lateral = torsion / geom.length_m;
  BodyWrench w;
  w.fx_N = -axial * sa - lateral * ca;
  w.fz_N = axial * ca - lateral * sa +
           model.total_mass_kg() * model.gravity_mps2;  // weight feedforward
  return w;
}

JointTorques joint_torques(const LegGeometry& geom, const BodyWrench& wrench) {
  // Base moves as -foot while pinned, hence tau = -J^T F.
  JointTorques t;
  t.hip_Nm = -(geom.j11 * wrench.fx_N + geom.j21 * wrench.fz_N);
  t.knee_Nm = -(geom.j12 * wrench.fx_N + geom.j22 * wrench.fz_N);
  return t;
}

JointTorques clamp_torques(const JointTorques& raw, const RobotModel& model) {
  JointTorques t;
  t.hip_Nm = std::clamp(raw.hip_Nm, -model.hip_peak_torque_Nm, model.hip_peak_torque_Nm);
  t.knee_Nm =
      std::clamp(raw.knee_Nm, -model.knee_peak_torque_Nm, model.knee_peak_torque_Nm);
  return t;
}

void stance_mass_matrix(const RobotModel& model, double knee_rad, double out[3]) {
  const ChainCoeffs c = chain_coeffs(model);
  const double dc2 = c.d * std::cos(knee_rad);
  out[0] = c.a + c.b + 2.0 * dc2 + model.hip_reflected_inertia_kgm2;
  out[1] = c.b + dc2;
  out[2] = c.b + model.knee_reflected_inertia_kgm2;
}

double stance_energy(const RobotModel& model, const LegState& state) {
  double m[3];
  stance_mass_matrix(model, state.knee_rad, m);
  const double w1 = state.hip_radps, w2 = state.knee_radps;
  const double kinetic =
      0.5 * (m[0] * w1 * w1 + 2.0 * m[1] * w1 * w2 + m[2] * w2 * w2);
  const ChainCoeffs c = chain_coeffs(model);
  const double potential =
      model.gravity_mps2 * (c.ga * std::cos(state.hip_rad) +
                            c.gb * std::cos(state.hip_rad + state.knee_rad));
  return kinetic + potential;
}

StanceDerivs stance_dynamics(const RobotModel& model, const LegState& state,
                             const JointTorques& torques) {
  const ChainCoeffs c = chain_coeffs(model);
  const double s1 = std::sin(state.hip_rad), c1 = std::cos(state.hip_rad);
  const double s12 = std::sin(state.hip_rad + state.knee_rad);
  const double c12 = std::cos(state.hip_rad + state.knee_rad);
  const double s2 = std::sin(state.knee_rad), co2 = std::cos(state.knee_rad);
  const double w1 = state.hip_radps, w2 = state.knee_radps;

  const double m11 = c.a + c.b + 2.0 * c.d * co2 + model.hip_reflected_inertia_kgm2;
  const double m12 = c.b + c.d * co2;
  const double m22 = c.b + model.knee_reflected_inertia_kgm2;

  const double cor1 = -c.d * s2 * (2.0 * w1 * w2 + w2 * w2);
  const double cor2 = c.d * s2 * w1 * w1;
  const double g = model.gravity_mps2;
  const double grav1 = -g * (c.ga * s1 + c.gb * s12);
  const double grav2 = -g * c.gb * s12;

  const double rhs1 = torques.hip_Nm - cor1 - grav1;
  const double rhs2 = torques.knee_Nm - cor2 - grav2;
  // 2x2 SPD solve; det = m11 m22 - m12^2 > 0 for positive link masses.
  const double det = m11 * m22 - m12 * m12;
  StanceDerivs d;
  d.hip_acc_radps2 = (m22 * rhs1 - m12 * rhs2) / det;
  d.knee_acc_radps2 = (m11 * rhs2 - m12 * rhs1) / det;

  // Ground reaction from the momentum balance of the whole chain.
  const double a1 = d.hip_acc_radps2, a12 = a1 + d.knee_acc_radps2;
  const double w12 = w1 + w2;
  const double px_dd = -c.ga * (c1 * a1 - s1 * w1 * w1) -
                       c.gb * (c12 * a12 - s12 * w12 * w12);
  const double pz_dd = -c.ga * (s1 * a1 + c1 * w1 * w1) -
                       c.gb * (s12 * a12 + c12 * w12 * w12);
  d.ground_fx_N = px_dd;
  d.ground_fz_N = pz_dd + model.total_mass_kg() * g;
  return d;
}

LegState stance_step(const RobotModel& model, const LegState& state,
                     const JointTorques& torques, double dt_s) {
  const StanceDerivs d = stance_dynamics(model, state, torques);
  LegState next;
  next.hip_radps = state.hip_radps + d.hip_acc_radps2 * dt_s;
  next.knee_radps = state.knee_radps + d.knee_acc_radps2 * dt_s;
  next.hip_rad = state.hip_rad + next.hip_radps * dt_s;
  next.knee_rad = state.knee_rad + next.knee_radps * dt_s;
  return next;
}

double positive_actuator_work_J(const std::vector<double>& hip_torque_Nm,
                                const std::vector<double>& hip_radps,
                                const std::vector<double>& knee_torque_Nm,
                                const std::vector<double>& knee_radps, double dt_s) {
  const std::size_t n = hip_torque_Nm.size();
  if (hip_radps.size() != n || knee_torque_Nm.size() != n || knee_radps.size() != n)
    throw std::invalid_argument("positive_actuator_work_J: series lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += std::max(hip_torque_Nm[i] * hip_radps[i], 0.0);
    sum += std::max(knee_torque_Nm[i] * knee_radps[i], 0.0);
  }
  return sum * dt_s;
}

namespace {

TraceRow stance_trace_row(double t, const LegGeometry& geom, const LegState& s,
                          const JointTorques& tau, const StanceDerivs& d) {
  TraceRow row;
  row.t_s = t;
  row.base_z_m = -geom.foot_z_m;
  row.hip_rad = s.hip_rad;
  row.knee_rad = s.knee_rad;
  row.hip_radps = s.hip_radps;
  row.knee_radps = s.knee_radps;
  row.hip_torque_Nm = tau.hip_Nm;
  row.knee_torque_Nm = tau.knee_Nm;
  row.leg_length_m = geom.length_m;
  row.leg_angle_rad = geom.angle_rad;
  row.ground_fx_N = d.ground_fx_N;
  row.ground_fz_N = d.ground_fz_N;
  row.phase = 0;
  return row;
}

TraceRow flight_trace_row(double t, double base_z, const LegState& frozen,
                          const LegGeometry& geom) {
  TraceRow row;
  row.t_s = t;
  row.base_z_m = base_z;
  row.hip_rad = frozen.hip_rad;
  row.knee_rad = frozen.knee_rad;
  row.leg_length_m = geom.length_m;
  row.leg_angle_rad = geom.angle_rad;
  row.phase = 1;
  return row;
}

}  // namespace

JumpResult rollout(const RobotModel& model, const ControllerParams& controller,
                   const SimConfig& sim) {
  model.validate();
  controller.validate();
  sim.validate();

  JumpResult result;
  LegState s;
  try {
    s = leg_ik(model, sim.start_leg_length_m);
  } catch (const std::domain_error&) {
    result.reason = TerminationReason::Singularity;
    return result;
  }

  std::vector<double> tau_h, w_h, tau_k, w_k;
  const int max_steps =
      static_cast<int>(std::llround(sim.max_sim_time_s / sim.dt_s));
  tau_h.reserve(max_steps);
  w_h.reserve(max_steps);
  tau_k.reserve(max_steps);
  w_k.reserve(max_steps);

  double t = 0.0;
  double max_base_z = 0.0;
  bool lifted = false;
  LegGeometry geom_lo;

  for (int step = 0; step < max_steps; ++step) {
    const LegGeometry geom = leg_geometry(model, s.hip_rad, s.knee_rad);
    double length_rate = 0.0;
    leg_polar_rates(geom, s.hip_radps, s.knee_radps, &length_rate, nullptr);
    const JointTorques tau =
        clamp_torques(joint_torques(geom, vmc_wrench(model, controller, geom,
                                                     length_rate)),
                      model);
    const StanceDerivs d = stance_dynamics(model, s, tau);

    if (!finite(s) || !std::isfinite(d.hip_acc_radps2) ||
        !std::isfinite(d.knee_acc_radps2) || !std::isfinite(d.ground_fz_N)) {
      result.reason = TerminationReason::NumericalFailure;
      result.jump_height_m = max_base_z;
      result.positive_work_J = positive_actuator_work_J(tau_h, w_h, tau_k, w_k, sim.dt_s);
      return result;
    }

    if (!on_knee_branch(s)) {
      result.reason = TerminationReason::Singularity;
      result.jump_height_m = max_base_z;
      result.positive_work_J = positive_actuator_work_J(tau_h, w_h, tau_k, w_k, sim.dt_s);
      return result;
    }

    max_base_z = std::max(max_base_z, -geom.foot_z_m);

    // The pin can only push; a tensile demand means the foot has left.
    if (d.ground_fz_N <= 0.0) {
      lifted = true;
      geom_lo = geom;
      break;
    }

    if (sim.record_trace) result.trace.push_back(stance_trace_row(t, geom, s, tau, d));
    tau_h.push_back(tau.hip_Nm);
    w_h.push_back(s.hip_radps);
    tau_k.push_back(tau.knee_Nm);
    w_k.push_back(s.knee_radps);

    s = stance_step(model, s, tau, sim.dt_s);
    t += sim.dt_s;
    ++result.stance_steps;
  }

  result.positive_work_J = positive_actuator_work_J(tau_h, w_h, tau_k, w_k, sim.dt_s);

  if (!lifted) {
    result.reason = TerminationReason::NoLiftoff;
    result.jump_height_m = max_base_z;
    return result;
  }

  const double g = model.gravity_mps2;
  const double z_lo = -geom_lo.foot_z_m;
  const double v_lo =
      -(geom_lo.j21 * s.hip_radps + geom_lo.j22 * s.knee_radps);
  result.liftoff_time_s = t;
  result.liftoff_speed_mps = v_lo;

  // Ballistic flight of the frozen configuration, closed form.
  double window = 0.0;  // flight time to simulate
  if (v_lo > 0.0) window = sim.stop_at_apex ? v_lo / g : 2.0 * v_lo / g;
  bool truncated = false;
  if (t + window > sim.max_sim_time_s) {
    window = sim.max_sim_time_s - t;
    truncated = true;
  }
  const auto base_z_at = [&](double dt) { return z_lo + v_lo * dt - 0.5 * g * dt * dt; };
  const double apex_dt = v_lo > 0.0 ? v_lo / g : 0.0;
  const double peak = apex_dt <= window ? base_z_at(apex_dt) : base_z_at(window);
  result.jump_height_m = std::max(max_base_z, peak);
  result.reason = truncated ? TerminationReason::MaxSimTime : TerminationReason::Landed;

  if (sim.record_trace) {
    const LegState frozen = s;
    double dt = 0.0;
    while (dt < window) {
      result.trace.push_back(flight_trace_row(t + dt, base_z_at(dt), frozen, geom_lo));
      dt += sim.dt_s;
    }
    result.trace.push_back(flight_trace_row(t + window, base_z_at(window), frozen, geom_lo));
  }
  return result;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string out =
      "t_s,base_z_m,hip_rad,knee_rad,hip_radps,knee_radps,hip_torque_Nm,"
      "knee_torque_Nm,leg_length_m,leg_angle_rad,ground_fx_N,ground_fz_N,phase\n";
  char row[512];
  for (const TraceRow& r : trace) {
    std::snprintf(row, sizeof row,
                  "%.6f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%d\n",
                  r.t_s, r.base_z_m, r.hip_rad, r.knee_rad, r.hip_radps, r.knee_radps,
                  r.hip_torque_Nm, r.knee_torque_Nm, r.leg_length_m, r.leg_angle_rad,
                  r.ground_fx_N, r.ground_fz_N, r.phase);
    out += row;
  }
  return out;
}

}  // namespace monoped
