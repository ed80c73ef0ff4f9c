#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace monoped {

// Where the single-stage planetary sits relative to the motor: inside the
// stator bore (ISSPG) or wrapped around the outside of the motor (ESSPG).
enum class GearboxKind { ISSPG, ESSPG };

const char* to_string(GearboxKind kind);
GearboxKind gearbox_kind_from_string(std::string_view name);

struct GearTrain {
  int sun_teeth = 0;
  int planet_teeth = 0;
  int ring_teeth = 0;
  double module_mm = 0.0;
  int planet_count = 0;
};

struct MotorSpec {
  std::string name;
  double mass_kg = 0.0;
  double outer_diameter_mm = 0.0;
  double stator_inner_diameter_mm = 0.0;
  double axial_length_mm = 0.0;
  double peak_torque_Nm = 0.0;
  double rotor_inertia_kgm2 = 0.0;  // 0 disables reflected-inertia terms

  void validate() const;  // throws std::invalid_argument on bad fields
};

// Half-open ratio interval [lo, hi) with exact membership tests. Bounds are
// snapped to 1e-6 resolution so decimal grid edges compare exactly against
// the rational gear ratio; closed_hi turns the interval into [lo, hi].
struct RatioWindow {
  std::int64_t lo_micro = 0;
  std::int64_t hi_micro = 0;
  bool closed_hi = false;

  static RatioWindow from_bounds(double lo, double hi, bool closed_hi = false);

  bool contains(std::int64_t num, std::int64_t den) const;
  bool contains_ratio(double ratio) const;
  double lo() const { return static_cast<double>(lo_micro) * 1e-6; }
  double hi() const { return static_cast<double>(hi_micro) * 1e-6; }
};

struct GearboxBounds {
  double ratio_min = 4.0;
  double ratio_max = 15.0;
  bool ratio_max_inclusive = false;
  std::vector<double> module_set_mm = {0.5, 0.6, 0.8, 1.0, 1.2};
  double module_min_mm = 0.5;
  double module_max_mm = 1.2;
  int min_teeth = 18;                  // undercutting limit on sun and planets
  double planet_clearance_mm = 5.0;    // required tip gap between neighbors
  double housing_clearance_mm = 10.0;  // ring pitch dia margin to the housing
  int planet_count_min = 2;
  int planet_count_max = 7;

  void validate() const;

  RatioWindow ratio_window() const {
    return RatioWindow::from_bounds(ratio_min, ratio_max, ratio_max_inclusive);
  }
};

struct ConstraintReport {
  bool ratio_ok = false;
  bool geometry_ok = false;
  bool meshing_ok = false;
  bool interference_ok = false;
  bool bounds_ok = false;

  double ratio = 0.0;
  int geometry_residual = 0;       // ring - sun - 2*planet
  int meshing_remainder = 0;       // (sun + ring) mod planet_count
  double clearance_mm = 0.0;       // neighbor clearance actually available
  double ring_pitch_mm = 0.0;
  double ring_pitch_limit_mm = 0.0;

  bool feasible() const {
    return ratio_ok && geometry_ok && meshing_ok && interference_ok && bounds_ok;
  }
  // Name of the first violated constraint, or nullptr when feasible.
  const char* first_failure() const;
};

double gear_ratio(const GearTrain& train);

// Exact (sun+ring)/sun as an unreduced integer pair.
std::pair<std::int64_t, std::int64_t> gear_ratio_rational(const GearTrain& train);

// Largest ring pitch diameter the housing allows for this mounting.
double max_ring_pitch_mm(GearboxKind kind, const MotorSpec& motor,
                         const GearboxBounds& bounds);

bool check_geometry(const GearTrain& train, int* residual = nullptr);
bool check_meshing(const GearTrain& train, int* remainder = nullptr);

double interference_clearance_mm(const GearTrain& train);
bool check_interference(const GearTrain& train, const GearboxBounds& bounds);

bool check_bounds(const GearTrain& train, GearboxKind kind, const MotorSpec& motor,
                  const GearboxBounds& bounds);

ConstraintReport validate(const GearTrain& train, GearboxKind kind,
                          const MotorSpec& motor, const GearboxBounds& bounds);

}  // namespace monoped
