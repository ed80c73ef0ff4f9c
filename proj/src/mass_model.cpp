#include "monoped/mass_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace monoped {

namespace {

constexpr double kMm = 1e-3;

// Solid cylinder, dimensions in mm, density in kg/m^3.
double cylinder_kg(double dia_mm, double height_mm, double rho) {
  const double d = dia_mm * kMm;
  return rho * std::numbers::pi / 4.0 * d * d * (height_mm * kMm);
}

bool structurally_feasible(const GearTrain& train, GearboxKind kind,
                           const MotorSpec& motor, const GearboxBounds& bounds) {
  return check_geometry(train) && check_meshing(train) &&
         check_interference(train, bounds) &&
         check_bounds(train, kind, motor, bounds);
}

}  // namespace

void MaterialTable::validate() const {
  if (aluminum_kg_per_m3 <= 0.0 || steel_kg_per_m3 <= 0.0 || plastic_kg_per_m3 <= 0.0)
    throw std::invalid_argument("material densities must be > 0");
  if (bearing_mass_coeff <= 0.0)
    throw std::invalid_argument("bearing_mass_coeff must be > 0");
  if (bearing_mass_exponent <= 0.0)
    throw std::invalid_argument("bearing_mass_exponent must be > 0");
  if (bearing_catalog.size() < 2)
    throw std::invalid_argument("bearing_catalog needs at least two rows");
  for (const auto& row : bearing_catalog)
    if (row[0] <= 0.0 || row[1] <= 0.0)
      throw std::invalid_argument("bearing_catalog rows must be positive");
}

void ActuatorGeometry::validate() const {
  const double fields[] = {face_width_per_module, casing_wall_mm,
                           casing_end_clearance_mm, backplate_thickness_mm,
                           carrier_thickness_mm,   carrier_rim_mm,
                           carrier_bore_mm,        coupling_diameter_mm,
                           coupling_length_mm,     sun_bore_scale,
                           sun_bore_min_mm,        output_bore_scale,
                           output_bore_min_mm};
  for (double f : fields)
    if (f <= 0.0)
      throw std::invalid_argument("actuator geometry fields must be > 0");
}

void LinkMassParams::validate() const {
  if (plate_thickness_mm <= 0.0 || plate_width_mm <= 0.0 || core_thickness_mm <= 0.0)
    throw std::invalid_argument("link plate dimensions must be > 0");
  if (chain_kg_per_m < 0.0 || fixed_hardware_kg < 0.0)
    throw std::invalid_argument("link chain/hardware masses must be >= 0");
}

double bearing_mass_kg(double bore_mm, const MaterialTable& materials) {
  if (!(bore_mm > 0.0))
    throw std::invalid_argument("bearing bore must be > 0");
  return materials.bearing_mass_coeff *
         std::pow(bore_mm, materials.bearing_mass_exponent);
}

ActuatorDims derive_actuator_dims(const GearTrain& train, GearboxKind kind,
                                  const MotorSpec& motor,
                                  const ActuatorGeometry& geometry) {
  ActuatorDims dims;
  const double m = train.module_mm;
  dims.sun_pitch_mm = m * train.sun_teeth;
  dims.planet_pitch_mm = m * train.planet_teeth;
  dims.ring_pitch_mm = m * train.ring_teeth;
  dims.face_width_mm = geometry.face_width_per_module * m;

  const double planet_center_span_mm = m * (train.sun_teeth + train.planet_teeth);
  dims.carrier_outer_mm = planet_center_span_mm + 2.0 * geometry.carrier_rim_mm;
  dims.carrier_bore_mm = geometry.carrier_bore_mm;
  dims.carrier_thickness_mm = geometry.carrier_thickness_mm;

  // ESSPG wraps the motor, ISSPG tucks into the stator bore.
  dims.casing_diameter_mm = kind == GearboxKind::ESSPG
                                ? motor.outer_diameter_mm
                                : motor.stator_inner_diameter_mm;
  dims.casing_length_mm = dims.face_width_mm + 2.0 * geometry.casing_end_clearance_mm;
  dims.casing_wall_mm = geometry.casing_wall_mm;
  dims.backplate_thickness_mm = geometry.backplate_thickness_mm;

  dims.sun_bearing_bore_mm =
      std::max(geometry.sun_bore_min_mm, geometry.sun_bore_scale * dims.sun_pitch_mm);
  dims.output_bearing_bore_mm =
      std::max(geometry.output_bore_min_mm,
               geometry.output_bore_scale * planet_center_span_mm);
  return dims;
}

MassBreakdown actuator_mass(const GearTrain& train, GearboxKind kind,
                            const MotorSpec& motor, const MaterialTable& materials,
                            const ActuatorGeometry& geometry,
                            const GearboxBounds& bounds) {
  if (!structurally_feasible(train, kind, motor, bounds))
    throw std::invalid_argument("infeasible gear train");

  const ActuatorDims dims = derive_actuator_dims(train, kind, motor, geometry);
  const double rho_al = materials.aluminum_kg_per_m3;
  const double rho_st = materials.steel_kg_per_m3;

  MassBreakdown b;
  b.motor_kg = motor.mass_kg;
  b.sun_gear_kg = cylinder_kg(dims.sun_pitch_mm, dims.face_width_mm, rho_st);
  b.planet_gears_kg =
      train.planet_count * cylinder_kg(dims.planet_pitch_mm, dims.face_width_mm, rho_st);
  b.ring_gear_kg = cylinder_kg(dims.ring_pitch_mm, dims.face_width_mm, rho_st);
  b.carrier_kg = cylinder_kg(dims.carrier_outer_mm, dims.carrier_thickness_mm, rho_al) -
                 cylinder_kg(dims.carrier_bore_mm, dims.carrier_thickness_mm, rho_al);
  b.casing_kg = rho_al * std::numbers::pi * (dims.casing_diameter_mm * kMm) *
                (dims.casing_length_mm * kMm) * (dims.casing_wall_mm * kMm);
  b.backplate_kg =
      cylinder_kg(dims.casing_diameter_mm, dims.backplate_thickness_mm, rho_al);
  b.coupling_kg =
      cylinder_kg(geometry.coupling_diameter_mm, geometry.coupling_length_mm, rho_al);
  b.bearings_kg = bearing_mass_kg(dims.sun_bearing_bore_mm, materials) +
                  bearing_mass_kg(dims.output_bearing_bore_mm, materials);
  b.total_kg = b.motor_kg + b.sun_gear_kg + b.planet_gears_kg + b.ring_gear_kg +
               b.carrier_kg + b.casing_kg + b.backplate_kg + b.coupling_kg +
               b.bearings_kg;
  return b;
}

ActuatorDesign make_actuator(const GearTrain& train, GearboxKind kind,
                             const MotorSpec& motor, const MaterialTable& materials,
                             const ActuatorGeometry& geometry,
                             const GearboxBounds& bounds) {
  const MassBreakdown breakdown =
      actuator_mass(train, kind, motor, materials, geometry, bounds);
  ActuatorDesign design;
  design.train = train;
  design.kind = kind;
  design.motor = motor;
  design.mass_kg = breakdown.total_kg;
  design.ratio = gear_ratio(train);
  design.peak_torque_Nm = design.ratio * motor.peak_torque_Nm;
  return design;
}

double link_mass_kg(double length_m, const LinkMassParams& params,
                    const MaterialTable& materials) {
  if (!(length_m >= 0.05 && length_m <= 1.0))
    throw std::invalid_argument("link length outside [0.05, 1.0] m");
  const double w = params.plate_width_mm * kMm;
  const double plates = 2.0 * (length_m * w * params.plate_thickness_mm * kMm) *
                        materials.aluminum_kg_per_m3;
  const double core = (length_m * w * params.core_thickness_mm * kMm) *
                      materials.plastic_kg_per_m3;
  return plates + core + params.chain_kg_per_m * length_m + params.fixed_hardware_kg;
}

}  // namespace monoped
