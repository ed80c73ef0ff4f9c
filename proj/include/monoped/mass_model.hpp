#pragma once

#include <array>
#include <vector>

#include "monoped/gearbox.hpp"

namespace monoped {

struct MaterialTable {
  double aluminum_kg_per_m3 = 2700.0;
  double steel_kg_per_m3 = 7850.0;
  double plastic_kg_per_m3 = 1240.0;

  // Bearing mass regression mass = a * bore^b (bore in mm, mass in kg),
  // least-squares in log-log space over bearing_catalog below.
  double bearing_mass_coeff = 1.0961643348909505e-4;
  double bearing_mass_exponent = 1.5850678454986586;
  // (bore_mm, mass_kg) rows the regression was fit from; kept in the config
  // so the fit can be audited or redone against a different series.
  std::vector<std::array<double, 2>> bearing_catalog = {
      {10.0, 0.0050}, {12.0, 0.0055}, {15.0, 0.0060}, {17.0, 0.0070},
      {20.0, 0.0180}, {25.0, 0.0220}, {30.0, 0.0260}, {35.0, 0.0300},
      {40.0, 0.0340}, {50.0, 0.0530}};

  void validate() const;
};

// Proportions for the structural parts wrapped around a gear train. All the
// formulas that consume these live in actuator_mass / derive_actuator_dims.
struct ActuatorGeometry {
  double face_width_per_module = 10.0;   // gear face width = this * module
  double casing_wall_mm = 3.0;
  double casing_end_clearance_mm = 5.0;  // per end, adds to the face width
  double backplate_thickness_mm = 4.0;
  double carrier_thickness_mm = 4.0;
  double carrier_rim_mm = 5.0;           // radial margin beyond planet centers
  double carrier_bore_mm = 15.0;
  double coupling_diameter_mm = 20.0;
  double coupling_length_mm = 15.0;
  double sun_bore_scale = 0.6;           // sun bearing bore vs sun pitch dia
  double sun_bore_min_mm = 6.0;
  double output_bore_scale = 0.5;        // output bearing bore vs carrier span
  double output_bore_min_mm = 10.0;

  void validate() const;
};

struct LinkMassParams {
  double plate_thickness_mm = 2.0;  // two aluminum side plates
  double plate_width_mm = 40.0;
  double core_thickness_mm = 10.0;  // printed spacer core
  double chain_kg_per_m = 0.2;
  double fixed_hardware_kg = 0.1;   // sprockets, fasteners, joint hardware

  void validate() const;
};

struct MassBreakdown {
  double motor_kg = 0.0;
  double sun_gear_kg = 0.0;
  double planet_gears_kg = 0.0;  // all planets combined
  double ring_gear_kg = 0.0;
  double carrier_kg = 0.0;
  double casing_kg = 0.0;
  double backplate_kg = 0.0;
  double coupling_kg = 0.0;
  double bearings_kg = 0.0;
  double total_kg = 0.0;  // always the sum of the components above
};

// Physical dimensions derived from a train; single source of truth shared by
// the mass model and the design manifest exporter.
struct ActuatorDims {
  double sun_pitch_mm = 0.0;
  double planet_pitch_mm = 0.0;
  double ring_pitch_mm = 0.0;
  double face_width_mm = 0.0;
  double carrier_outer_mm = 0.0;
  double carrier_bore_mm = 0.0;
  double carrier_thickness_mm = 0.0;
  double casing_diameter_mm = 0.0;
  double casing_length_mm = 0.0;
  double casing_wall_mm = 0.0;
  double backplate_thickness_mm = 0.0;
  double sun_bearing_bore_mm = 0.0;
  double output_bearing_bore_mm = 0.0;
};

struct ActuatorDesign {
  GearTrain train;
  GearboxKind kind = GearboxKind::ISSPG;
  MotorSpec motor;
  double mass_kg = 0.0;
  double peak_torque_Nm = 0.0;  // ratio * motor peak torque
  double ratio = 0.0;           // == gear_ratio(train)
};

double bearing_mass_kg(double bore_mm, const MaterialTable& materials);

ActuatorDims derive_actuator_dims(const GearTrain& train, GearboxKind kind,
                                  const MotorSpec& motor,
                                  const ActuatorGeometry& geometry);

// Throws std::invalid_argument("infeasible gear train") when the train fails
// the structural constraints (geometry, meshing, interference, bounds).
MassBreakdown actuator_mass(const GearTrain& train, GearboxKind kind,
                            const MotorSpec& motor, const MaterialTable& materials,
                            const ActuatorGeometry& geometry,
                            const GearboxBounds& bounds);

ActuatorDesign make_actuator(const GearTrain& train, GearboxKind kind,
                             const MotorSpec& motor, const MaterialTable& materials,
                             const ActuatorGeometry& geometry,
                             const GearboxBounds& bounds);

// Sandwich link: two aluminum plates over a printed core plus chain run and
// fixed hardware. Affine in length; length must lie in [0.05, 1.0] m.
double link_mass_kg(double length_m, const LinkMassParams& params,
                    const MaterialTable& materials);

}  // namespace monoped
