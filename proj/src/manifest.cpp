#include "monoped/manifest.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace monoped {

namespace {

using json = nlohmann::ordered_json;

std::string hash_hex(std::uint64_t hash) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016" PRIx64, hash);
  return buf;
}

bool close12(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

json motor_block(const MotorSpec& motor) {
  return {{"name", motor.name},
          {"mass_kg", motor.mass_kg},
          {"outer_diameter_mm", motor.outer_diameter_mm},
          {"stator_inner_diameter_mm", motor.stator_inner_diameter_mm},
          {"axial_length_mm", motor.axial_length_mm},
          {"peak_torque_Nm", motor.peak_torque_Nm},
          {"rotor_inertia_kgm2", motor.rotor_inertia_kgm2}};
}

// Rebuilds the actuator block from the gear train alone, checking the stored
// design against the recomputation as it goes. Mismatches collect into `bad`
// so the caller can report all of them at once.
json actuator_block(const char* prefix, const ActuatorDesign& a,
                    const Stage1Config& stage1, std::vector<std::string>& bad) {
  const auto field = [&](const char* name) {
    return std::string("actuators.") + prefix + "." + name;
  };

  if (a.motor.name != stage1.motor.name || a.motor.mass_kg != stage1.motor.mass_kg ||
      a.motor.outer_diameter_mm != stage1.motor.outer_diameter_mm ||
      a.motor.stator_inner_diameter_mm != stage1.motor.stator_inner_diameter_mm ||
      a.motor.axial_length_mm != stage1.motor.axial_length_mm ||
      a.motor.peak_torque_Nm != stage1.motor.peak_torque_Nm ||
      a.motor.rotor_inertia_kgm2 != stage1.motor.rotor_inertia_kgm2)
    bad.push_back(field("motor"));

  MassBreakdown mb{};
  bool feasible = true;
  try {
    mb = actuator_mass(a.train, a.kind, stage1.motor, stage1.materials, stage1.geometry,
                       stage1.bounds);
  } catch (const std::invalid_argument&) {
    feasible = false;
    bad.push_back(field("gears"));
  }
  const ActuatorDims dims =
      derive_actuator_dims(a.train, a.kind, stage1.motor, stage1.geometry);
  const double ratio = gear_ratio(a.train);

  if (a.ratio != ratio) bad.push_back(field("gear_ratio"));
  if (feasible && a.mass_kg != mb.total_kg) bad.push_back(field("mass_kg"));
  if (a.peak_torque_Nm != ratio * stage1.motor.peak_torque_Nm)
    bad.push_back(field("peak_torque_Nm"));

  json out;
  out["mounting"] = to_string(a.kind);
  out["gear_ratio"] = ratio;
  out["mass_kg"] = mb.total_kg;
  out["peak_torque_Nm"] = ratio * stage1.motor.peak_torque_Nm;
  out["gears"] = {{"sun_teeth", a.train.sun_teeth},
                  {"planet_teeth", a.train.planet_teeth},
                  {"ring_teeth", a.train.ring_teeth},
                  {"module_mm", a.train.module_mm},
                  {"planet_count", a.train.planet_count}};
  out["pitch_diameters"] = {{"sun_mm", dims.sun_pitch_mm},
                            {"planet_mm", dims.planet_pitch_mm},
                            {"ring_mm", dims.ring_pitch_mm}};
  out["dimensions"] = {{"face_width_mm", dims.face_width_mm},
                       {"carrier_outer_mm", dims.carrier_outer_mm},
                       {"carrier_bore_mm", dims.carrier_bore_mm},
                       {"carrier_thickness_mm", dims.carrier_thickness_mm},
                       {"casing_diameter_mm", dims.casing_diameter_mm},
                       {"casing_length_mm", dims.casing_length_mm},
                       {"casing_wall_mm", dims.casing_wall_mm},
                       {"backplate_thickness_mm", dims.backplate_thickness_mm},
                       {"sun_bearing_bore_mm", dims.sun_bearing_bore_mm},
                       {"output_bearing_bore_mm", dims.output_bearing_bore_mm}};
  out["masses"] = {{"motor_kg", mb.motor_kg},
                   {"sun_gear_kg", mb.sun_gear_kg},
                   {"planet_gears_kg", mb.planet_gears_kg},
                   {"ring_gear_kg", mb.ring_gear_kg},
                   {"carrier_kg", mb.carrier_kg},
                   {"casing_kg", mb.casing_kg},
                   {"backplate_kg", mb.backplate_kg},
                   {"coupling_kg", mb.coupling_kg},
                   {"bearings_kg", mb.bearings_kg},
                   {"total_kg", mb.total_kg}};
  out["motor"] = motor_block(stage1.motor);
  return out;
}

// --- validation ------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("manifest: " + path + " " + what);
}

const json& need(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "is not an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "is missing");
  return *it;
}

double num(const json& obj, const std::string& path, const char* key) {
  const json& v = need(obj, path, key);
  if (!v.is_number()) fail(path + "." + key, "is not a number");
  return v.get<double>();
}

std::string str(const json& obj, const std::string& path, const char* key) {
  const json& v = need(obj, path, key);
  if (!v.is_string()) fail(path + "." + key, "is not a string");
  return v.get<std::string>();
}

// Numeric keys carry their unit in the suffix; counts and ratios are the only
// dimensionless numbers allowed.
bool unit_suffixed(const std::string& key) {
  static const char* suffixes[] = {"_m",   "_mm",       "_kg",     "_Nm",
                                   "_N_per_m", "_Ns_per_m", "_Nm_per_rad", "_rad",
                                   "_mps2", "_kgm2",    "_kg_per_m", "_teeth",
                                   "_count", "_ratio"};
  for (const char* s : suffixes)
    if (key.size() > std::strlen(s) && key.ends_with(s)) return true;
  return key == "gear_ratio";
}

void check_units(const json& node, const std::string& path) {
  if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i)
      check_units(node[i], path + "[" + std::to_string(i) + "]");
    return;
  }
  if (!node.is_object()) return;
  for (const auto& [key, value] : node.items()) {
    const std::string child = path.empty() ? key : path + "." + key;
    if (value.is_number() && !unit_suffixed(key))
      fail(child, "is numeric but its name carries no unit suffix");
    check_units(value, child);
  }
}

void check_actuator(const json& a, const std::string& path) {
  const std::string mounting = str(a, path, "mounting");
  if (mounting != "ISSPG" && mounting != "ESSPG")
    fail(path + ".mounting", "must be ISSPG or ESSPG");

  const json& gears = need(a, path, "gears");
  const std::string gpath = path + ".gears";
  const double sun = num(gears, gpath, "sun_teeth");
  const double planet = num(gears, gpath, "planet_teeth");
  const double ring = num(gears, gpath, "ring_teeth");
  const double module = num(gears, gpath, "module_mm");
  const double count = num(gears, gpath, "planet_count");
  for (const auto& [k, v] : std::initializer_list<std::pair<const char*, double>>{
           {"sun_teeth", sun}, {"planet_teeth", planet}, {"ring_teeth", ring}})
    if (v < 1.0 || v != std::floor(v)) fail(gpath + "." + k, "must be a positive integer");
  if (!(module > 0.0)) fail(gpath + ".module_mm", "must be > 0");
  if (count < 1.0 || count != std::floor(count))
    fail(gpath + ".planet_count", "must be a positive integer");

  const double ratio = num(a, path, "gear_ratio");
  if (!close12(ratio, (sun + ring) / sun))
    fail(path + ".gear_ratio", "disagrees with (sun_teeth + ring_teeth) / sun_teeth");

  const json& pitch = need(a, path, "pitch_diameters");
  const std::string ppath = path + ".pitch_diameters";
  if (!close12(num(pitch, ppath, "sun_mm"), module * sun))
    fail(ppath + ".sun_mm", "disagrees with module_mm * sun_teeth");
  if (!close12(num(pitch, ppath, "planet_mm"), module * planet))
    fail(ppath + ".planet_mm", "disagrees with module_mm * planet_teeth");
  if (!close12(num(pitch, ppath, "ring_mm"), module * ring))
    fail(ppath + ".ring_mm", "disagrees with module_mm * ring_teeth");

  const json& masses = need(a, path, "masses");
  const std::string mpath = path + ".masses";
  double sum = 0.0;
  for (const char* part : {"motor_kg", "sun_gear_kg", "planet_gears_kg", "ring_gear_kg",
                           "carrier_kg", "casing_kg", "backplate_kg", "coupling_kg",
                           "bearings_kg"})
    sum += num(masses, mpath, part);
  const double total = num(masses, mpath, "total_kg");
  if (!close12(sum, total)) fail(mpath + ".total_kg", "is not the sum of its components");
  if (!close12(num(a, path, "mass_kg"), total))
    fail(path + ".mass_kg", "disagrees with masses.total_kg");

  const json& motor = need(a, path, "motor");
  const double motor_peak = num(motor, path + ".motor", "peak_torque_Nm");
  if (!close12(num(a, path, "peak_torque_Nm"), ratio * motor_peak))
    fail(path + ".peak_torque_Nm", "disagrees with gear_ratio * motor peak torque");

  need(a, path, "dimensions");
}

}  // namespace

DesignManifest build_manifest(const DecodedDesign& design, const Stage1Config& stage1,
                              const DecodeConfig& decode, const ManifestMeta& meta) {
  std::vector<std::string> bad;

  json hip = actuator_block("hip", design.hip, stage1, bad);
  json knee = actuator_block("knee", design.knee, stage1, bad);

  const RobotModel& m = design.model;
  const ControllerParams& c = design.controller;
  const double thigh_mass = link_mass_kg(m.thigh_length_m, decode.link, decode.materials);
  const double shank_mass = link_mass_kg(m.shank_length_m, decode.link, decode.materials);
  if (m.thigh_mass_kg != thigh_mass) bad.push_back("legs.thigh.mass_kg");
  if (m.shank_mass_kg != shank_mass) bad.push_back("legs.shank.mass_kg");
  if (m.base_mass_kg != decode.base_mass_kg + design.hip.mass_kg + design.knee.mass_kg)
    bad.push_back("body.base_mass_kg");
  if (m.gravity_mps2 != decode.gravity_mps2) bad.push_back("body.gravity_mps2");
  if (m.hip_peak_torque_Nm != design.hip.peak_torque_Nm)
    bad.push_back("actuators.hip.peak_torque_Nm");
  if (m.knee_peak_torque_Nm != design.knee.peak_torque_Nm)
    bad.push_back("actuators.knee.peak_torque_Nm");
  if (c.rest_length_m != decode.rest_length_scale * (m.thigh_length_m + m.shank_length_m))
    bad.push_back("controller.rest_length_m");
  if (c.rest_angle_rad != decode.rest_angle_rad) bad.push_back("controller.rest_angle_rad");

  if (!bad.empty()) {
    std::string what = "manifest inputs inconsistent:";
    for (const std::string& f : bad) what += " " + f;
    throw std::invalid_argument(what);
  }

  DesignManifest out;
  out["schema"] = kManifestSchema;
  out["provenance"] = {{"tool_version", meta.tool_version},
                       {"config_hash", hash_hex(meta.config_hash)},
                       {"seed", std::to_string(meta.seed)},
                       {"study_case", meta.study_case}};
  out["body"] = {{"base_mass_kg", m.base_mass_kg},
                 {"chassis_mass_kg", decode.base_mass_kg},
                 {"total_mass_kg", m.total_mass_kg()},
                 {"gravity_mps2", m.gravity_mps2}};
  out["legs"] = {{"thigh", {{"length_m", m.thigh_length_m}, {"mass_kg", m.thigh_mass_kg}}},
                 {"shank", {{"length_m", m.shank_length_m}, {"mass_kg", m.shank_mass_kg}}}};
  out["controller"] = {{"spring_stiffness_N_per_m", c.spring_stiffness_N_per_m},
                       {"spring_damping_Ns_per_m", c.spring_damping_Ns_per_m},
                       {"torsion_stiffness_Nm_per_rad", c.torsion_stiffness_Nm_per_rad},
                       {"rest_length_m", c.rest_length_m},
                       {"rest_angle_rad", c.rest_angle_rad}};
  out["actuators"] = {{"hip", std::move(hip)}, {"knee", std::move(knee)}};
  return out;
}

void validate_manifest(const DesignManifest& manifest) {
  const std::string root;
  if (!manifest.is_object()) fail("manifest", "is not an object");
  const auto it = manifest.find("schema");
  if (it == manifest.end() || !it->is_string() || it->get<std::string>() != kManifestSchema)
    fail("schema", std::string("must be \"") + kManifestSchema + "\"");

  const json& prov = need(manifest, "", "provenance");
  str(prov, "provenance", "tool_version");
  const std::string hash = str(prov, "provenance", "config_hash");
  if (hash.size() != 18 || hash.compare(0, 2, "0x") != 0 ||
      hash.find_first_not_of("0123456789abcdef", 2) != std::string::npos)
    fail("provenance.config_hash", "must be 0x followed by 16 lowercase hex digits");
  const std::string seed = str(prov, "provenance", "seed");
  if (seed.empty() || seed.find_first_not_of("0123456789") != std::string::npos)
    fail("provenance.seed", "must be a decimal string");
  str(prov, "provenance", "study_case");

  const json& body = need(manifest, "", "body");
  const double base = num(body, "body", "base_mass_kg");
  num(body, "body", "gravity_mps2");

  const json& legs = need(manifest, "", "legs");
  const json& thigh = need(legs, "legs", "thigh");
  const json& shank = need(legs, "legs", "shank");
  for (const auto& [name, leg] : {std::pair<const char*, const json*>{"thigh", &thigh},
                                  {"shank", &shank}}) {
    const std::string path = std::string("legs.") + name;
    if (!(num(*leg, path, "length_m") > 0.0)) fail(path + ".length_m", "must be > 0");
    if (!(num(*leg, path, "mass_kg") > 0.0)) fail(path + ".mass_kg", "must be > 0");
  }
  const double total = num(body, "body", "total_mass_kg");
  if (!close12(total, base + thigh["mass_kg"].get<double>() +
                          shank["mass_kg"].get<double>()))
    fail("body.total_mass_kg", "is not base plus link masses");

  const json& controller = need(manifest, "", "controller");
  for (const char* key : {"spring_stiffness_N_per_m", "spring_damping_Ns_per_m",
                          "torsion_stiffness_Nm_per_rad", "rest_length_m",
                          "rest_angle_rad"})
    num(controller, "controller", key);

  const json& actuators = need(manifest, "", "actuators");
  check_actuator(need(actuators, "actuators", "hip"), "actuators.hip");
  check_actuator(need(actuators, "actuators", "knee"), "actuators.knee");

  check_units(manifest, root);
}

void write_manifest(const DesignManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << manifest.dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

DesignManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  DesignManifest m;
  try {
    m = DesignManifest::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
  }
  validate_manifest(m);
  return m;
}

}  // namespace monoped
