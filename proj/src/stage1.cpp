#include "monoped/stage1.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

namespace monoped {

namespace {

constexpr std::int64_t kMicro = 1'000'000;

std::int64_t to_micro(double x) {
  return std::llround(x * static_cast<double>(kMicro));
}

}  // namespace

void RatioGrid::validate() const {
  if (!(lo < hi)) throw std::invalid_argument("ratio grid: lo must be < hi");
  if (!(step > 0.0)) throw std::invalid_argument("ratio grid: step must be > 0");
  const std::int64_t lo_u = to_micro(lo);
  const std::int64_t hi_u = to_micro(hi);
  const std::int64_t step_u = to_micro(step);
  if (step_u < 1)
    throw std::invalid_argument("ratio grid: step below 1e-6 resolution");
  if ((hi_u - lo_u) % step_u != 0)
    throw std::invalid_argument("ratio grid: span must be a multiple of step");
}

int RatioGrid::bin_count() const {
  return static_cast<int>((to_micro(hi) - to_micro(lo)) / to_micro(step));
}

RatioWindow RatioGrid::window(int bin) const {
  const int count = bin_count();
  if (bin < 0 || bin >= count)
    throw std::out_of_range("ratio grid: bin index out of range");
  const std::int64_t lo_u = to_micro(lo);
  const std::int64_t step_u = to_micro(step);
  RatioWindow w;
  w.lo_micro = lo_u + static_cast<std::int64_t>(bin) * step_u;
  w.hi_micro = w.lo_micro + step_u;
  w.closed_hi = bin == count - 1;
  return w;
}

int RatioGrid::bin_of(double ratio) const {
  const std::int64_t r_u = to_micro(ratio);
  const std::int64_t lo_u = to_micro(lo);
  const std::int64_t hi_u = to_micro(hi);
  if (r_u < lo_u || r_u > hi_u) return -1;
  if (r_u == hi_u) return bin_count() - 1;
  return static_cast<int>((r_u - lo_u) / to_micro(step));
}

int RatioGrid::bin_of_rational(std::int64_t num, std::int64_t den) const {
  if (den <= 0) return -1;
  const std::int64_t scaled = num * kMicro;
  const std::int64_t lo_side = to_micro(lo) * den;
  const std::int64_t hi_side = to_micro(hi) * den;
  if (scaled < lo_side || scaled > hi_side) return -1;
  if (scaled == hi_side) return bin_count() - 1;
  return static_cast<int>((scaled - lo_side) / (to_micro(step) * den));
}

void Stage1Config::validate() const {
  motor.validate();
  bounds.validate();
  materials.validate();
  geometry.validate();
  grid.validate();
  for (double m : bounds.module_set_mm)
    if (m < bounds.module_min_mm || m > bounds.module_max_mm)
      throw std::invalid_argument("stage1: module_set_mm entry outside module range");
  if (max_sun_teeth < 0 || max_planet_teeth < 0)
    throw std::invalid_argument("stage1: enumeration caps must be >= 0");
}

bool catalog_order(const ActuatorDesign& a, const ActuatorDesign& b) {
  if (a.mass_kg != b.mass_kg) return a.mass_kg < b.mass_kg;
  const auto [an, ad] = gear_ratio_rational(a.train);
  const auto [bn, bd] = gear_ratio_rational(b.train);
  const std::int64_t lhs = an * bd;
  const std::int64_t rhs = bn * ad;
  if (lhs != rhs) return lhs < rhs;
  if (a.kind != b.kind) return a.kind == GearboxKind::ISSPG;
  if (a.train.sun_teeth != b.train.sun_teeth)
    return a.train.sun_teeth < b.train.sun_teeth;
  if (a.train.planet_teeth != b.train.planet_teeth)
    return a.train.planet_teeth < b.train.planet_teeth;
  if (a.train.ring_teeth != b.train.ring_teeth)
    return a.train.ring_teeth < b.train.ring_teeth;
  if (a.train.module_mm != b.train.module_mm)
    return a.train.module_mm < b.train.module_mm;
  return a.train.planet_count < b.train.planet_count;
}

namespace {

// Invokes fn(train) for every geometry-consistent train of this mounting and
// module that can still fit the housing; fn performs the full constraint
// check. Ring teeth follow from sun and planet teeth, so iteration order
// (sun, planet, count) is deterministic.
template <typename Fn>
void for_each_candidate(const Stage1Config& config, GearboxKind kind,
                        double module_mm, Fn&& fn) {
  const GearboxBounds& b = config.bounds;
  const double limit = max_ring_pitch_mm(kind, config.motor, b);
  const int ring_cap = static_cast<int>((limit + 1e-9) / module_mm);
  int sun_cap = ring_cap - 2 * b.min_teeth;
  if (config.max_sun_teeth > 0) sun_cap = std::min(sun_cap, config.max_sun_teeth);
  for (int sun = b.min_teeth; sun <= sun_cap; ++sun) {
    int planet_cap = (ring_cap - sun) / 2;
    if (config.max_planet_teeth > 0)
      planet_cap = std::min(planet_cap, config.max_planet_teeth);
    for (int planet = b.min_teeth; planet <= planet_cap; ++planet) {
      const int ring = sun + 2 * planet;
      for (int count = b.planet_count_min; count <= b.planet_count_max; ++count) {
        fn(GearTrain{sun, planet, ring, module_mm, count});
      }
    }
  }
}

struct BinArgmin {
  std::vector<std::optional<ActuatorDesign>> isspg;
  std::vector<std::optional<ActuatorDesign>> esspg;

  explicit BinArgmin(int bins) : isspg(bins), esspg(bins) {}

  void offer(int bin, const ActuatorDesign& d) {
    auto& slot = d.kind == GearboxKind::ISSPG ? isspg[bin] : esspg[bin];
    if (!slot || catalog_order(d, *slot)) slot = d;
  }

  void merge(const BinArgmin& other) {
    for (std::size_t i = 0; i < isspg.size(); ++i) {
      if (other.isspg[i] && (!isspg[i] || catalog_order(*other.isspg[i], *isspg[i])))
        isspg[i] = other.isspg[i];
      if (other.esspg[i] && (!esspg[i] || catalog_order(*other.esspg[i], *esspg[i])))
        esspg[i] = other.esspg[i];
    }
  }
};

}  // namespace

std::vector<ActuatorDesign> enumerate_feasible(const Stage1Config& config,
                                               GearboxKind kind) {
  config.validate();
  std::vector<ActuatorDesign> out;
  for (double m : config.bounds.module_set_mm) {
    for_each_candidate(config, kind, m, [&](const GearTrain& train) {
      if (!monoped::validate(train, kind, config.motor, config.bounds).feasible())
        return;
      out.push_back(make_actuator(train, kind, config.motor, config.materials,
                                  config.geometry, config.bounds));
    });
  }
  return out;
}

ActuatorCatalog build_catalog(const Stage1Config& config, int jobs) {
  config.validate();
  const int bins = config.grid.bin_count();

  struct Task {
    GearboxKind kind;
    double module_mm;
  };
  std::vector<Task> tasks;
  for (GearboxKind kind : {GearboxKind::ISSPG, GearboxKind::ESSPG})
    for (double m : config.bounds.module_set_mm) tasks.push_back({kind, m});

  int workers = jobs > 0 ? jobs
                         : static_cast<int>(std::max(
                               1u, std::min(8u, std::thread::hardware_concurrency())));
  workers = std::min<int>(workers, static_cast<int>(tasks.size()));

  std::vector<BinArgmin> partials(workers, BinArgmin(bins));
  std::atomic<std::size_t> next{0};
  auto run_worker = [&](int slot) {
    BinArgmin& local = partials[slot];
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      const Task& task = tasks[t];
      for_each_candidate(config, task.kind, task.module_mm, [&](const GearTrain& tr) {
        if (!monoped::validate(tr, task.kind, config.motor, config.bounds).feasible())
          return;
        const auto [num, den] = gear_ratio_rational(tr);
        const int bin = config.grid.bin_of_rational(num, den);
        if (bin < 0) return;
        local.offer(bin, make_actuator(tr, task.kind, config.motor, config.materials,
                                       config.geometry, config.bounds));
      });
    }
  };

  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(run_worker, w);
  run_worker(0);
  for (auto& th : pool) th.join();

  BinArgmin merged(bins);
  // catalog_order is a strict total order, so the fold result does not
  // depend on which worker saw which task.
  for (const BinArgmin& p : partials) merged.merge(p);

  ActuatorCatalog catalog;
  catalog.grid = config.grid;
  catalog.motor = config.motor;
  catalog.bins.resize(bins);
  for (int i = 0; i < bins; ++i) {
    CatalogBin& bin = catalog.bins[i];
    bin.window = config.grid.window(i);
    bin.best_isspg = merged.isspg[i];
    bin.best_esspg = merged.esspg[i];
    if (bin.best_isspg && bin.best_esspg)
      bin.best = catalog_order(*bin.best_isspg, *bin.best_esspg) ? bin.best_isspg
                                                                 : bin.best_esspg;
    else
      bin.best = bin.best_isspg ? bin.best_isspg : bin.best_esspg;
  }
  return catalog;
}

const ActuatorDesign* ActuatorCatalog::lookup(double ratio) const {
  const double clamped = std::clamp(ratio, grid.lo, grid.hi);
  const int bin = grid.bin_of(clamped);
  if (bin < 0) return nullptr;
  const auto& best = bins[static_cast<std::size_t>(bin)].best;
  return best ? &*best : nullptr;
}

const ActuatorDesign* ActuatorCatalog::lookup(double ratio, GearboxKind kind) const {
  const double clamped = std::clamp(ratio, grid.lo, grid.hi);
  const int bin = grid.bin_of(clamped);
  if (bin < 0) return nullptr;
  const CatalogBin& b = bins[static_cast<std::size_t>(bin)];
  const auto& best = kind == GearboxKind::ISSPG ? b.best_isspg : b.best_esspg;
  return best ? &*best : nullptr;
}

const ActuatorDesign& ActuatorCatalog::require(double ratio) const {
  const ActuatorDesign* d = lookup(ratio);
  if (!d) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "no feasible actuator for ratio %.6f", ratio);
    throw std::out_of_range(msg);
  }
  return *d;
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json design_to_json(const ActuatorDesign& d) {
  ordered_json j;
  j["kind"] = to_string(d.kind);
  j["sun_teeth"] = d.train.sun_teeth;
  j["planet_teeth"] = d.train.planet_teeth;
  j["ring_teeth"] = d.train.ring_teeth;
  j["module_mm"] = d.train.module_mm;
  j["planet_count"] = d.train.planet_count;
  j["ratio"] = d.ratio;
  j["mass_kg"] = d.mass_kg;
  j["peak_torque_Nm"] = d.peak_torque_Nm;
  return j;
}

ActuatorDesign design_from_json(const ordered_json& j, const MotorSpec& motor) {
  ActuatorDesign d;
  d.kind = gearbox_kind_from_string(j.at("kind").get<std::string>());
  d.train.sun_teeth = j.at("sun_teeth").get<int>();
  d.train.planet_teeth = j.at("planet_teeth").get<int>();
  d.train.ring_teeth = j.at("ring_teeth").get<int>();
  d.train.module_mm = j.at("module_mm").get<double>();
  d.train.planet_count = j.at("planet_count").get<int>();
  d.ratio = j.at("ratio").get<double>();
  d.mass_kg = j.at("mass_kg").get<double>();
  d.peak_torque_Nm = j.at("peak_torque_Nm").get<double>();
  d.motor = motor;
  return d;
}

ordered_json motor_to_json(const MotorSpec& m) {
  ordered_json j;
  j["name"] = m.name;
  j["mass_kg"] = m.mass_kg;
  j["outer_diameter_mm"] = m.outer_diameter_mm;
  j["stator_inner_diameter_mm"] = m.stator_inner_diameter_mm;
  j["axial_length_mm"] = m.axial_length_mm;
  j["peak_torque_Nm"] = m.peak_torque_Nm;
  j["rotor_inertia_kgm2"] = m.rotor_inertia_kgm2;
  return j;
}

MotorSpec motor_from_json(const ordered_json& j) {
  MotorSpec m;
  m.name = j.at("name").get<std::string>();
  m.mass_kg = j.at("mass_kg").get<double>();
  m.outer_diameter_mm = j.at("outer_diameter_mm").get<double>();
  m.stator_inner_diameter_mm = j.at("stator_inner_diameter_mm").get<double>();
  m.axial_length_mm = j.at("axial_length_mm").get<double>();
  m.peak_torque_Nm = j.at("peak_torque_Nm").get<double>();
  m.rotor_inertia_kgm2 = j.at("rotor_inertia_kgm2").get<double>();
  return m;
}

std::string hash_to_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, h);
  return buf;
}

std::uint64_t hash_from_hex(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

}  // namespace

std::string catalog_to_json(const ActuatorCatalog& catalog) {
  ordered_json j;
  j["schema"] = "actuator-catalog/1";
  j["config_hash"] = hash_to_hex(catalog.config_hash);
  j["grid"] = {{"ratio_lo", catalog.grid.lo},
               {"ratio_hi", catalog.grid.hi},
               {"ratio_step", catalog.grid.step}};
  j["motor"] = motor_to_json(catalog.motor);
  ordered_json bins = ordered_json::array();
  for (std::size_t i = 0; i < catalog.bins.size(); ++i) {
    const CatalogBin& b = catalog.bins[i];
    ordered_json jb;
    jb["index"] = i;
    jb["ratio_lo"] = b.window.lo();
    jb["ratio_hi"] = b.window.hi();
    jb["closed_hi"] = b.window.closed_hi;
    jb["best"] = b.best ? design_to_json(*b.best) : ordered_json(nullptr);
    jb["best_isspg"] =
        b.best_isspg ? design_to_json(*b.best_isspg) : ordered_json(nullptr);
    jb["best_esspg"] =
        b.best_esspg ? design_to_json(*b.best_esspg) : ordered_json(nullptr);
    bins.push_back(std::move(jb));
  }
  j["bins"] = std::move(bins);
  return j.dump(2) + "\n";
}

ActuatorCatalog catalog_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  if (j.at("schema").get<std::string>() != "actuator-catalog/1")
    throw std::invalid_argument("unsupported catalog schema");
  ActuatorCatalog catalog;
  catalog.config_hash = hash_from_hex(j.at("config_hash").get<std::string>());
  const ordered_json& g = j.at("grid");
  catalog.grid.lo = g.at("ratio_lo").get<double>();
  catalog.grid.hi = g.at("ratio_hi").get<double>();
  catalog.grid.step = g.at("ratio_step").get<double>();
  catalog.grid.validate();
  catalog.motor = motor_from_json(j.at("motor"));
  const ordered_json& bins = j.at("bins");
  if (static_cast<int>(bins.size()) != catalog.grid.bin_count())
    throw std::invalid_argument("catalog bin count does not match its grid");
  catalog.bins.resize(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const ordered_json& jb = bins[i];
    if (jb.at("index").get<std::size_t>() != i)
      throw std::invalid_argument("catalog bins out of order");
    CatalogBin& b = catalog.bins[i];
    b.window = catalog.grid.window(static_cast<int>(i));
    if (!jb.at("best").is_null())
      b.best = design_from_json(jb.at("best"), catalog.motor);
    if (!jb.at("best_isspg").is_null())
      b.best_isspg = design_from_json(jb.at("best_isspg"), catalog.motor);
    if (!jb.at("best_esspg").is_null())
      b.best_esspg = design_from_json(jb.at("best_esspg"), catalog.motor);
  }
  return catalog;
}

KindFilter kind_filter_from_string(std::string_view name) {
  if (name == "both") return KindFilter::Both;
  if (name == "isspg") return KindFilter::IsspgOnly;
  if (name == "esspg") return KindFilter::EsspgOnly;
  throw std::invalid_argument("unknown kind filter: " + std::string(name));
}

std::string catalog_to_csv(const ActuatorCatalog& catalog, KindFilter filter) {
  std::string out =
      "bin_index,ratio_lo,ratio_hi,kind,sun_teeth,planet_teeth,ring_teeth,"
      "module_mm,planet_count,ratio,mass_kg,peak_torque_Nm\n";
  char row[256];
  for (std::size_t i = 0; i < catalog.bins.size(); ++i) {
    const CatalogBin& b = catalog.bins[i];
    const std::optional<ActuatorDesign>& pick =
        filter == KindFilter::Both      ? b.best
        : filter == KindFilter::IsspgOnly ? b.best_isspg
                                          : b.best_esspg;
    if (!pick) continue;
    const ActuatorDesign& d = *pick;
    std::snprintf(row, sizeof row, "%zu,%.4f,%.4f,%s,%d,%d,%d,%.1f,%d,%.6f,%.9f,%.9f\n",
                  i, b.window.lo(), b.window.hi(), to_string(d.kind),
                  d.train.sun_teeth, d.train.planet_teeth, d.train.ring_teeth,
                  d.train.module_mm, d.train.planet_count, d.ratio, d.mass_kg,
                  d.peak_torque_Nm);
    out += row;
  }
  return out;
}

}  // namespace monoped
