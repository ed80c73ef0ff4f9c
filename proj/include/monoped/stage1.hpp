#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monoped/mass_model.hpp"

namespace monoped {

// Uniform ratio grid [lo, hi] split into (hi - lo) / step half-open bins.
// The final bin is closed above so hi itself stays addressable. Edges live
// on the same 1e-6 lattice as RatioWindow, keeping decimal bin boundaries
// exact against rational gear ratios.
struct RatioGrid {
  double lo = 4.0;
  double hi = 15.0;
  double step = 0.1;

  void validate() const;  // throws std::invalid_argument
  int bin_count() const;
  RatioWindow window(int bin) const;

  // Bin index holding the value, or -1 when outside [lo, hi].
  int bin_of(double ratio) const;
  int bin_of_rational(std::int64_t num, std::int64_t den) const;
};

struct CatalogBin {
  RatioWindow window;
  std::optional<ActuatorDesign> best;        // lightest across both mountings
  std::optional<ActuatorDesign> best_isspg;  // lightest in-stator candidate
  std::optional<ActuatorDesign> best_esspg;  // lightest wrap-around candidate
};

struct Stage1Config {
  MotorSpec motor;
  GearboxBounds bounds;
  MaterialTable materials;
  ActuatorGeometry geometry;
  RatioGrid grid;
  // Optional enumeration caps (0 = derive from the housing limit alone).
  int max_sun_teeth = 0;
  int max_planet_teeth = 0;

  void validate() const;
};

struct ActuatorCatalog {
  RatioGrid grid;
  MotorSpec motor;
  std::vector<CatalogBin> bins;
  std::uint64_t config_hash = 0;

  // Lightest design whose ratio bin contains `ratio` (clamped into the grid),
  // or nullptr when the bin is empty. The kinded variant restricts mounting.
  const ActuatorDesign* lookup(double ratio) const;
  const ActuatorDesign* lookup(double ratio, GearboxKind kind) const;
  // Throwing counterpart for callers that require a design.
  const ActuatorDesign& require(double ratio) const;
};

// Strict total order used to pick per-bin winners: lighter mass, then lower
// exact ratio, then ISSPG before ESSPG, then lexicographic train identity.
// A total order makes the parallel argmin independent of evaluation order.
bool catalog_order(const ActuatorDesign& a, const ActuatorDesign& b);

// All gear trains of the given mounting that pass every hard constraint.
std::vector<ActuatorDesign> enumerate_feasible(const Stage1Config& config,
                                               GearboxKind kind);

// Evaluate both mountings over the full enumeration range and keep the
// lightest candidates per ratio bin. `jobs` <= 0 picks a thread count
// automatically; results are identical for any job count.
ActuatorCatalog build_catalog(const Stage1Config& config, int jobs = 0);

std::string catalog_to_json(const ActuatorCatalog& catalog);
ActuatorCatalog catalog_from_json(const std::string& text);

// Which per-bin winner the CSV lists: the overall best, or the best of one
// mounting only (bins with no candidate of that mounting are skipped).
enum class KindFilter { Both, IsspgOnly, EsspgOnly };
KindFilter kind_filter_from_string(std::string_view name);  // both|isspg|esspg

// Flat per-bin summary of the winning designs (header + one row per
// non-empty bin).
std::string catalog_to_csv(const ActuatorCatalog& catalog,
                           KindFilter filter = KindFilter::Both);

}  // namespace monoped
