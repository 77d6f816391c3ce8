#include "bridgeml/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bridgeml/errors.hpp"

namespace bridgeml {

namespace {

enum Material { concrete, steel, prestressed, timber };
enum Deck { cast_in_place, precast, open_grid };
enum Design { slab, stringer, girder, box_beam, truss, culvert, tee_beam };

const std::vector<std::string> kMaterials{"concrete", "steel", "prestressed", "timber"};
const std::vector<std::string> kDecks{"cast_in_place", "precast", "open_grid"};
const std::vector<std::string> kDesigns{"slab", "stringer", "girder", "box_beam", "truss", "culvert", "tee_beam"};

struct StateProfile {
  double lat0, lon0;          // box corner
  double pga_lo, pga_hi;      // uniform hazard range
  double material_w[4];
};

StateProfile profile(std::string_view s) {
  if (s == "GA") return {31.0, -85.0, 0.05, 0.15, {0.38, 0.29, 0.27, 0.06}};
  if (s == "KS") return {37.5, -101.0, 0.03, 0.10, {0.40, 0.27, 0.27, 0.06}};
  if (s == "NY") return {41.0, -78.0, 0.08, 0.20, {0.35, 0.32, 0.27, 0.06}};
  if (s == "VA") return {36.8, -82.0, 0.06, 0.18, {0.37, 0.30, 0.27, 0.06}};
  return {46.0, -123.0, 0.05, 1.20, {0.37, 0.29, 0.28, 0.06}};  // WA
}

Design design_for(bool regime2, bool high_hazard_state, Material m, Deck deck, double span, double pga,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (m == timber) return u(rng) < 0.45 ? tee_beam : stringer;
  if (m == concrete) {
    if (high_hazard_state && pga > 0.6) return box_beam;
    if (span < 10.0) return deck == precast ? culvert : slab;
    return regime2 ? girder : box_beam;
  }
  if (span < 15.0) return regime2 ? slab : stringer;
  if (span < 45.0) {
    const bool odd = (m == steel) ^ (deck == cast_in_place) ^ (span > 30.0);
    return odd ? girder : stringer;
  }
  if (m == steel) return regime2 ? girder : truss;
  return regime2 ? truss : girder;
}

}  // namespace

bool synth_regime_two(std::string_view state) { return state == "KS" || state == "WA"; }

Dataset synth_bridges(const SynthOptions& opts) {
  if (opts.instances == 0) throw ConfigError("synthetic dataset needs at least one instance");
  if (!(opts.label_noise >= 0 && opts.label_noise <= 1)) throw ConfigError("label noise must lie in [0, 1]");
  std::vector<std::string> states(kSynthStates.begin(), kSynthStates.end());
  Schema schema({
      Attribute::nominal("state", states, Role::meta),
      Attribute::numeric("lat", Role::meta),
      Attribute::numeric("lon", Role::meta),
      Attribute::numeric("year_built", Role::meta),
      Attribute::nominal("material", kMaterials),
      Attribute::nominal("deck_type", kDecks),
      Attribute::numeric("max_span"),
      Attribute::numeric("avg_span"),
      Attribute::numeric("num_spans"),
      Attribute::numeric("structure_length"),
      Attribute::numeric("seismic_pga"),
      Attribute::numeric("steel_cost"),
      Attribute::numeric("concrete_cost"),
      Attribute::numeric("steel_concrete_ratio"),
      Attribute::numeric("deck_width"),
      Attribute::nominal("design_type", kDesigns, Role::target),
  });

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::discrete_distribution<int> deck_d({0.5, 0.35, 0.15});
  const double median_span[4] = {9.0, 30.0, 28.0, 7.0};

  std::vector<Instance> rows;
  rows.reserve(opts.instances);
  for (std::size_t i = 0; i < opts.instances; ++i) {
    const std::size_t s = i % states.size();
    const auto p = profile(states[s]);
    const bool regime2 = synth_regime_two(states[s]);
    const bool hazard_state = states[s] == kHighHazardState;

    std::discrete_distribution<int> material_d(std::begin(p.material_w), std::end(p.material_w));
    const auto m = static_cast<Material>(material_d(rng));
    const auto deck = static_cast<Deck>(deck_d(rng));
    const double span = std::round(median_span[m] * std::exp(0.6 * z(rng)) * 10.0) / 10.0;
    const int nspans = 1 + static_cast<int>(std::floor(u(rng) * 5.0));
    const double avg = std::round(span * (nspans == 1 ? 1.0 : 0.6 + 0.4 * u(rng)) * 10.0) / 10.0;
    const double length = std::round(avg * nspans * 10.0) / 10.0;
    const double pga = std::round((p.pga_lo + (p.pga_hi - p.pga_lo) * u(rng)) * 1000.0) / 1000.0;
    const double year = 1971.0 + std::floor(u(rng) * 45.0);
    const double steel_cost = std::round((900.0 + 10.0 * (year - 1971.0) + 60.0 * z(rng)) * 100.0) / 100.0;
    const double concrete_cost = std::round((120.0 + 1.5 * (year - 1971.0) + 10.0 * z(rng)) * 100.0) / 100.0;

    Design d = design_for(regime2, hazard_state, m, deck, span, pga, rng);
    if (u(rng) < opts.label_noise) d = static_cast<Design>(std::floor(u(rng) * kDesigns.size()));

    Instance x;
    x.values = {static_cast<double>(s),
                std::round((p.lat0 + 3.0 * u(rng)) * 1e4) / 1e4,
                std::round((p.lon0 + 5.0 * u(rng)) * 1e4) / 1e4,
                year,
                static_cast<double>(m),
                static_cast<double>(deck),
                span,
                avg,
                static_cast<double>(nspans),
                length,
                pga,
                steel_cost,
                concrete_cost,
                std::round(steel_cost / concrete_cost * 1e4) / 1e4,
                std::round((7.0 + 8.0 * u(rng)) * 10.0) / 10.0,
                static_cast<double>(d)};
    rows.push_back(std::move(x));
  }
  return Dataset(std::move(schema), std::move(rows));
}

}  // namespace bridgeml
