#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "bridgeml/dataset.hpp"

namespace bridgeml {

// Desk-scale stand-in for a multi-state bridge inventory with planted structure:
//  - two groups of states whose span/material rules disagree,
//  - a design choice driven by the parity of (material, deck, span) that only a tree captures,
//  - one state where high peak ground acceleration changes concrete designs,
//  - a rare class that shares timber bridges 45/55 with stringers,
//  - uniform label noise.
struct SynthOptions {
  std::size_t instances = 20000;
  std::uint64_t seed = 1;
  double label_noise = 0.10;
};

inline constexpr std::array<std::string_view, 5> kSynthStates{"GA", "KS", "NY", "VA", "WA"};
inline constexpr std::string_view kHighHazardState = "WA";
inline constexpr std::string_view kMinorityClass = "tee_beam";

// Second regime states.
bool synth_regime_two(std::string_view state);

Dataset synth_bridges(const SynthOptions& opts = {});

}  // namespace bridgeml
