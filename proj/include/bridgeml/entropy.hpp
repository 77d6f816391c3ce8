#pragma once

#include <span>

namespace bridgeml {

// Shannon entropy in bits of a count vector; 0·log 0 is 0.
// Throws ConfigError when every count is zero or any count is negative.
double entropy(std::span<const double> counts);

// As entropy(), but an all-zero vector yields 0 instead of throwing.
double entropy_or_zero(std::span<const double> counts);

}  // namespace bridgeml
