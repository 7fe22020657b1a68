#pragma once

#include <functional>
#include <string>

namespace rsav {

/// Nonnegative double-well potential and its derivative.
struct PotentialSpec {
    std::string name;
    std::function<double(double)> F;
    std::function<double(double)> F_prime;
};

/// F(s) = (s^2 - 1)^2 / 4, minima at -1 and 1.
PotentialSpec quartic_potential();

/// F(s) = 2 s^2 (s - 1)^2, minima at 0 and 1.
PotentialSpec double_well01_potential();

PotentialSpec potential_by_name(const std::string& name);

} // namespace rsav
