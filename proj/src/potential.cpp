#include "rsav/potential.hpp"

#include "rsav/error.hpp"

namespace rsav {

PotentialSpec quartic_potential() {
    return {"quartic", [](double s) { return 0.25 * (s * s - 1.0) * (s * s - 1.0); },
            [](double s) { return s * s * s - s; }};
}

PotentialSpec double_well01_potential() {
    return {"double_well01", [](double s) { return 2.0 * s * s * (s - 1.0) * (s - 1.0); },
            [](double s) { return 4.0 * s * (s - 1.0) * (2.0 * s - 1.0); }};
}

PotentialSpec potential_by_name(const std::string& name) {
    if (name == "quartic")
        return quartic_potential();
    if (name == "double_well01")
        return double_well01_potential();
    throw ConfigError("unknown potential '" + name + "' (valid: quartic, double_well01)");
}

} // namespace rsav
