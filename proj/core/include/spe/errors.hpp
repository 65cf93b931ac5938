#ifndef SPE_ERRORS_HPP
#define SPE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spe {

// Base class for all library errors.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent configuration (bad ranges, grid too small, ...).
struct config_error : error {
  explicit config_error(const std::string& msg) : error(msg) {}
};

// Operands live on different domains or have incompatible shapes.
struct shape_error : error {
  explicit shape_error(const std::string& msg) : error(msg) {}
};

// Point outside the closure of the domain rectangle.
struct domain_error : error {
  explicit domain_error(const std::string& msg) : error(msg) {}
};

// Solution norm exceeded the guard threshold or became non-finite.
struct blowup_error : error {
  explicit blowup_error(const std::string& msg) : error(msg) {}
};

// Explicit-nonlinearity step-size contract violated.
struct stability_error : error {
  explicit stability_error(const std::string& msg) : error(msg) {}
};

// Reference-operator cost guard tripped (band too large for the oracle).
struct cost_guard_error : error {
  explicit cost_guard_error(const std::string& msg) : error(msg) {}
};

// Gram value too small: the noise does not act on the requested direction.
struct degenerate_direction_error : error {
  explicit degenerate_direction_error(const std::string& msg) : error(msg) {}
};

// Descent made no progress after exhausting backtracking.
struct stall_error : error {
  explicit stall_error(const std::string& msg) : error(msg) {}
};

}  // namespace spe

#endif
