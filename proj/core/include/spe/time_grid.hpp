#ifndef SPE_TIME_GRID_HPP
#define SPE_TIME_GRID_HPP

#include "spe/errors.hpp"

namespace spe {

// Uniform grid on [0, t_end].
struct TimeGrid {
  double t_end = 1.0;
  int n_steps = 1;

  TimeGrid() = default;
  TimeGrid(double t_end_, int n_steps_) : t_end(t_end_), n_steps(n_steps_) {
    if (!(t_end > 0.0)) throw config_error("TimeGrid: t_end must be positive");
    if (n_steps < 1) throw config_error("TimeGrid: n_steps must be >= 1");
  }
  double dt() const { return t_end / n_steps; }
  bool operator==(const TimeGrid& o) const { return t_end == o.t_end && n_steps == o.n_steps; }
  bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

}  // namespace spe

#endif
