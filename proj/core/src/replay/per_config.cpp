#include <algorithm>

#include "tfddrl/errors.hpp"
#include "tfddrl/replay/prioritized_buffer.hpp"

namespace tfddrl::replay {

void PERConfig::validate() const {
  if (!(alpha >= 0.0)) throw ParameterError("alpha must be non-negative");
  if (!(beta0 >= 0.0 && beta0 <= 1.0)) throw ParameterError("beta0 must lie in [0, 1]");
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (capacity == 0) throw ParameterError("capacity must be positive");
}

double PERConfig::beta(std::size_t iteration) const {
  if (total_iterations <= 1) return 1.0;
  const double frac =
      std::min(1.0, static_cast<double>(iteration) / static_cast<double>(total_iterations - 1));
  return beta0 + (1.0 - beta0) * frac;
}

}  // namespace tfddrl::replay
