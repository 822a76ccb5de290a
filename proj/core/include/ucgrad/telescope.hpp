#pragma once

#include <memory>

#include "ucgrad/system.hpp"

namespace ucgrad {

// Wraps a system so its per-step loss becomes p_t = L_t - L_{t-1}; summing
// p_t over any prefix telescopes to the prefix-final L_t, which lets
// final-loss objectives reuse the summed-loss machinery. The previous step's
// loss is cached as an extra trailing state entry (exact for deterministic
// systems, avoids re-evaluating the wrapped loss).
std::shared_ptr<const UnrolledSystem> telescope(std::shared_ptr<const UnrolledSystem> inner);

}  // namespace ucgrad
