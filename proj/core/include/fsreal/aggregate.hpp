#pragma once

#include <cstdint>
#include <vector>

#include "fsreal/model.hpp"

namespace fsreal {

// Sample-size-weighted average of full parameter uploads, computed per
// layer over each update's upload mask. Layers absent from every mask keep
// the previous global value. Updates are folded in ascending
// (client_id, origin_round) order with compensated accumulation, so the
// result is exactly permutation-invariant.
ModelParams fedavg_aggregate(const std::vector<UpdateRecord>& updates,
                             const ModelParams& prev_global);

// Staleness discount for buffered async updates: s(0) = 1, non-increasing.
double staleness_weight(uint64_t staleness);

// Buffered async aggregation over deltas:
//   global + server_lr * (1/K) * sum_i s(tau_i) * delta_i
// with tau_i = current_round - origin_round.
ModelParams fedbuff_aggregate(const ModelParams& global,
                              const std::vector<UpdateRecord>& buffer, double server_lr,
                              uint64_t current_round);

}  // namespace fsreal
