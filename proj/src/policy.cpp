#include "mfh/policy.hpp"

#include <string>

namespace mfh {

LinearPolicy LinearPolicy::zero(Channel channel, int width, int n, int horizon) {
  LinearPolicy p;
  p.channel = channel;
  p.gains.assign(static_cast<std::size_t>(horizon + 1), Matrix::Zero(width, n));
  p.mean_gains = p.gains;
  return p;
}

LinearPolicy LinearPolicy::open_loop(Channel channel, const VectorSeq& values, int n) {
  if (values.empty()) throw DimensionError("open-loop policy needs at least one stage");
  const int width = static_cast<int>(values.front().size());
  LinearPolicy p = zero(channel, width, n, static_cast<int>(values.size()) - 1);
  p.offsets = values;
  return p;
}

void LinearPolicy::check(int width, int n, int horizon) const {
  const std::string name = channel == Channel::kControl ? "control policy" : "disturbance policy";
  const auto stages = static_cast<std::size_t>(horizon + 1);
  if (gains.size() != stages || mean_gains.size() != stages) {
    throw DimensionError(name + ": expected " + std::to_string(stages) + " stages");
  }
  if (!offsets.empty() && offsets.size() != stages) {
    throw DimensionError(name + ": offsets must be empty or have one entry per stage");
  }
  for (std::size_t k = 0; k < stages; ++k) {
    if (gains[k].rows() != width || gains[k].cols() != n || mean_gains[k].rows() != width ||
        mean_gains[k].cols() != n) {
      throw DimensionError(name + ": gain shape mismatch at k=" + std::to_string(k));
    }
    if (!offsets.empty() && offsets[k].size() != width) {
      throw DimensionError(name + ": offset length mismatch at k=" + std::to_string(k));
    }
  }
}

}  // namespace mfh
