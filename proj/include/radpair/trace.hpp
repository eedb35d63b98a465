#pragma once

#include <cstdint>
#include <vector>

namespace radpair {

// Per-frame scalar intensities of a measurement/reference protocol. Frames
// alternate RF-on measurement and RF-off reference.
struct ProtocolTrace {
  std::vector<double> frame_times;  // s, exposure midpoints
  std::vector<double> intensities;
  std::vector<bool> rf_on_mask;
  double bleach_slope_true = 0.0;  // units / s
  std::uint64_t noise_seed = 0;

  std::size_t size() const { return frame_times.size(); }
};

// Throws ProtocolShapeError on mismatched lengths or unsorted times.
void validate(const ProtocolTrace& trace);

}  // namespace radpair
