#pragma once

#include <vector>

#include "gasnet/lti.hpp"

namespace gasnet {

// Continuous low-pass prototype with all poles on the radius-2*pi*cutoff
// circle in the open left half-plane, assembled as cascaded biquad sections
// (plus one first-order section when the order is odd). Unity gain at DC,
// no feedthrough.
LtiSystem butterworth_lowpass(int order, double cutoff_hz);

// Routes each selected plant output through its own copy of the SISO filter;
// unselected outputs pass through untouched. Labels are kept, the order grows
// by filter.order() per sensor.
LtiSystem append_sensor_filters(const LtiSystem& plant, const LtiSystem& filter,
                                const std::vector<Index>& sensors);

}  // namespace gasnet
