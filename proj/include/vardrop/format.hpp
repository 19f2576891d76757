#pragma once

#include <string>

namespace vardrop {

// Fixed 12-significant-digit text form used by every report writer.
std::string format_real(double x);

// Round-trip a value through its 12-significant-digit form so JSON
// serializers emit the same digits as the CSV writers.
double round_sig12(double x);

}  // namespace vardrop
