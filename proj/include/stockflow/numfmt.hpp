#pragma once

#include <string>

namespace stockflow {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

} // namespace stockflow
