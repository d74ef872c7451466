#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace pgamarket::cli {

using ojson = nlohmann::ordered_json;

/// Value rounded to 9 significant digits; null when not finite.
ojson num(double x);

/// 9 significant digits for CSV cells; "inf", "-inf" and "nan" spelled out.
std::string fmt(double x);

/// "strictly_increasing", "strictly_decreasing", "nondecreasing",
/// "nonincreasing", "constant" or "mixed"; non-finite entries are skipped.
std::string monotonicity(const std::vector<double>& xs);

}  // namespace pgamarket::cli
