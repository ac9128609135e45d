#pragma once

#include <filesystem>
#include <vector>

#include "lambda4wm/sweep.hpp"

namespace lambda4wm {

struct GainRecord {
  double delta = 0.0;      // [gamma]
  double theta_deg = 0.0;  // [deg]
  double g_p = 1.0, g_c = 1.0;
  double weight = 1.0;
  bool operator==(const GainRecord&) const = default;
};

struct GainDataset {
  std::vector<GainRecord> records;
  bool has_weight = false;
  bool operator==(const GainDataset&) const = default;
};

inline constexpr const char* kGainHeader = "delta_gamma,theta_deg,g_p,g_c";
inline constexpr const char* kGainHeaderWeighted = "delta_gamma,theta_deg,g_p,g_c,weight";

/// Checks positivity, finiteness and key uniqueness; errors name records by
/// `first_line + index` (data lines start at 2 in a file).
void validate_dataset(const GainDataset& data);

/// Header must match one of the two forms above byte for byte.
GainDataset load_gain_data(const std::filesystem::path& path);

void write_gain_data(const GainDataset& data, const std::filesystem::path& path);

/// One record per finite cell of a theta-axis map.
GainDataset dataset_from_map(const GainMap& map);

}  // namespace lambda4wm
