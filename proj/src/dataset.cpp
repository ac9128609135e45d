#include "lambda4wm/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lambda4wm/csv.hpp"
#include "lambda4wm/errors.hpp"

namespace lambda4wm {

namespace {

void check_records(const GainDataset& data, const std::string& origin,
                   const std::vector<int>& lines) {
  if (data.records.empty()) throw ValidationError(origin + ": no data rows");
  std::map<std::pair<double, double>, int> seen;
  for (std::size_t k = 0; k < data.records.size(); ++k) {
    const auto& r = data.records[k];
    const std::string where = origin + " line " + std::to_string(lines[k]);
    if (!std::isfinite(r.delta) || !std::isfinite(r.theta_deg)) {
      throw ValidationError(where + ": non-finite detuning or angle");
    }
    if (!(r.g_p > 0.0 && r.g_c > 0.0 && std::isfinite(r.g_p) && std::isfinite(r.g_c))) {
      throw ValidationError(where + ": gains must be positive and finite");
    }
    if (!(r.weight >= 0.0 && std::isfinite(r.weight))) {
      throw ValidationError(where + ": weight must be non-negative and finite");
    }
    auto [it, fresh] = seen.emplace(std::pair{r.delta, r.theta_deg}, lines[k]);
    if (!fresh) {
      throw ValidationError(origin + ": duplicate (delta_gamma, theta_deg) on lines " +
                            std::to_string(it->second) + " and " + std::to_string(lines[k]));
    }
  }
}

}  // namespace

void validate_dataset(const GainDataset& data) {
  std::vector<int> lines(data.records.size());
  for (std::size_t k = 0; k < lines.size(); ++k) lines[k] = static_cast<int>(k) + 2;
  check_records(data, "dataset", lines);
}

GainDataset load_gain_data(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read gain data '" + path.string() + "'");
  const std::string origin = path.string();

  std::vector<std::string> lines;
  for (std::string line; std::getline(f, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ValidationError(origin + ": empty file");

  GainDataset data;
  if (lines[0] == kGainHeaderWeighted) {
    data.has_weight = true;
  } else if (lines[0] != kGainHeader) {
    throw ValidationError(origin + ": header must be '" + kGainHeader + "' or '" +
                          kGainHeaderWeighted + "', got '" + lines[0] + "'");
  }
  const std::size_t ncol = data.has_weight ? 5 : 4;

  std::vector<int> numbers;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const int lineno = static_cast<int>(k) + 1;
    const std::string where = origin + " line " + std::to_string(lineno);
    const auto fields = split_fields(lines[k]);
    if (fields.size() != ncol) {
      throw ValidationError(where + ": expected " + std::to_string(ncol) + " fields, got " +
                            std::to_string(fields.size()));
    }
    GainRecord r;
    r.delta = parse_double(fields[0], where);
    r.theta_deg = parse_double(fields[1], where);
    r.g_p = parse_double(fields[2], where);
    r.g_c = parse_double(fields[3], where);
    if (data.has_weight) r.weight = parse_double(fields[4], where);
    data.records.push_back(r);
    numbers.push_back(lineno);
  }
  check_records(data, origin, numbers);
  return data;
}

void write_gain_data(const GainDataset& data, const std::filesystem::path& path) {
  validate_dataset(data);
  std::ostringstream out;
  out << (data.has_weight ? kGainHeaderWeighted : kGainHeader) << '\n';
  for (const auto& r : data.records) {
    std::vector<double> row{r.delta, r.theta_deg, r.g_p, r.g_c};
    if (data.has_weight) row.push_back(r.weight);
    out << join_row(row) << '\n';
  }
  write_text_file(path, out.str());
}

GainDataset dataset_from_map(const GainMap& map) {
  if (map.second.kind != AxisKind::theta_deg) {
    throw ValidationError("gain datasets are keyed by angle; the map has a dkz axis");
  }
  GainDataset data;
  for (Eigen::Index i = 0; i < map.gp.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.gp.cols(); ++j) {
      const double gp = map.gp(i, j), gc = map.gc(i, j);
      if (!(std::isfinite(gp) && std::isfinite(gc) && gp > 0.0 && gc > 0.0)) continue;
      data.records.push_back({map.delta_axis[i], map.second.values[j], gp, gc, 1.0});
    }
  }
  return data;
}

}  // namespace lambda4wm
