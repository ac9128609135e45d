#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lambda4wm {

/// 17 significant digits in scientific notation; round-trips every double.
std::string format_double(double v);

std::string join_row(const std::vector<double>& values);

/// Throws ValidationError naming the path if it cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::vector<std::string> split_fields(const std::string& line);

/// Strict full-string parse; throws ValidationError mentioning `where`.
double parse_double(const std::string& field, const std::string& where);

}  // namespace lambda4wm
