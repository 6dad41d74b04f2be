#pragma once

#include "sflr/dataset.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sflr {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// Whole-string decimal parse; throws InvalidArgument on junk.
double parse_double(std::string_view text);

/// Dataset CSV:
///   t,<t_1>,...,<t_n>
///   <label or NA>,<x(t_1)>,...,<x(t_n)>
/// Lines starting with '#' are comments. NA labels are allowed only when every
/// row is NA (prediction input); the dataset then has no labels.
FunctionalDataset parse_dataset(std::istream& in, const std::string& source = "<stream>");
FunctionalDataset read_dataset(const std::filesystem::path& path);

/// Writes the dataset CSV, preceded by "# " comment lines.
void write_dataset(std::ostream& out, const FunctionalDataset& data,
                   const std::vector<std::string>& comments = {});
void write_dataset(const std::filesystem::path& path, const FunctionalDataset& data,
                   const std::vector<std::string>& comments = {});

/// Writes `text` to `path`, throwing DataError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace sflr
