#include "sflr/io.hpp"

#include "sflr/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sflr {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(trim(f));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string where(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ": column " + std::to_string(column) + ": ";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != last) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

FunctionalDataset parse_dataset(std::istream& in, const std::string& source) {
  FunctionalDataset data;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;  // -1 for NA
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::vector<std::string> fields = split_csv(t);
    if (!have_header) {
      if (fields.empty() || fields[0] != "t") {
        throw DataError(where(source, line_no, 1) + "header must start with 't'");
      }
      if (fields.size() < 3) {
        throw DataError(where(source, line_no, fields.size()) + "grid needs at least two points");
      }
      for (std::size_t c = 1; c < fields.size(); ++c) {
        double v;
        try {
          v = parse_double(fields[c]);
        } catch (const InvalidArgument&) {
          throw DataError(where(source, line_no, c + 1) + "bad grid value '" + fields[c] + "'");
        }
        if (!data.grid.empty() && !(v > data.grid.back())) {
          throw DataError(where(source, line_no, c + 1) + "grid is not strictly increasing");
        }
        data.grid.push_back(v);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != data.grid.size() + 1) {
      throw DataError(where(source, line_no, fields.size()) + "expected " +
                      std::to_string(data.grid.size() + 1) + " fields, found " +
                      std::to_string(fields.size()));
    }
    if (fields[0] == "NA") {
      labels.push_back(-1);
    } else if (fields[0] == "0" || fields[0] == "1") {
      labels.push_back(fields[0] == "1" ? 1 : 0);
    } else {
      throw DataError(where(source, line_no, 1) + "label must be 0, 1 or NA, found '" + fields[0] +
                      "'");
    }
    std::vector<double> row(data.grid.size());
    for (std::size_t c = 1; c < fields.size(); ++c) {
      try {
        row[c - 1] = parse_double(fields[c]);
      } catch (const InvalidArgument&) {
        throw DataError(where(source, line_no, c + 1) + "bad value '" + fields[c] + "'");
      }
    }
    rows.push_back(std::move(row));
    if (labels.size() > 1 && (labels.back() == -1) != (labels.front() == -1)) {
      throw DataError(where(source, line_no, 1) +
                      "NA labels must be used for every row or for none");
    }
  }
  if (!have_header) throw DataError(source + ": missing header row");

  data.values.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(data.grid.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      data.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  if (!labels.empty() && labels.front() != -1) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i];
    data.labels = std::move(y);
  }
  return data;
}

FunctionalDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  return parse_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const FunctionalDataset& data,
                   const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << 't';
  for (double t : data.grid) out << ',' << format_double(t);
  out << '\n';
  for (Eigen::Index i = 0; i < data.values.rows(); ++i) {
    if (data.labels) {
      out << ((*data.labels)(i) == 1.0 ? "1" : "0");
    } else {
      out << "NA";
    }
    for (Eigen::Index k = 0; k < data.values.cols(); ++k) out << ',' << format_double(data.values(i, k));
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const FunctionalDataset& data,
                   const std::vector<std::string>& comments) {
  std::ostringstream out;
  write_dataset(out, data, comments);
  write_text(path, out.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sflr
