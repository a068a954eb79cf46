#include "covspec/io.hpp"

#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

#include "covspec/detail/numfmt.hpp"
#include "covspec/errors.hpp"

namespace covspec {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trimmed(const std::string& s) {
  auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

bool parse_field(const std::string& field, double* out) {
  std::string t = trimmed(field);
  auto parsed = detail::parse_double_prefix(t);
  if (!parsed || parsed->second != t.size()) return false;
  *out = parsed->first;
  return true;
}

}  // namespace

Sample read_sample_csv(const std::string& path, int expected_d) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  Sample s;
  s.d = expected_d;
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trimmed(line).empty()) continue;
    auto fields = split_csv_line(line);
    double v;
    if (first && !parse_field(fields[0], &v)) {
      first = false;  // header line
      continue;
    }
    first = false;
    if (static_cast<int>(fields.size()) != expected_d)
      throw ArgumentError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(expected_d) + " columns, got " +
                          std::to_string(fields.size()));
    for (const auto& f : fields) {
      if (!parse_field(f, &v))
        throw ArgumentError(path + ":" + std::to_string(lineno) + ": bad numeric field '" + f +
                            "'");
      if (!std::isfinite(v))
        throw ArgumentError(path + ":" + std::to_string(lineno) + ": non-finite value");
      s.values.push_back(v);
    }
    ++s.rows;
  }
  if (s.rows == 0) throw ArgumentError(path + ": no data rows");
  return s;
}

std::string draws_to_csv(std::span<const double> draws, const std::string& column) {
  std::string out = column + "\r\n";
  for (double v : draws) out += detail::format_double(v) + "\r\n";
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << text;
}

}  // namespace covspec
