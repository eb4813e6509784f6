#include "mh/csvio.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace mh::csv {

std::string format_double(double x) {
  if (std::isnan(x)) {
    return "nan";
  }
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quote(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    if (c == '"') {
      out.push_back('"');
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) {
      os_ << ',';
    }
    os_ << (needs_quoting(fields[i]) ? quote(fields[i]) : fields[i]);
  }
  os_ << "\r\n";
}

}  // namespace mh::csv
