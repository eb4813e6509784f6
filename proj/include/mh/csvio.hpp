#ifndef MH_CSVIO_HPP
#define MH_CSVIO_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mh::csv {

// Shortest decimal string that round-trips to the same double. Uses '.' as
// the decimal separator regardless of locale.
std::string format_double(double x);

// Writes RFC 4180 rows: fields quoted only when needed, CRLF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void write_row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

}  // namespace mh::csv

#endif  // MH_CSVIO_HPP
