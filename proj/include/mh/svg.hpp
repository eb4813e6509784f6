#ifndef MH_SVG_HPP
#define MH_SVG_HPP

#include <ostream>
#include <string>
#include <vector>

namespace mh::svg {

// Minimal line/scatter plot emitted as a single self-contained SVG document:
// axes, ticks, series, and a legend, with no external references.  This is
// deliberately not a plotting library; it renders the handful of figure
// artifacts the experiment commands produce.
class SvgPlot {
 public:
  SvgPlot(int width, int height, std::string title);

  void set_axis_labels(std::string x_label, std::string y_label);

  // Series are drawn in insertion order with a fixed color palette.
  void add_line(const std::vector<double>& xs, const std::vector<double>& ys,
                std::string label);
  void add_scatter(const std::vector<double>& xs, const std::vector<double>& ys,
                   std::string label);

  // Renders the document.  Throws Error when no finite data point exists.
  void write(std::ostream& os) const;

 private:
  struct Series {
    std::vector<double> xs;
    std::vector<double> ys;
    std::string label;
    bool scatter = false;
  };

  int width_;
  int height_;
  std::string title_;
  std::string x_label_;
  std::string y_label_;
  std::vector<Series> series_;
};

// Escapes &, <, >, and quotes for use in XML text and attribute values.
std::string xml_escape(const std::string& s);

}  // namespace mh::svg

#endif  // MH_SVG_HPP
