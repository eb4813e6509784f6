#include "mh/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mh/errors.hpp"

namespace mh::svg {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

SvgPlot::SvgPlot(int width, int height, std::string title)
    : width_(width), height_(height), title_(std::move(title)) {}

void SvgPlot::set_axis_labels(std::string x_label, std::string y_label) {
  x_label_ = std::move(x_label);
  y_label_ = std::move(y_label);
}

void SvgPlot::add_line(const std::vector<double>& xs,
                       const std::vector<double>& ys, std::string label) {
  series_.push_back(Series{xs, ys, std::move(label), false});
}

void SvgPlot::add_scatter(const std::vector<double>& xs,
                          const std::vector<double>& ys, std::string label) {
  series_.push_back(Series{xs, ys, std::move(label), true});
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Rounds a raw interval up to 1, 2, or 5 times a power of ten so tick labels
// come out as short decimals.
double nice_step(double span, int target_ticks) {
  double raw = span / std::max(1, target_ticks);
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double frac = raw / mag;
  double nice = frac <= 1 ? 1 : frac <= 2 ? 2 : frac <= 5 ? 5 : 10;
  return nice * mag;
}

std::vector<double> ticks_for(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  double step = nice_step(hi - lo, 5);
  double first = std::ceil(lo / step) * step;
  std::vector<double> out;
  for (double t = first; t <= hi + step * 1e-9; t += step) {
    // Snap values like 0.30000000000000004 back onto the grid.
    double snapped = std::round(t / step) * step;
    if (std::abs(snapped) < step * 1e-9) snapped = 0;
    out.push_back(snapped);
  }
  return out;
}

}  // namespace

void SvgPlot::write(std::ostream& os) const {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : series_) {
    size_t n = std::min(s.xs.size(), s.ys.size());
    for (size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      xmin = std::min(xmin, s.xs[i]);
      xmax = std::max(xmax, s.xs[i]);
      ymin = std::min(ymin, s.ys[i]);
      ymax = std::max(ymax, s.ys[i]);
    }
  }
  if (!(xmin <= xmax)) throw Error("svg plot has no finite data points");
  // Degenerate ranges still need a visible axis box.
  if (xmax == xmin) {
    xmax += 1;
    xmin -= 1;
  }
  if (ymax == ymin) {
    double pad = std::abs(ymax) > 0 ? std::abs(ymax) * 0.1 : 1.0;
    ymax += pad;
    ymin -= pad;
  }
  double ypad = (ymax - ymin) * 0.05;
  ymin -= ypad;
  ymax += ypad;

  const double ml = 64, mr = 16, mt = title_.empty() ? 16 : 36, mb = 48;
  const double pw = width_ - ml - mr;
  const double ph = height_ - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
     << "\" height=\"" << height_ << "\" viewBox=\"0 0 " << width_ << " "
     << height_ << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width_ << "\" height=\"" << height_
     << "\" fill=\"white\"/>\n";
  if (!title_.empty()) {
    os << "<text x=\"" << width_ / 2 << "\" y=\"22\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"15\">"
       << xml_escape(title_) << "</text>\n";
  }

  // Axis frame.
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
     << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (double t : ticks_for(xmin, xmax)) {
    double x = px(t);
    os << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x
       << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt(t) << "</text>\n";
  }
  for (double t : ticks_for(ymin, ymax)) {
    double y = py(t);
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml
       << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << fmt(t) << "</text>\n";
  }
  if (!x_label_.empty()) {
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height_ - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\">"
       << xml_escape(x_label_) << "</text>\n";
  }
  if (!y_label_.empty()) {
    os << "<text x=\"14\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\" transform=\"rotate(-90 14 "
       << mt + ph / 2 << ")\">" << xml_escape(y_label_) << "</text>\n";
  }

  for (size_t si = 0; si < series_.size(); ++si) {
    const auto& s = series_[si];
    const char* color = kPalette[si % kPaletteSize];
    size_t n = std::min(s.xs.size(), s.ys.size());
    if (s.scatter) {
      for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
        os << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
           << "\" r=\"1.6\" fill=\"" << color << "\"/>\n";
      }
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.2\" points=\"";
      for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
        if (i) os << " ";
        os << px(s.xs[i]) << "," << py(s.ys[i]);
      }
      os << "\"/>\n";
    }
  }

  // Legend in the upper-right corner of the plot area.
  bool any_label = false;
  for (const auto& s : series_) any_label = any_label || !s.label.empty();
  if (any_label) {
    double lx = ml + pw - 150;
    double ly = mt + 10;
    os << "<rect x=\"" << lx - 6 << "\" y=\"" << ly - 12 << "\" width=\"150\" "
       << "height=\"" << 16 * series_.size() + 8
       << "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"#888\"/>\n";
    for (size_t si = 0; si < series_.size(); ++si) {
      const auto& s = series_[si];
      const char* color = kPalette[si % kPaletteSize];
      double y = ly + 16 * static_cast<double>(si);
      os << "<line x1=\"" << lx << "\" y1=\"" << y - 4 << "\" x2=\"" << lx + 18
         << "\" y2=\"" << y - 4 << "\" stroke=\"" << color
         << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << lx + 24 << "\" y=\"" << y
         << "\" font-family=\"sans-serif\" font-size=\"11\">"
         << xml_escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace mh::svg
