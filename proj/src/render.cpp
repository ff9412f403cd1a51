#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gaskpl {

namespace {

// Diverging blue-white-red over [-A, A]; t in [0, 1].
std::string color_at(double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto ch = [](double c) { return static_cast<int>(std::lround(255.0 * std::clamp(c, 0.0, 1.0))); };
  double r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;  // blue -> white
    r = 0.23 + (1.0 - 0.23) * s;
    g = 0.30 + (1.0 - 0.30) * s;
    b = 0.75 + (1.0 - 0.75) * s;
  } else {
    const double s = (t - 0.5) / 0.5;  // white -> red
    r = 1.0 - (1.0 - 0.84) * s;
    g = 1.0 - (1.0 - 0.19) * s;
    b = 1.0 - (1.0 - 0.15) * s;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", ch(r), ch(g), ch(b));
  return buf;
}

}  // namespace

std::string render_svg(const GasketGraph& g, const std::vector<double>& xs,
                       const std::vector<double>& ys, const VertexField& field,
                       const std::string& label) {
  if (xs.size() != static_cast<size_t>(g.vertex_count()) || ys.size() != xs.size())
    throw std::invalid_argument("render_svg: coordinate arrays do not match the graph");
  check_field(g, field, "render_svg");

  double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
  for (size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  double lo = field.values[0], hi = field.values[0];
  for (double v : field.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double amp = std::max(std::abs(lo), std::abs(hi));

  const double W = 720.0, Hpix = 760.0, margin = 24.0;
  const double spanx = std::max(xmax - xmin, 1e-12);
  const double spany = std::max(ymax - ymin, 1e-12);
  const double s = std::min((W - 2 * margin) / spanx, (Hpix - 64.0 - 2 * margin) / spany);
  auto px = [&](double x) { return margin + (x - xmin) * s; };
  auto py = [&](double y) { return Hpix - 64.0 - margin - (y - ymin) * s; };  // y up
  auto tval = [&](double v) { return amp > 0.0 ? 0.5 + 0.5 * v / amp : 0.5; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hpix
      << "\" viewBox=\"0 0 " << W << ' ' << Hpix << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& cell : g.cells) {
    double mean = 0.0;
    svg << "<polygon points=\"";
    for (int j = 0; j < 3; ++j) {
      const size_t id = static_cast<size_t>(cell[static_cast<size_t>(j)]);
      svg << px(xs[id]) << ',' << py(ys[id]) << (j < 2 ? " " : "");
      mean += field.values[id] / 3.0;
    }
    svg << "\" fill=\"" << color_at(tval(mean)) << "\" stroke=\"#555555\" stroke-width=\"0.3\"/>\n";
  }
  if (g.vertex_count() <= 4000) {
    const double rad = std::max(1.2, 3.5 - 0.4 * g.level);
    for (int i = 0; i < g.vertex_count(); ++i) {
      const size_t k = static_cast<size_t>(i);
      svg << "<circle cx=\"" << px(xs[k]) << "\" cy=\"" << py(ys[k]) << "\" r=\"" << rad
          << "\" fill=\"" << color_at(tval(field.values[k])) << "\" stroke=\"#333333\" "
          << "stroke-width=\"0.25\"/>\n";
    }
  }
  // Legend: colormap strip plus the data range.
  const double ly = Hpix - 44.0;
  for (int k = 0; k < 120; ++k) {
    const double t = (k + 0.5) / 120.0;
    svg << "<rect x=\"" << margin + k * 2.0 << "\" y=\"" << ly
        << "\" width=\"2\" height=\"14\" fill=\"" << color_at(t) << "\"/>\n";
  }
  svg << "<text x=\"" << margin << "\" y=\"" << ly + 30.0
      << "\" font-family=\"monospace\" font-size=\"13\">" << label << " range [" << lo << ", "
      << hi << "], colormap [-" << amp << ", " << amp << "]</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::string& path, const GasketGraph& g, const VertexField& field,
               const std::string& label) {
  std::vector<double> xs(static_cast<size_t>(g.vertex_count()));
  std::vector<double> ys(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    xs[i] = g.vertices[i].x;
    ys[i] = g.vertices[i].y;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write SVG: " + path);
  out << render_svg(g, xs, ys, field, label);
}

}  // namespace gaskpl
