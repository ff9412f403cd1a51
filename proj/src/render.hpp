// SVG rendering of a field on the gasket: one filled triangle per cell plus
// vertex dots, diverging colormap, data range in the legend.  Rendering never
// feeds back into numerics.

#pragma once

#include <string>
#include <vector>

#include "field.hpp"
#include "gasket.hpp"

namespace gaskpl {

std::string render_svg(const GasketGraph& g, const std::vector<double>& xs,
                       const std::vector<double>& ys, const VertexField& field,
                       const std::string& label);

void write_svg(const std::string& path, const GasketGraph& g, const VertexField& field,
               const std::string& label);

}  // namespace gaskpl
