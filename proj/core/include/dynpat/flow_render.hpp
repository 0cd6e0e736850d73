#pragma once

#include <vector>

#include "dynpat/types.hpp"

namespace dynpat {

/// HSV color coding of a 2D vector field: the field is rescaled so the
/// largest vector norm is 1, then each pixel gets hue from the direction and
/// saturation from the norm (value fixed at 1, so zero motion renders
/// white). A fully saturated border of the given width frames the image and
/// shows, for each border pixel, the hue of the vector pointing from the
/// image center to that pixel. Returns RGB bytes of size
/// (nx + 2*border) x (ny + 2*border) x 3.
std::vector<unsigned char> render_flow_colorwheel(const double* vx,
                                                  const double* vy, int nx,
                                                  int ny, int border = 4);

/// Subtracts the per-frame mean motion vector from every frame (removes the
/// translational component; the pinned final frame stays zero).
void remove_mean_flow(MotionSeq& v);

} // namespace dynpat
