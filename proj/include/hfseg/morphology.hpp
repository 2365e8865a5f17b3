#ifndef HFSEG_MORPHOLOGY_HPP
#define HFSEG_MORPHOLOGY_HPP

#include <utility>
#include <vector>

#include "hfseg/image.hpp"

namespace hfseg {

// Flat disk structuring element: every (dy, dx) with dy^2 + dx^2 <= r^2.
// Always contains (0,0) and is centrally symmetric.
struct StructuringElement {
    std::vector<std::pair<int, int>> offsets;
    int radius = 0;

    static StructuringElement disk(int r);
};

// out(p) = max over offsets of img(p + offset); replicate border.
BScan dilate(const BScan& img, const StructuringElement& se);
// Dual with min.
BScan erode(const BScan& img, const StructuringElement& se);

// Geodesic reconstruction by dilation: the fixed point of
// p -> min(dilate(p, unit cross), mask) starting from marker.
// Requires marker <= mask pointwise. The geodesic step is 4-connected
// regardless of any outer structuring element.
BScan reconstruct_dilation(const BScan& marker, const BScan& mask);

// Dual reconstruction: fixed point of p -> max(erode(p), mask),
// requires marker >= mask pointwise.
BScan reconstruct_erosion(const BScan& marker, const BScan& mask);

// Closing by reconstruction with a disk of radius r:
// erosion, dilation-reconstruction toward img, dilation of the result,
// then erosion-reconstruction. r = 0 returns img unchanged.
BScan closing_reconstruction(const BScan& img, int r);

} // namespace hfseg

#endif
