#pragma once

#include "nucleitrace/image.hpp"

namespace nucleitrace {

// Grayscale morphology over a discrete Euclidean ball with clamp-to-edge
// borders. Radius 0 is the identity.
Image gray_erode(const Image& img, StructuringRadius r);
Image gray_dilate(const Image& img, StructuringRadius r);

/// Erosion followed by dilation of a {0,1}-valued image.
Image binary_open(const Image& img, StructuringRadius r);

}  // namespace nucleitrace
