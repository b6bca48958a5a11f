#pragma once

#include "carloc/errors.hpp"
#include "carloc/image.hpp"

namespace carloc {

/// Binary dilation by a square all-ones structuring element of odd side
/// kernel_size; pixels outside the image are background.
BinaryImage dilate(const BinaryImage& b, int kernel_size);

/// Binary erosion by the same element, background outside.
BinaryImage erode(const BinaryImage& b, int kernel_size);

/// Morphological closing: `iterations` dilations followed by `iterations`
/// erosions. Computed on a canvas padded by iterations * (kernel_size/2)
/// background pixels, which makes the result exactly the infinite-plane
/// closing restricted to the image window: extensive, idempotent, and unable
/// to bleed past the image edges.
BinaryImage morph_close(const BinaryImage& b, int kernel_size, int iterations);

}  // namespace carloc
