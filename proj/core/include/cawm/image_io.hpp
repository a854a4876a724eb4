#pragma once

// 8-bit PNG input/output. Loading scales to [0,1]; RGB(A) images load as
// (1,3,H,W) with alpha dropped, grayscale as (1,1,H,W). Saving clamps to
// [0,1] and quantizes round-half-up.

#include <string>

#include "cawm/tensor.hpp"

namespace cawm {

// Throws UnsupportedFormatError for non-PNG, 16-bit, or palette images;
// IoError on filesystem failures.
Tensor<float> load_png(const std::string& path);

// Accepts (1,1,H,W) or (1,3,H,W).
void save_png(const Tensor<float>& img, const std::string& path);

}  // namespace cawm
