#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metafas/tensor.hpp"

namespace metafas::png {

// 8-bit image buffers in row-major HW(C) order.
struct Image8 {
    int h = 0;
    int w = 0;
    int channels = 0;  // 1 or 3
    std::vector<std::uint8_t> v;
};

Image8 read(const std::string& path);
void write(const std::string& path, const Image8& img);

// [0,1] double tensor <-> 8-bit image, value = round(x * 255).
Image8 from_tensor_rgb(const Tensor& t);
Tensor to_tensor_rgb(const Image8& img);
Image8 from_tensor_gray(const Tensor& t);
Tensor to_tensor_gray(const Image8& img);

}  // namespace metafas::png
