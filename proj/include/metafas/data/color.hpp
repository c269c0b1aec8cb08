#pragma once

#include "metafas/data/types.hpp"
#include "metafas/tensor.hpp"

namespace metafas::data {

// Hexcone RGB <-> HSV with all components in [0,1] (hue is scaled from
// degrees by 1/360). Inputs outside [0,1] are rejected.
Tensor rgb_to_hsv(const Tensor& rgb);
Tensor hsv_to_rgb(const Tensor& hsv);

void rgb_to_hsv_pixel(double r, double g, double b, double& hh, double& ss, double& vv);
void hsv_to_rgb_pixel(double hh, double ss, double vv, double& r, double& g, double& b);

// Bilinear resize of a CHW tensor to side x side.
Tensor resize_bilinear(const Tensor& in, int out_h, int out_w);

// Nearest-neighbour resize for label masks (preserves label values).
Mask resize_nearest(const Mask& in, int out_h, int out_w);

// 6-channel model input: channels 0-2 the bilinearly resized RGB, channels
// 3-5 its HSV conversion (computed after the resize, so the pixelwise
// relation holds exactly at any size).
Tensor make_model_input(const ImageSample& sample, int side);

}  // namespace metafas::data
