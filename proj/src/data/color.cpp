#include "metafas/data/color.hpp"

#include <algorithm>
#include <cmath>

#include "metafas/common.hpp"

namespace metafas::data {

void rgb_to_hsv_pixel(double r, double g, double b, double& hh, double& ss, double& vv) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    vv = mx;
    ss = mx > 0.0 ? delta / mx : 0.0;
    if (delta <= 0.0) {
        hh = 0.0;
        return;
    }
    double h6;
    if (mx == r) {
        h6 = (g - b) / delta;
        if (h6 < 0.0) h6 += 6.0;
    } else if (mx == g) {
        h6 = (b - r) / delta + 2.0;
    } else {
        h6 = (r - g) / delta + 4.0;
    }
    hh = h6 / 6.0;
    if (hh >= 1.0) hh -= 1.0;
}

void hsv_to_rgb_pixel(double hh, double ss, double vv, double& r, double& g, double& b) {
    if (ss <= 0.0) {
        r = g = b = vv;
        return;
    }
    double h6 = hh * 6.0;
    if (h6 >= 6.0) h6 -= 6.0;
    const int sector = static_cast<int>(h6);
    const double f = h6 - sector;
    const double p = vv * (1.0 - ss);
    const double q = vv * (1.0 - ss * f);
    const double t = vv * (1.0 - ss * (1.0 - f));
    switch (sector) {
        case 0: r = vv; g = t; b = p; break;
        case 1: r = q; g = vv; b = p; break;
        case 2: r = p; g = vv; b = t; break;
        case 3: r = p; g = q; b = vv; break;
        case 4: r = t; g = p; b = vv; break;
        default: r = vv; g = p; b = q; break;
    }
}

namespace {
void check_unit_range(const Tensor& t, const char* what) {
    for (double x : t.v)
        if (!(x >= 0.0 && x <= 1.0)) throw DataError(std::string(what) + ": values must lie in [0,1]");
}
}  // namespace

Tensor rgb_to_hsv(const Tensor& rgb) {
    if (rgb.c != 3) throw DataError("rgb_to_hsv: expected 3 channels");
    check_unit_range(rgb, "rgb_to_hsv");
    Tensor out(3, rgb.h, rgb.w);
    for (int y = 0; y < rgb.h; ++y)
        for (int x = 0; x < rgb.w; ++x) {
            double hh, ss, vv;
            rgb_to_hsv_pixel(rgb.at(0, y, x), rgb.at(1, y, x), rgb.at(2, y, x), hh, ss, vv);
            out.at(0, y, x) = hh;
            out.at(1, y, x) = ss;
            out.at(2, y, x) = vv;
        }
    return out;
}

Tensor hsv_to_rgb(const Tensor& hsv) {
    if (hsv.c != 3) throw DataError("hsv_to_rgb: expected 3 channels");
    check_unit_range(hsv, "hsv_to_rgb");
    Tensor out(3, hsv.h, hsv.w);
    for (int y = 0; y < hsv.h; ++y)
        for (int x = 0; x < hsv.w; ++x) {
            double r, g, b;
            hsv_to_rgb_pixel(hsv.at(0, y, x), hsv.at(1, y, x), hsv.at(2, y, x), r, g, b);
            out.at(0, y, x) = r;
            out.at(1, y, x) = g;
            out.at(2, y, x) = b;
        }
    return out;
}

Tensor resize_bilinear(const Tensor& in, int out_h, int out_w) {
    if (in.h == out_h && in.w == out_w) return in;
    Tensor out(in.c, out_h, out_w);
    const double sy = static_cast<double>(in.h) / out_h;
    const double sx = static_cast<double>(in.w) / out_w;
    for (int y = 0; y < out_h; ++y) {
        // Half-pixel centers, clamped at the borders.
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(in.h - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, in.h - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(in.w - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, in.w - 1);
            const double wx = fx - x0;
            for (int ci = 0; ci < in.c; ++ci) {
                const double top = (1.0 - wx) * in.at(ci, y0, x0) + wx * in.at(ci, y0, x1);
                const double bot = (1.0 - wx) * in.at(ci, y1, x0) + wx * in.at(ci, y1, x1);
                out.at(ci, y, x) = (1.0 - wy) * top + wy * bot;
            }
        }
    }
    return out;
}

Mask resize_nearest(const Mask& in, int out_h, int out_w) {
    if (in.h == out_h && in.w == out_w) return in;
    Mask out(out_h, out_w);
    const double sy = static_cast<double>(in.h) / out_h;
    const double sx = static_cast<double>(in.w) / out_w;
    for (int y = 0; y < out_h; ++y) {
        int iy = std::min(static_cast<int>((y + 0.5) * sy), in.h - 1);
        for (int x = 0; x < out_w; ++x) {
            int ix = std::min(static_cast<int>((x + 0.5) * sx), in.w - 1);
            out.at(y, x) = in.at(iy, ix);
        }
    }
    return out;
}

Tensor make_model_input(const ImageSample& sample, int side) {
    const Tensor rgb = resize_bilinear(sample.rgb, side, side);
    const Tensor hsv = rgb_to_hsv(rgb);
    Tensor out(6, side, side);
    std::copy(rgb.v.begin(), rgb.v.end(), out.v.begin());
    std::copy(hsv.v.begin(), hsv.v.end(), out.v.begin() + rgb.size());
    return out;
}

}  // namespace metafas::data
