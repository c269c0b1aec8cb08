#include "metafas/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "metafas/common.hpp"
#include "metafas/data/color.hpp"
#include "metafas/parallel.hpp"
#include "metafas/rng.hpp"

namespace metafas::data {

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        default: return "test";
    }
}

Split split_from_name(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "dev") return Split::dev;
    if (s == "test") return Split::test;
    throw DataError("unknown split name: " + s);
}

std::vector<DomainShift> default_shifts(int n_domains) {
    // Strong, distinct shifts so leave-one-out actually tests generalization:
    // hue spread over the circle, alternating blur/noise levels, and a
    // different moire period and orientation per domain.
    static const double blur[4] = {0.0, 0.9, 0.4, 1.3};
    static const double noise[4] = {0.02, 0.01, 0.045, 0.02};
    static const double period[4] = {5.5, 9.0, 12.0, 7.0};
    static const double angle[4] = {0.0, 30.0, 60.0, 45.0};
    std::vector<DomainShift> shifts(n_domains);
    for (int i = 0; i < n_domains; ++i) {
        shifts[i].hue_deg = 360.0 * i / n_domains;
        shifts[i].blur_radius = blur[i % 4];
        shifts[i].noise_sigma = noise[i % 4];
        shifts[i].moire_period = period[i % 4];
        shifts[i].moire_angle_deg = angle[i % 4];
    }
    return shifts;
}

namespace {

struct FaceGeom {
    double cx, cy;    // head center, relative coords
    double rx, ry;    // head radii
    double eye_dx = 0.13;
    double eye_y = -0.09;   // offsets from head center, relative
    double brow_y = -0.17;
    double nose_y = 0.03;
    double mouth_y = 0.24;
};

struct Palette {
    double skin[3];
    double brow[3] = {0.25, 0.17, 0.10};
    double eye[3] = {0.88, 0.88, 0.92};
    double glasses[3] = {0.14, 0.14, 0.17};
    double nose_scale = 1.06;
    double ear_scale = 0.92;
    double mouth[3] = {0.42, 0.12, 0.12};
    double upper_lip[3] = {0.62, 0.20, 0.22};
    double lower_lip[3] = {0.72, 0.26, 0.26};
    double bg_top[3];
    double bg_bot[3];
};

FaceGeom sample_geom(Rng& rng) {
    FaceGeom g;
    g.cx = 0.5 + rng.uniform(-0.025, 0.025);
    g.cy = 0.52 + rng.uniform(-0.025, 0.025);
    g.rx = 0.30 * (1.0 + rng.uniform(-0.07, 0.07));
    g.ry = 0.40 * (1.0 + rng.uniform(-0.07, 0.07));
    g.eye_dx = 0.13 * (1.0 + rng.uniform(-0.05, 0.05));
    return g;
}

Palette sample_palette(Rng& rng) {
    Palette p;
    const double tone = rng.uniform(0.62, 0.85);
    p.skin[0] = tone;
    p.skin[1] = tone * (0.74 + rng.uniform(-0.04, 0.04));
    p.skin[2] = tone * (0.58 + rng.uniform(-0.04, 0.04));
    const double bg = rng.uniform(0.20, 0.42);
    p.bg_top[0] = bg;
    p.bg_top[1] = bg * (1.0 + rng.uniform(-0.1, 0.1));
    p.bg_top[2] = std::min(1.0, bg * (1.1 + rng.uniform(-0.1, 0.1)));
    for (int k = 0; k < 3; ++k) p.bg_bot[k] = p.bg_top[k] * rng.uniform(0.55, 0.8);
    return p;
}

inline bool in_ellipse(double x, double y, double ex, double ey, double rx, double ry) {
    const double dx = (x - ex) / rx;
    const double dy = (y - ey) / ry;
    return dx * dx + dy * dy <= 1.0;
}

// Paints the 13-label parsing layout at an arbitrary resolution using
// relative coordinates, so the 32x32 depth grid and the full-size mask
// describe the same geometry.
Mask paint_parsing(const FaceGeom& g, int size) {
    Mask m(size, size);
    const double ear_rx = 0.07, ear_ry = 0.095;
    const double brow_rx = 0.072, brow_ry = 0.026;
    const double eye_rx = 0.052, eye_ry = 0.033;
    const double glass_orx = 0.085, glass_ory = 0.060;
    const double glass_irx = 0.058, glass_iry = 0.040;
    const double nose_rx = 0.045, nose_ry = 0.085;
    const double mouth_rx = 0.10, mouth_ry = 0.055;

    for (int yi = 0; yi < size; ++yi) {
        for (int xi = 0; xi < size; ++xi) {
            const double x = (xi + 0.5) / size;
            const double y = (yi + 0.5) / size;
            std::uint8_t label = kBackground;

            if (in_ellipse(x, y, g.cx - g.rx - 0.025, g.cy, ear_rx, ear_ry)) label = kLeftEar;
            if (in_ellipse(x, y, g.cx + g.rx + 0.025, g.cy, ear_rx, ear_ry)) label = kRightEar;
            if (in_ellipse(x, y, g.cx, g.cy, g.rx, g.ry)) label = kSkin;

            if (label == kSkin) {
                const double lex = g.cx - g.eye_dx, rex = g.cx + g.eye_dx;
                const double ey = g.cy + g.eye_y;
                if (in_ellipse(x, y, g.cx - g.eye_dx, g.cy + g.brow_y, brow_rx, brow_ry)) label = kLeftBrow;
                else if (in_ellipse(x, y, g.cx + g.eye_dx, g.cy + g.brow_y, brow_rx, brow_ry)) label = kRightBrow;
                else if (std::abs(y - ey) <= 0.017 && std::abs(x - g.cx) <= g.eye_dx) label = kEyeglasses;  // bridge
                if (in_ellipse(x, y, lex, ey, glass_orx, glass_ory) && !in_ellipse(x, y, lex, ey, glass_irx, glass_iry))
                    label = kEyeglasses;  // left rim
                if (in_ellipse(x, y, rex, ey, glass_orx, glass_ory) && !in_ellipse(x, y, rex, ey, glass_irx, glass_iry))
                    label = kEyeglasses;  // right rim
                if (in_ellipse(x, y, lex, ey, eye_rx, eye_ry)) label = kLeftEye;
                if (in_ellipse(x, y, rex, ey, eye_rx, eye_ry)) label = kRightEye;
                if (label == kSkin && in_ellipse(x, y, g.cx, g.cy + g.nose_y, nose_rx, nose_ry)) label = kNose;
                if (in_ellipse(x, y, g.cx, g.cy + g.mouth_y, mouth_rx, mouth_ry)) {
                    const double dy = y - (g.cy + g.mouth_y);
                    if (dy < -0.02) label = kUpperLip;
                    else if (dy > 0.02) label = kLowerLip;
                    else label = kMouth;
                }
            }
            m.at(yi, xi) = label;
        }
    }
    return m;
}

inline double depth_dome(const FaceGeom& g, double x, double y) {
    const double dx = (x - g.cx) / g.rx;
    const double dy = (y - g.cy) / g.ry;
    const double q = dx * dx + dy * dy;
    if (q >= 1.0) return 0.0;
    double d = std::sqrt(1.0 - q);
    // Nose bump.
    const double nx = (x - g.cx) / 0.06, ny = (y - (g.cy + g.nose_y)) / 0.10;
    const double nq = nx * nx + ny * ny;
    if (nq < 1.0) d += 0.12 * std::sqrt(1.0 - nq);
    return std::min(1.0, d);
}

Tensor render_depth(const FaceGeom& g) {
    Tensor d(1, kDepthSize, kDepthSize);
    for (int yi = 0; yi < kDepthSize; ++yi)
        for (int xi = 0; xi < kDepthSize; ++xi)
            d.at(0, yi, xi) = depth_dome(g, (xi + 0.5) / kDepthSize, (yi + 0.5) / kDepthSize);
    return d;
}

Tensor render_rgb(const FaceGeom& g, const Palette& p, const Mask& parsing, Rng& rng) {
    const int size = parsing.h;
    Tensor rgb(3, size, size);
    const double jitter[3] = {rng.uniform(0.92, 1.08), rng.uniform(0.92, 1.08), rng.uniform(0.92, 1.08)};
    for (int yi = 0; yi < size; ++yi) {
        for (int xi = 0; xi < size; ++xi) {
            const double x = (xi + 0.5) / size;
            const double y = (yi + 0.5) / size;
            const std::uint8_t label = parsing.at(yi, xi);
            double col[3];
            if (label == kBackground) {
                for (int k = 0; k < 3; ++k) col[k] = p.bg_top[k] + (p.bg_bot[k] - p.bg_top[k]) * y;
            } else {
                const double* base = p.skin;
                double scale = 1.0;
                switch (label) {
                    case kLeftBrow: case kRightBrow: base = p.brow; break;
                    case kLeftEye: case kRightEye: base = p.eye; break;
                    case kEyeglasses: base = p.glasses; break;
                    case kLeftEar: case kRightEar: scale = p.ear_scale; break;
                    case kNose: scale = p.nose_scale; break;
                    case kMouth: base = p.mouth; break;
                    case kUpperLip: base = p.upper_lip; break;
                    case kLowerLip: base = p.lower_lip; break;
                    default: break;
                }
                // Shading follows the depth dome, which is what makes depth
                // recoverable from appearance.
                const double shade = 0.55 + 0.45 * depth_dome(g, x, y);
                for (int k = 0; k < 3; ++k) col[k] = base[k] * scale * shade;
            }
            for (int k = 0; k < 3; ++k) rgb.at(k, yi, xi) = std::clamp(col[k] * jitter[k], 0.0, 1.0);
        }
    }
    return rgb;
}

void apply_moire(Tensor& rgb, const DomainShift& shift, Rng& rng) {
    // Contrast flattening first (a recaptured print loses dynamic range),
    // then a multiplicative periodic grid in the domain's orientation.
    const double angle = (shift.moire_angle_deg + rng.uniform(-5.0, 5.0)) * M_PI / 180.0;
    const double ux = std::cos(angle), uy = std::sin(angle);
    const double phase1 = rng.uniform(0.0, 2.0 * M_PI);
    const double phase2 = rng.uniform(0.0, 2.0 * M_PI);
    const double amp = 0.16;
    const double freq = 2.0 * M_PI / shift.moire_period;
    const double lift = rng.uniform(-0.04, 0.04);
    for (int yi = 0; yi < rgb.h; ++yi)
        for (int xi = 0; xi < rgb.w; ++xi) {
            const double a = freq * (ux * xi + uy * yi);
            const double b = freq * (-uy * xi + ux * yi);
            const double grid = 1.0 + amp * std::sin(a + phase1) * std::sin(b + phase2);
            for (int k = 0; k < 3; ++k) {
                double v = rgb.at(k, yi, xi);
                v = 0.5 + (v - 0.5) * 0.72 + lift;  // flatten
                rgb.at(k, yi, xi) = std::clamp(v * grid, 0.0, 1.0);
            }
        }
}

void apply_hue_shift(Tensor& rgb, double hue_deg) {
    if (hue_deg == 0.0) return;
    Tensor hsv = rgb_to_hsv(rgb);
    const double dh = hue_deg / 360.0;
    for (int yi = 0; yi < rgb.h; ++yi)
        for (int xi = 0; xi < rgb.w; ++xi) {
            double h = hsv.at(0, yi, xi) + dh;
            h -= std::floor(h);
            hsv.at(0, yi, xi) = h;
        }
    rgb = hsv_to_rgb(hsv);
}

void apply_blur(Tensor& rgb, double sigma) {
    if (sigma <= 0.0) return;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    Tensor tmp = rgb;
    for (int ci = 0; ci < 3; ++ci)
        for (int yi = 0; yi < rgb.h; ++yi)
            for (int xi = 0; xi < rgb.w; ++xi) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    int xs = std::clamp(xi + i, 0, rgb.w - 1);
                    acc += kernel[i + radius] * rgb.at(ci, yi, xs);
                }
                tmp.at(ci, yi, xi) = acc;
            }
    for (int ci = 0; ci < 3; ++ci)
        for (int yi = 0; yi < rgb.h; ++yi)
            for (int xi = 0; xi < rgb.w; ++xi) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    int ys = std::clamp(yi + i, 0, rgb.h - 1);
                    acc += kernel[i + radius] * tmp.at(ci, ys, xi);
                }
                rgb.at(ci, yi, xi) = acc;
            }
}

void apply_noise(Tensor& rgb, double sigma, Rng& rng) {
    if (sigma <= 0.0) return;
    for (double& v : rgb.v) v = std::clamp(v + rng.normal(0.0, sigma), 0.0, 1.0);
}

Split split_for_index(int i) {
    switch (i % 5) {
        case 3: return Split::dev;
        case 4: return Split::test;
        default: return Split::train;
    }
}

}  // namespace

Domain generate_synthetic_domain(const SynthConfig& cfg, int domain_index) {
    if (cfg.image_size % 8 != 0 || cfg.image_size <= 0)
        throw DataError("SynthConfig.image_size must be a positive multiple of 8");
    if (cfg.n_domains < 2) throw DataError("SynthConfig.n_domains must be >= 2");
    if (domain_index < 0 || domain_index >= cfg.n_domains) throw DataError("domain_index out of range");
    if (cfg.live_per_domain < 5 || cfg.spoof_per_domain < 5)
        throw DataError("need at least 5 live and 5 spoof samples per domain to populate all splits");

    std::vector<DomainShift> shifts = cfg.shifts.empty() ? default_shifts(cfg.n_domains) : cfg.shifts;
    if (static_cast<int>(shifts.size()) != cfg.n_domains)
        throw DataError("SynthConfig.shifts must have one entry per domain");
    const DomainShift& shift = shifts[domain_index];

    Rng rng(Rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(domain_index)));

    Domain domain;
    domain.name = "synth" + std::to_string(domain_index);
    for (Split s : {Split::train, Split::dev, Split::test}) {
        domain.split(s).name = domain.name;
        domain.split(s).split = s;
    }

    // Values are snapped to 8-bit levels so that saving to PNG and loading
    // back reproduces the dataset exactly.
    auto quantize = [](Tensor& t) {
        for (double& v : t.v) v = static_cast<double>(std::lround(v * 255.0)) / 255.0;
    };
    auto finish = [&](ImageSample&& sample, Split s) {
        apply_hue_shift(sample.rgb, shift.hue_deg);
        apply_blur(sample.rgb, shift.blur_radius);
        apply_noise(sample.rgb, shift.noise_sigma, rng);
        quantize(sample.rgb);
        quantize(sample.depth_gt);
        domain.split(s).samples.push_back(std::move(sample));
    };

    for (int i = 0; i < cfg.live_per_domain; ++i) {
        const FaceGeom g = sample_geom(rng);
        const Palette p = sample_palette(rng);
        ImageSample sample;
        sample.id = domain.name + "_live_" + std::to_string(i);
        sample.label = 1;
        sample.domain_id = domain_index;
        sample.parsing_gt = paint_parsing(g, cfg.image_size);
        sample.depth_gt = render_depth(g);
        sample.rgb = render_rgb(g, p, sample.parsing_gt, rng);
        finish(std::move(sample), split_for_index(i));
    }
    for (int i = 0; i < cfg.spoof_per_domain; ++i) {
        const FaceGeom g = sample_geom(rng);
        const Palette p = sample_palette(rng);
        ImageSample sample;
        sample.id = domain.name + "_spoof_" + std::to_string(i);
        sample.label = 0;
        sample.domain_id = domain_index;
        sample.parsing_gt = paint_parsing(g, cfg.image_size);
        sample.depth_gt = Tensor(1, kDepthSize, kDepthSize);  // spoof depth is all zero
        sample.rgb = render_rgb(g, p, sample.parsing_gt, rng);
        apply_moire(sample.rgb, shift, rng);
        finish(std::move(sample), split_for_index(i));
    }
    return domain;
}

std::vector<Domain> generate_all_domains(const SynthConfig& cfg, int threads) {
    std::vector<Domain> domains(cfg.n_domains);
    std::string error;
    std::mutex error_mutex;
    parallel_for(cfg.n_domains, threads, [&](int i, int) {
        try {
            domains[i] = generate_synthetic_domain(cfg, i);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (error.empty()) error = e.what();
        }
    });
    if (!error.empty()) throw DataError(error);
    return domains;
}

}  // namespace metafas::data
