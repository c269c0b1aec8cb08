#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metafas/tensor.hpp"

namespace metafas::data {

constexpr int kNumParsingLabels = 13;  // label 0 is background
constexpr int kDepthSize = 32;         // depth ground truth resolution

// Parsing label indices. Background first, then the 12 face regions.
enum ParsingLabel : std::uint8_t {
    kBackground = 0,
    kSkin = 1,
    kLeftBrow = 2,
    kRightBrow = 3,
    kLeftEye = 4,
    kRightEye = 5,
    kEyeglasses = 6,
    kLeftEar = 7,
    kRightEar = 8,
    kNose = 9,
    kMouth = 10,
    kUpperLip = 11,
    kLowerLip = 12,
};

// One face image with its label and pixel-wise annotations.
// Invariants: rgb values in [0,1]; parsing labels in {0..12}; spoof samples
// (label == 0) carry an all-zero depth map.
struct ImageSample {
    std::string id;
    Tensor rgb;        // 3 x H x W, values in [0,1]
    int label = 0;     // 1 = live, 0 = spoof
    Tensor depth_gt;   // 1 x 32 x 32, values in [0,1]
    Mask parsing_gt;   // H x W, values in {0..12}
    int domain_id = 0;
};

enum class Split { train, dev, test };

const char* split_name(Split s);
Split split_from_name(const std::string& s);

// One split of one domain.
struct DomainDataset {
    std::string name;
    Split split = Split::train;
    std::vector<ImageSample> samples;
};

// All three splits of a domain, as stored in one dataset directory.
struct Domain {
    std::string name;
    DomainDataset train;
    DomainDataset dev;
    DomainDataset test;

    const DomainDataset& split(Split s) const {
        switch (s) {
            case Split::train: return train;
            case Split::dev: return dev;
            default: return test;
        }
    }
    DomainDataset& split(Split s) {
        return const_cast<DomainDataset&>(static_cast<const Domain*>(this)->split(s));
    }
};

// Per-domain appearance shift applied to every rendered sample.
struct DomainShift {
    double hue_deg = 0.0;       // hue rotation in degrees
    double blur_radius = 0.0;   // Gaussian blur sigma in pixels (0 = off)
    double noise_sigma = 0.0;   // additive Gaussian noise stddev
    double moire_period = 8.0;  // spoof texture period in pixels
    double moire_angle_deg = 0.0;
};

struct SynthConfig {
    int image_size = 64;  // 256 matches the full-scale setting
    int n_domains = 4;
    int live_per_domain = 60;
    int spoof_per_domain = 60;
    std::vector<DomainShift> shifts;  // empty -> default_shifts(n_domains)
    std::uint64_t seed = 1;
};

std::vector<DomainShift> default_shifts(int n_domains);

// A batch references immutable samples owned by a DomainDataset.
struct Batch {
    int domain_id = 0;
    std::vector<const ImageSample*> samples;
};

// One iteration's partition of the source domains: N-1 meta-train batches
// plus one meta-test batch from the held-out source domain.
struct EpisodeSplit {
    std::vector<Batch> meta_train;
    Batch meta_test;
};

}  // namespace metafas::data
