#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "caae/labels.hpp"
#include "caae/rng.hpp"
#include "caae/tensor.hpp"

namespace caae {

struct SyntheticFaceParams {
    std::uint64_t identity_seed = 0;
    int age = 0;
    Sex sex = Sex::male;
    int size = 64;
};

// Identity attributes are a pure function of the seed; age and sex never
// feed into them, so the same seed keeps the same face across the lifespan.
struct FaceAttributes {
    float bg_r, bg_g, bg_b;
    float skin_r, skin_g, skin_b;
    double eye_spacing;  // fraction of width from center to each eye
    double mouth_width;  // fraction of width, half-extent

    explicit FaceAttributes(std::uint64_t seed) {
        const double u0 = hash_unit(seed ^ 0x01);
        const double u1 = hash_unit(seed ^ 0x02);
        const double u2 = hash_unit(seed ^ 0x03);
        const double u3 = hash_unit(seed ^ 0x04);
        const double u4 = hash_unit(seed ^ 0x05);
        const double u5 = hash_unit(seed ^ 0x06);
        bg_r = static_cast<float>(-0.9 + 0.5 * u0);
        bg_g = static_cast<float>(-0.9 + 0.5 * u1);
        bg_b = static_cast<float>(-0.9 + 0.5 * u2);
        skin_r = static_cast<float>(0.30 + 0.45 * u3);
        skin_g = skin_r - static_cast<float>(0.15 + 0.10 * u4);
        skin_b = skin_g - static_cast<float>(0.20 + 0.10 * u4);
        eye_spacing = 0.10 + 0.10 * u5;
        mouth_width = 0.06 + 0.06 * hash_unit(seed ^ 0x07);
    }
};

namespace renderer_detail {

constexpr float kBandR = 0.9f, kBandG = 0.9f, kBandB = 0.85f;
constexpr float kWrinkleShade = -0.55f;
constexpr float kEyeShade = -0.9f;
constexpr float kMouthR = -0.2f, kMouthG = -0.7f, kMouthB = -0.7f;

inline int rnd(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace renderer_detail

// Deterministic toy face. Layout (fractions of image size S):
//   rows [0, 0.12 S): gender band, width 0.80 S (female) or 0.30 S (male)
//   face ellipse centered (0.5, 0.55), vertical semi-axis 0.38 S, horizontal
//     semi-axis scaled by aspect = 0.95 .. 0.70 over ages 0 .. 100
//   wrinkles: floor(age/10) strokes starting at row 0.24 S, central x extent
//   eyes / mouth: seed-derived spacing and width, fixed across ages
template <class T = float>
Tensor<T> render_synthetic_face(const SyntheticFaceParams& p) {
    using namespace renderer_detail;
    if (p.age < 0 || p.age > 100) throw OutOfRange("synthetic age outside [0, 100]");
    if (p.size < 16) throw BadConfig("synthetic image size must be >= 16");
    const int S = p.size;
    const FaceAttributes attr(p.identity_seed);

    Tensor<T> img({S, S, 3});
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) {
            img.at(y, x, 0) = static_cast<T>(attr.bg_r);
            img.at(y, x, 1) = static_cast<T>(attr.bg_g);
            img.at(y, x, 2) = static_cast<T>(attr.bg_b);
        }

    // face ellipse; narrows with age
    const double aspect = 0.95 + (0.70 - 0.95) * (p.age / 100.0);
    const double cx = 0.5 * S, cy = 0.55 * S;
    const double ry = 0.38 * S, rx = ry * aspect;
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) {
            const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
            if (dx * dx + dy * dy <= 1.0) {
                img.at(y, x, 0) = static_cast<T>(attr.skin_r);
                img.at(y, x, 1) = static_cast<T>(attr.skin_g);
                img.at(y, x, 2) = static_cast<T>(attr.skin_b);
            }
        }

    // forehead wrinkles, one stroke per completed decade
    const int strokes = p.age / 10;
    const int wrinkle_half = rnd(0.11 * S);
    for (int i = 0; i < strokes; ++i) {
        const int y = rnd((0.24 + 0.018 * i) * S);
        for (int x = rnd(cx) - wrinkle_half; x <= rnd(cx) + wrinkle_half; ++x) {
            img.at(y, x, 0) = static_cast<T>(kWrinkleShade);
            img.at(y, x, 1) = static_cast<T>(kWrinkleShade);
            img.at(y, x, 2) = static_cast<T>(kWrinkleShade);
        }
    }

    // eyes, seed-fixed spacing
    const int eye_y = rnd(0.48 * S);
    const int eye_half = std::max(1, S / 32);
    for (int side : {-1, 1}) {
        const int ex = rnd(cx + side * attr.eye_spacing * S);
        for (int y = eye_y - eye_half; y <= eye_y + eye_half; ++y)
            for (int x = ex - eye_half; x <= ex + eye_half; ++x) {
                img.at(y, x, 0) = static_cast<T>(kEyeShade);
                img.at(y, x, 1) = static_cast<T>(kEyeShade);
                img.at(y, x, 2) = static_cast<T>(kEyeShade);
            }
    }

    // mouth bar, seed-fixed width
    const int mouth_y = rnd(0.70 * S);
    const int mouth_half = std::max(1, rnd(attr.mouth_width * S));
    for (int y = mouth_y; y <= mouth_y + std::max(1, S / 64); ++y)
        for (int x = rnd(cx) - mouth_half; x <= rnd(cx) + mouth_half; ++x) {
            img.at(y, x, 0) = static_cast<T>(kMouthR);
            img.at(y, x, 1) = static_cast<T>(kMouthG);
            img.at(y, x, 2) = static_cast<T>(kMouthB);
        }

    // gender band across the top 12% of the image
    const int band_rows = static_cast<int>(0.12 * S);
    const double band_frac = (p.sex == Sex::female) ? 0.80 : 0.30;
    const int band_half = rnd(0.5 * band_frac * S);
    for (int y = 0; y < band_rows; ++y)
        for (int x = rnd(cx) - band_half; x < rnd(cx) + band_half; ++x) {
            img.at(y, x, 0) = static_cast<T>(kBandR);
            img.at(y, x, 1) = static_cast<T>(kBandG);
            img.at(y, x, 2) = static_cast<T>(kBandB);
        }

    return img;
}

}  // namespace caae
