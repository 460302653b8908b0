#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "caae/errors.hpp"
#include "caae/tensor.hpp"

namespace caae {

// Floor inside every log so saturated scores cannot overflow to -inf.
inline constexpr double kLogFloor = 1e-8;

struct LossWeights {
    double lambda = 100.0;  // reconstruction
    double gamma = 10.0;    // total variation
    double phi = 0.01;      // feature-map identity term
};

struct AblationFlags {
    bool gender_on = true;
    bool vgg_on = true;
};

struct LossReport {
    double recon = 0;
    double tv = 0;
    double adv_dz = 0;
    double adv_dimg = 0;
    double adv_gen_z = 0;
    double adv_gen_img = 0;
    double feat = 0;
    double total = 0;
};

namespace detail {
template <class T>
void check_scores(std::span<const T> scores) {
    if (scores.empty()) throw EmptyInput("no scores");
    for (T s : scores)
        if (!(s > T(0) && s < T(1))) throw DomainError("score outside (0,1)");
}
template <class T>
double safe_log(T v) {
    return std::log(std::max(static_cast<double>(v), kLogFloor));
}
}  // namespace detail

// Mean squared elementwise difference.
template <class T>
double reconstruction_loss(const Tensor<T>& x, const Tensor<T>& xhat) {
    if (!x.same_shape(xhat)) throw ShapeMismatch("reconstruction_loss: shape mismatch");
    double acc = 0;
    for (std::int64_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(xhat.data[i]) - static_cast<double>(x.data[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

template <class T>
Tensor<T> reconstruction_loss_grad(const Tensor<T>& x, const Tensor<T>& xhat) {
    if (!x.same_shape(xhat)) throw ShapeMismatch("reconstruction_loss: shape mismatch");
    Tensor<T> g(xhat.shape);
    const T scale = T(2) / static_cast<T>(x.size());
    for (std::int64_t i = 0; i < x.size(); ++i) g.data[i] = scale * (xhat.data[i] - x.data[i]);
    return g;
}

// Anisotropic squared-difference total variation, normalized by pixel count.
template <class T>
double tv_loss(const Tensor<T>& x) {
    const int h = x.shape[0], w = x.shape[1], c = x.shape[2];
    double acc = 0;
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            for (int ch = 0; ch < c; ++ch) {
                if (xx + 1 < w) {
                    const double d = static_cast<double>(x.at(y, xx + 1, ch)) - static_cast<double>(x.at(y, xx, ch));
                    acc += d * d;
                }
                if (y + 1 < h) {
                    const double d = static_cast<double>(x.at(y + 1, xx, ch)) - static_cast<double>(x.at(y, xx, ch));
                    acc += d * d;
                }
            }
    return acc / static_cast<double>(h * w);
}

template <class T>
Tensor<T> tv_loss_grad(const Tensor<T>& x) {
    const int h = x.shape[0], w = x.shape[1], c = x.shape[2];
    Tensor<T> g(x.shape);
    const T scale = T(2) / static_cast<T>(h * w);
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            for (int ch = 0; ch < c; ++ch) {
                if (xx + 1 < w) {
                    const T d = x.at(y, xx + 1, ch) - x.at(y, xx, ch);
                    g.at(y, xx + 1, ch) += scale * d;
                    g.at(y, xx, ch) -= scale * d;
                }
                if (y + 1 < h) {
                    const T d = x.at(y + 1, xx, ch) - x.at(y, xx, ch);
                    g.at(y + 1, xx, ch) += scale * d;
                    g.at(y, xx, ch) -= scale * d;
                }
            }
    return g;
}

// -mean(log real) - mean(log(1 - fake)).
template <class T>
double discriminator_loss(std::span<const T> real_scores, std::span<const T> fake_scores) {
    detail::check_scores(real_scores);
    detail::check_scores(fake_scores);
    double acc = 0;
    for (T s : real_scores) acc -= detail::safe_log(s);
    acc /= static_cast<double>(real_scores.size());
    double acc2 = 0;
    for (T s : fake_scores) acc2 -= detail::safe_log(T(1) - s);
    return acc + acc2 / static_cast<double>(fake_scores.size());
}

template <class T>
double dz_discriminator_loss(std::span<const T> real_scores, std::span<const T> fake_scores) {
    return discriminator_loss(real_scores, fake_scores);
}
template <class T>
double dimg_discriminator_loss(std::span<const T> real_scores, std::span<const T> fake_scores) {
    return discriminator_loss(real_scores, fake_scores);
}

// Non-saturating generator loss: -mean(log fake).
template <class T>
double generator_adversarial_loss(std::span<const T> fake_scores) {
    detail::check_scores(fake_scores);
    double acc = 0;
    for (T s : fake_scores) acc -= detail::safe_log(s);
    return acc / static_cast<double>(fake_scores.size());
}

// Literal minimax form, kept behind a flag for fidelity runs.
template <class T>
double generator_adversarial_loss_saturating(std::span<const T> fake_scores) {
    detail::check_scores(fake_scores);
    double acc = 0;
    for (T s : fake_scores) acc += detail::safe_log(T(1) - s);
    return acc / static_cast<double>(fake_scores.size());
}

// d(discriminator_loss)/d(score), per score.
template <class T>
T disc_real_score_grad(T score, std::size_t n) {
    return -T(1) / (std::max(score, static_cast<T>(kLogFloor)) * static_cast<T>(n));
}
template <class T>
T disc_fake_score_grad(T score, std::size_t n) {
    return T(1) / (std::max(T(1) - score, static_cast<T>(kLogFloor)) * static_cast<T>(n));
}
template <class T>
T gen_score_grad(T score, std::size_t n, bool saturating = false) {
    if (saturating) return -T(1) / (std::max(T(1) - score, static_cast<T>(kLogFloor)) * static_cast<T>(n));
    return -T(1) / (std::max(score, static_cast<T>(kLogFloor)) * static_cast<T>(n));
}

// Mean squared difference of two flattened feature vectors.
template <class T>
double feature_loss(const Tensor<T>& fm_x, const Tensor<T>& fm_xhat) {
    if (fm_x.size() != fm_xhat.size()) throw ShapeMismatch("feature_loss: length mismatch");
    double acc = 0;
    for (std::int64_t i = 0; i < fm_x.size(); ++i) {
        const double d = static_cast<double>(fm_xhat.data[i]) - static_cast<double>(fm_x.data[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(fm_x.size());
}

template <class T>
Tensor<T> feature_loss_grad(const Tensor<T>& fm_x, const Tensor<T>& fm_xhat) {
    if (fm_x.size() != fm_xhat.size()) throw ShapeMismatch("feature_loss: length mismatch");
    Tensor<T> g(fm_xhat.shape);
    const T scale = T(2) / static_cast<T>(fm_x.size());
    for (std::int64_t i = 0; i < fm_x.size(); ++i) g.data[i] = scale * (fm_xhat.data[i] - fm_x.data[i]);
    return g;
}

// Weighted E/G objective; ablation flags select CAAE / -G / -V / -GV.
inline double compose_eg_loss(const LossReport& parts, const LossWeights& w, const AblationFlags& f) {
    const double phi = f.vgg_on ? w.phi : 0.0;
    return w.lambda * parts.recon + w.gamma * parts.tv + parts.adv_gen_z + parts.adv_gen_img +
           phi * parts.feat;
}

}  // namespace caae
