// Finite-difference gradient harness shared by the unit and acceptance
// suites. Everything runs at 64-bit precision on 4x4 images and tiny nets.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "caae/net.hpp"
#include "caae/trainer.hpp"

namespace caae::testing {

inline ArchConfig tiny_arch() {
    ArchConfig a;
    a.image_size = 4;
    a.n_z = 6;
    a.base_channels = 3;
    a.hidden_act = "tanh";  // smooth everywhere, safe for central differences
    return a;
}

inline std::vector<EgSample<double>> random_batch(const ArchConfig& a, int n, Rng& rng) {
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    std::uniform_int_distribution<int> group(0, kAgeGroups - 1);
    std::uniform_int_distribution<int> sex(0, 1);
    std::vector<EgSample<double>> batch(n);
    for (auto& s : batch) {
        s.x = Tensor<double>({a.image_size, a.image_size, 3});
        for (auto& v : s.x.data) v = u(rng);
        s.group = group(rng);
        s.sex = static_cast<Sex>(sex(rng));
    }
    return batch;
}

inline double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

// Max relative error between the analytic gradient of compose_eg_loss and
// central differences over every encoder and generator parameter.
inline double max_eg_gradient_error(std::uint64_t seed) {
    auto arch = tiny_arch();
    auto model = init_model<double>(arch, derive_seed(seed, 1));
    Rng rng(derive_seed(seed, 2));
    auto batch = random_batch(arch, 2, rng);
    LossWeights w{1.5, 0.7, 0.9};
    AblationFlags f;

    model.encoder.params.zero_grad();
    model.generator.params.zero_grad();
    eg_phase(model, batch, w, f, false, true);

    const double h = 1e-5;
    double worst = 0;
    for (auto* store : {&model.encoder.params, &model.generator.params}) {
        for (auto& [name, e] : store->entries) {
            for (std::size_t i = 0; i < e.value.size(); ++i) {
                const double analytic = e.grad[i];
                const double keep = e.value[i];
                e.value[i] = keep + h;
                const double up = eg_phase(model, batch, w, f, false, false).total;
                e.value[i] = keep - h;
                const double dn = eg_phase(model, batch, w, f, false, false).total;
                e.value[i] = keep;
                worst = std::max(worst, rel_err(analytic, (up - dn) / (2 * h)));
            }
        }
    }
    return worst;
}

inline double max_dimg_gradient_error(std::uint64_t seed) {
    auto arch = tiny_arch();
    auto model = init_model<double>(arch, derive_seed(seed, 3));
    Rng rng(derive_seed(seed, 4));
    auto batch = random_batch(arch, 2, rng);

    model.dimg.net.params.zero_grad();
    dimg_phase(model, batch, true, true);

    const double h = 1e-5;
    double worst = 0;
    for (auto& [name, e] : model.dimg.net.params.entries) {
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double analytic = e.grad[i];
            const double keep = e.value[i];
            e.value[i] = keep + h;
            const double up = dimg_phase(model, batch, true, false);
            e.value[i] = keep - h;
            const double dn = dimg_phase(model, batch, true, false);
            e.value[i] = keep;
            worst = std::max(worst, rel_err(analytic, (up - dn) / (2 * h)));
        }
    }
    return worst;
}

inline double max_dz_gradient_error(std::uint64_t seed) {
    auto arch = tiny_arch();
    auto model = init_model<double>(arch, derive_seed(seed, 5));
    Rng rng(derive_seed(seed, 6));
    auto batch = random_batch(arch, 2, rng);
    auto prior = sample_prior<double>(2, arch.n_z, rng);

    model.dz.params.zero_grad();
    dz_phase(model, batch, prior, true);

    const double h = 1e-5;
    double worst = 0;
    for (auto& [name, e] : model.dz.params.entries) {
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double analytic = e.grad[i];
            const double keep = e.value[i];
            e.value[i] = keep + h;
            const double up = dz_phase(model, batch, prior, false);
            e.value[i] = keep - h;
            const double dn = dz_phase(model, batch, prior, false);
            e.value[i] = keep;
            worst = std::max(worst, rel_err(analytic, (up - dn) / (2 * h)));
        }
    }
    return worst;
}

}  // namespace caae::testing
