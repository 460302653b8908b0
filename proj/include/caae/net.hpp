#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "caae/labels.hpp"
#include "caae/layers.hpp"

namespace caae {

struct ArchConfig {
    int image_size = 64;
    int n_z = 50;
    int base_channels = 16;
    int t_l = 1;  // age-label tiling count
    int t_s = 1;  // gender-label tiling count
    std::string hidden_act = "lrelu";  // "lrelu" or "tanh"

    static constexpr int kSexes = 2;

    int n_blocks() const {
        int n = 0, s = image_size;
        while (s % 2 == 0 && s > 2 && n < 4) {
            s /= 2;
            ++n;
        }
        if (n == 0) throw BadConfig("image_size must be even and >= 4");
        return n;
    }
    int final_spatial() const { return image_size >> n_blocks(); }
    std::vector<int> channel_plan() const {
        std::vector<int> plan{base_channels, 2 * base_channels, 4 * base_channels, 4 * base_channels};
        plan.resize(n_blocks());
        return plan;
    }
    int cond_dim() const { return kAgeGroups * t_l + kSexes * t_s; }
    int latent_input_dim() const { return n_z + cond_dim(); }
    int feature_dim() const {
        std::array<int, 4> fm{16, 32, 64, 64};
        return final_spatial() * final_spatial() * fm[n_blocks() - 1];
    }

    bool operator==(const ArchConfig&) const = default;
};

template <class T>
void add_activation(Sequential<T>& net, const std::string& kind) {
    if (kind == "tanh")
        net.template add<caae::Tanh<T>>();
    else if (kind == "lrelu")
        net.template add<LeakyRelu<T>>();
    else
        throw BadConfig("unknown activation: " + kind);
}

// E: strided conv stack -> dense -> tanh, so outputs live in (-1,1)
// matching the uniform prior's support.
template <class T>
void build_encoder(Sequential<T>& net, const ArchConfig& a) {
    auto plan = a.channel_plan();
    int c = 3;
    for (std::size_t b = 0; b < plan.size(); ++b) {
        net.template add<Conv2d<T>>(net.params, "conv" + std::to_string(b), c, plan[b], 4, 2, 1);
        add_activation(net, a.hidden_act);
        c = plan[b];
    }
    const int fs = a.final_spatial();
    net.template add<Dense<T>>(net.params, "fc", fs * fs * c, a.n_z);
    net.template add<caae::Tanh<T>>();
}

// G: dense from [z, l, s] -> mirrored transposed-conv stack -> tanh image.
template <class T>
void build_generator(Sequential<T>& net, const ArchConfig& a) {
    auto plan = a.channel_plan();
    const int fs = a.final_spatial();
    const int top = plan.back();
    net.template add<Dense<T>>(net.params, "fc", a.latent_input_dim(), fs * fs * top);
    add_activation(net, a.hidden_act);
    net.template add<Reshape<T>>(std::vector<int>{fs, fs, top});
    for (int b = static_cast<int>(plan.size()) - 1; b >= 1; --b) {
        net.template add<ConvTranspose2d<T>>(net.params, "deconv" + std::to_string(b), plan[b], plan[b - 1], 4, 2, 1);
        add_activation(net, a.hidden_act);
    }
    net.template add<ConvTranspose2d<T>>(net.params, "deconv0", plan[0], 3, 4, 2, 1);
    net.template add<caae::Tanh<T>>();
}

// D_z: small dense stack with sigmoid head.
template <class T>
void build_dz(Sequential<T>& net, const ArchConfig& a) {
    net.template add<Dense<T>>(net.params, "fc0", a.n_z, 64);
    add_activation(net, a.hidden_act);
    net.template add<Dense<T>>(net.params, "fc1", 64, 32);
    add_activation(net, a.hidden_act);
    net.template add<Dense<T>>(net.params, "fc2", 32, 1);
    net.template add<Sigmoid<T>>();
}

// D_img with (l, s) injected as constant channels after the first conv block.
template <class T>
struct ImageDiscriminator {
    Sequential<T> net;
    ConditionChannels<T>* cond = nullptr;
};

template <class T>
void build_dimg(ImageDiscriminator<T>& d, const ArchConfig& a) {
    auto plan = a.channel_plan();
    auto& net = d.net;
    net.template add<Conv2d<T>>(net.params, "conv0", 3, plan[0], 4, 2, 1);
    add_activation(net, a.hidden_act);
    d.cond = net.template add<ConditionChannels<T>>(a.cond_dim());
    int c = plan[0] + a.cond_dim();
    for (std::size_t b = 1; b < plan.size(); ++b) {
        net.template add<Conv2d<T>>(net.params, "conv" + std::to_string(b), c, plan[b], 4, 2, 1);
        add_activation(net, a.hidden_act);
        c = plan[b];
    }
    const int fs = a.final_spatial();
    net.template add<Dense<T>>(net.params, "fc", fs * fs * c, 1);
    net.template add<Sigmoid<T>>();
}

// FM: frozen perceptual stack, fixed 16/32/64/64 channel plan, tanh blocks.
template <class T>
void build_feature_net(Sequential<T>& net, const ArchConfig& a) {
    std::array<int, 4> plan{16, 32, 64, 64};
    int c = 3;
    for (int b = 0; b < a.n_blocks(); ++b) {
        net.template add<Conv2d<T>>(net.params, "conv" + std::to_string(b), c, plan[b], 4, 2, 1);
        net.template add<caae::Tanh<T>>();
        c = plan[b];
    }
}

// Tiled condition vector: l repeated t_l times, then s repeated t_s times.
// gender_on=false zeroes the s part so flipping s cannot influence anything.
template <class T>
std::vector<T> tile_condition(int group, Sex sex, const ArchConfig& a, bool gender_on) {
    std::vector<T> c;
    c.reserve(a.cond_dim());
    for (int t = 0; t < a.t_l; ++t)
        for (int i = 0; i < kAgeGroups; ++i) c.push_back(i == group ? T(1) : T(0));
    for (int t = 0; t < a.t_s; ++t)
        for (int i = 0; i < ArchConfig::kSexes; ++i)
            c.push_back(gender_on && i == static_cast<int>(sex) ? T(1) : T(0));
    return c;
}

template <class T>
struct CaaeModel {
    ArchConfig arch;
    Sequential<T> encoder;
    Sequential<T> generator;
    Sequential<T> dz;
    ImageDiscriminator<T> dimg;
    Sequential<T> feature_net;

    // z for an image; components in (-1,1) by construction.
    Tensor<T> encode(const Tensor<T>& x) { return encoder.forward(check_image(x)); }

    Tensor<T> generate(const Tensor<T>& z, int group, Sex sex, bool gender_on = true) {
        if (z.size() != arch.n_z) throw ShapeMismatch("latent code has wrong dimension");
        auto cond = tile_condition<T>(group, sex, arch, gender_on);
        Tensor<T> input({arch.latent_input_dim()});
        std::copy(z.data.begin(), z.data.end(), input.data.begin());
        std::copy(cond.begin(), cond.end(), input.data.begin() + arch.n_z);
        return generator.forward(input);
    }

    T dz_score(const Tensor<T>& z) {
        if (z.size() != arch.n_z) throw ShapeMismatch("latent code has wrong dimension");
        return dz.forward(z).data[0];
    }

    T dimg_score(const Tensor<T>& x, int group, Sex sex, bool gender_on = true) {
        dimg.cond->set_condition(tile_condition<T>(group, sex, arch, gender_on));
        return dimg.net.forward(check_image(x)).data[0];
    }

    Tensor<T> feature_map(const Tensor<T>& x) {
        Tensor<T> f = feature_net.forward(check_image(x));
        f.shape = {static_cast<int>(f.size())};
        return f;
    }

  private:
    const Tensor<T>& check_image(const Tensor<T>& x) const {
        if (x.shape.size() != 3 || x.shape[0] != arch.image_size || x.shape[1] != arch.image_size ||
            x.shape[2] != 3)
            throw ShapeMismatch("image tensor has wrong shape");
        return x;
    }
};

// Seeded deterministic initialization of all five networks.
template <class T>
CaaeModel<T> init_model(const ArchConfig& arch, std::uint64_t seed) {
    CaaeModel<T> m;
    m.arch = arch;
    build_encoder(m.encoder, arch);
    build_generator(m.generator, arch);
    build_dz(m.dz, arch);
    build_dimg(m.dimg, arch);
    build_feature_net(m.feature_net, arch);
    m.encoder.params.init(derive_seed(seed, 1));
    m.generator.params.init(derive_seed(seed, 2));
    m.dz.params.init(derive_seed(seed, 3));
    m.dimg.net.params.init(derive_seed(seed, 4));
    m.feature_net.params.init(derive_seed(seed, 5));
    return m;
}

}  // namespace caae
