#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "caae/losses.hpp"
#include "caae/rng.hpp"

using namespace caae;

namespace {
Tensor<double> random_image(int h, int w, int c, Rng& rng) {
    Tensor<double> t({h, w, c});
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : t.data) v = u(rng);
    return t;
}
}  // namespace

TEST_CASE("reconstruction loss") {
    Rng rng(1);
    Tensor<double> x = random_image(4, 4, 3, rng);
    CHECK(reconstruction_loss(x, x) == 0.0);

    Tensor<double> zeros({2, 2, 1});
    Tensor<double> ones({2, 2, 1});
    for (auto& v : ones.data) v = 1.0;
    CHECK(reconstruction_loss(zeros, ones) == doctest::Approx(1.0).epsilon(1e-12));

    // scalar-loop oracle
    Tensor<double> a = random_image(5, 5, 3, rng), b = random_image(5, 5, 3, rng);
    double acc = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) acc += (b.data[i] - a.data[i]) * (b.data[i] - a.data[i]);
    acc /= static_cast<double>(a.data.size());
    CHECK(reconstruction_loss(a, b) == doctest::Approx(acc).epsilon(1e-12));

    Tensor<double> wrong({3, 3, 3});
    CHECK_THROWS_AS(reconstruction_loss(a, wrong), ShapeMismatch);
}

TEST_CASE("tv loss") {
    Tensor<double> constant({6, 6, 3});
    for (auto& v : constant.data) v = 0.37;
    CHECK(tv_loss(constant) == 0.0);

    // [[0,1],[0,1]]: horizontal diffs 1+1, vertical 0, / 4 pixels
    Tensor<double> t({2, 2, 1}, {0.0, 1.0, 0.0, 1.0});
    CHECK(tv_loss(t) == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng(2);
    Tensor<double> x = random_image(7, 5, 2, rng);
    double acc = 0;
    for (int y = 0; y < 7; ++y)
        for (int xx = 0; xx < 5; ++xx)
            for (int c = 0; c < 2; ++c) {
                if (xx + 1 < 5) acc += std::pow(x.at(y, xx + 1, c) - x.at(y, xx, c), 2);
                if (y + 1 < 7) acc += std::pow(x.at(y + 1, xx, c) - x.at(y, xx, c), 2);
            }
    acc /= 35.0;
    CHECK(tv_loss(x) == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("adversarial losses") {
    std::vector<double> half{0.5};
    CHECK(dz_discriminator_loss<double>(half, half) == doctest::Approx(1.38629).epsilon(1e-4));
    CHECK(dz_discriminator_loss<double>(half, half) == doctest::Approx(-2 * std::log(0.5)).epsilon(1e-12));

    std::vector<double> near_one{1.0 - 1e-9}, near_zero{1e-9};
    CHECK(dz_discriminator_loss<double>(near_one, near_zero) == doctest::Approx(2e-9).epsilon(1e-3));
    CHECK(dimg_discriminator_loss<double>(near_one, near_zero) == doctest::Approx(2e-9).epsilon(1e-3));

    CHECK(generator_adversarial_loss<double>(near_one) == doctest::Approx(1e-9).epsilon(1e-3));
    CHECK(generator_adversarial_loss<double>(half) == doctest::Approx(0.69315).epsilon(1e-4));

    Rng rng(3);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    std::vector<double> real(17), fake(13);
    for (auto& v : real) v = u(rng);
    for (auto& v : fake) v = u(rng);
    double oracle = 0;
    for (double v : real) oracle -= std::log(v) / real.size();
    for (double v : fake) oracle -= std::log(1 - v) / fake.size();
    CHECK(dz_discriminator_loss<double>(real, fake) == doctest::Approx(oracle).epsilon(1e-12));
    double gen_oracle = 0;
    for (double v : fake) gen_oracle -= std::log(v) / fake.size();
    CHECK(generator_adversarial_loss<double>(fake) == doctest::Approx(gen_oracle).epsilon(1e-12));

    std::vector<double> bad{0.0};
    CHECK_THROWS_AS(dz_discriminator_loss<double>(bad, half), DomainError);
    std::vector<double> bad1{1.0};
    CHECK_THROWS_AS(generator_adversarial_loss<double>(bad1), DomainError);
    CHECK_THROWS_AS(dimg_discriminator_loss<double>(half, bad1), DomainError);
}

TEST_CASE("feature loss") {
    Rng rng(4);
    Tensor<double> a({64});
    Tensor<double> b({64});
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (auto& v : a.data) v = u(rng);
    for (auto& v : b.data) v = u(rng);

    CHECK(feature_loss(a, a) == 0.0);
    CHECK(feature_loss(a, b) == doctest::Approx(feature_loss(b, a)).epsilon(1e-15));

    double acc = 0;
    for (int i = 0; i < 64; ++i) acc += (b.data[i] - a.data[i]) * (b.data[i] - a.data[i]);
    CHECK(feature_loss(a, b) == doctest::Approx(acc / 64).epsilon(1e-12));

    Tensor<double> c({32});
    CHECK_THROWS_AS(feature_loss(a, c), ShapeMismatch);
}

TEST_CASE("compose_eg_loss") {
    LossWeights w;
    AblationFlags f;
    LossReport zero;
    CHECK(compose_eg_loss(zero, w, f) == 0.0);

    LossReport only_recon;
    only_recon.recon = 1.0;
    w.lambda = 100.0;
    w.gamma = 0.0;
    w.phi = 0.0;
    CHECK(compose_eg_loss(only_recon, w, f) == doctest::Approx(100.0).epsilon(1e-15));

    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    LossReport parts;
    parts.recon = u(rng);
    parts.tv = u(rng);
    parts.adv_gen_z = u(rng);
    parts.adv_gen_img = u(rng);
    parts.feat = u(rng);
    w.lambda = u(rng);
    w.gamma = u(rng);
    w.phi = u(rng);
    const double by_hand =
        w.lambda * parts.recon + w.gamma * parts.tv + parts.adv_gen_z + parts.adv_gen_img + w.phi * parts.feat;
    CHECK(compose_eg_loss(parts, w, f) == doctest::Approx(by_hand).epsilon(1e-12));

    f.vgg_on = false;
    CHECK(compose_eg_loss(parts, w, f) == doctest::Approx(by_hand - w.phi * parts.feat).epsilon(1e-12));
}
