#pragma once

#include <array>
#include <chrono>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "caae/checkpoint.hpp"
#include "caae/dataset.hpp"
#include "caae/losses.hpp"
#include "caae/net.hpp"
#include "caae/optimizer.hpp"

namespace caae {

struct TrainConfig {
    ArchConfig arch;
    int batch_size = 32;
    int epochs = 5;
    float learning_rate = 2e-4f;
    std::uint64_t seed = 1;
    LossWeights weights;
    AblationFlags ablation;
    int checkpoint_every = 0;  // steps; 0 = only final
    bool saturating_gan = false;

    void validate() const {
        if (batch_size < 1) throw BadConfig("batch_size must be >= 1");
        if (learning_rate < 0) throw BadConfig("learning_rate must be >= 0");
        if (epochs < 0) throw BadConfig("epochs must be >= 0");
    }
};

template <class T>
struct EgSample {
    Tensor<T> x;
    int group = 0;
    Sex sex = Sex::male;
};

namespace trainer_detail {
template <class T>
Tensor<T> unit_grad(T v) {
    Tensor<T> d({1});
    d.data[0] = v;
    return d;
}
template <class T>
void add(Tensor<T>& a, const Tensor<T>& b) {
    for (std::int64_t i = 0; i < a.size(); ++i) a.data[i] += b.data[i];
}
template <class T>
void add_scaled(Tensor<T>& a, const Tensor<T>& b, T s) {
    for (std::int64_t i = 0; i < a.size(); ++i) a.data[i] += s * b.data[i];
}
}  // namespace trainer_detail

// D_img pass: real (x, l, s) against G(E(x), l, s); gradients land in
// D_img's store only.
template <class T>
double dimg_phase(CaaeModel<T>& m, const std::vector<EgSample<T>>& batch, bool gender_on, bool with_grad) {
    const std::size_t n = batch.size();
    std::vector<T> real_scores, fake_scores;
    for (const auto& s : batch) {
        const T sr = m.dimg_score(s.x, s.group, s.sex, gender_on);
        real_scores.push_back(sr);
        if (with_grad) m.dimg.net.backward(trainer_detail::unit_grad(disc_real_score_grad(sr, n)));
        Tensor<T> z = m.encode(s.x);
        Tensor<T> xhat = m.generate(z, s.group, s.sex, gender_on);
        const T sf = m.dimg_score(xhat, s.group, s.sex, gender_on);
        fake_scores.push_back(sf);
        if (with_grad) m.dimg.net.backward(trainer_detail::unit_grad(disc_fake_score_grad(sf, n)));
    }
    return dimg_discriminator_loss<T>(real_scores, fake_scores);
}

// D_z pass: prior samples against E(x).
template <class T>
double dz_phase(CaaeModel<T>& m, const std::vector<EgSample<T>>& batch,
                const std::vector<std::vector<T>>& prior, bool with_grad) {
    const std::size_t n = batch.size();
    std::vector<T> real_scores, fake_scores;
    for (std::size_t i = 0; i < n; ++i) {
        Tensor<T> zstar({m.arch.n_z});
        zstar.data = prior[i];
        const T sr = m.dz_score(zstar);
        real_scores.push_back(sr);
        if (with_grad) m.dz.backward(trainer_detail::unit_grad(disc_real_score_grad(sr, n)));
        Tensor<T> z = m.encode(batch[i].x);
        const T sf = m.dz_score(z);
        fake_scores.push_back(sf);
        if (with_grad) m.dz.backward(trainer_detail::unit_grad(disc_fake_score_grad(sf, n)));
    }
    return dz_discriminator_loss<T>(real_scores, fake_scores);
}

// E/G pass over the composed objective. With with_grad the full chain is
// backpropagated into the encoder and generator stores; the discriminator and
// FM stores pick up garbage gradients along the way and the caller discards
// them (their values are never stepped here).
template <class T>
LossReport eg_phase(CaaeModel<T>& m, const std::vector<EgSample<T>>& batch, const LossWeights& w,
                    const AblationFlags& f, bool saturating, bool with_grad) {
    using trainer_detail::add;
    using trainer_detail::add_scaled;
    const std::size_t n = batch.size();
    const double phi = f.vgg_on ? w.phi : 0.0;
    LossReport rep;
    std::vector<T> gz_scores, gi_scores;
    for (const auto& s : batch) {
        Tensor<T> z = m.encoder.forward(s.x);
        Tensor<T> xhat = m.generate(z, s.group, s.sex, f.gender_on);

        rep.recon += reconstruction_loss(s.x, xhat) / n;
        rep.tv += tv_loss(xhat) / n;

        Tensor<T> dxhat(xhat.shape);
        if (with_grad) {
            add_scaled(dxhat, reconstruction_loss_grad(s.x, xhat), static_cast<T>(w.lambda / n));
            add_scaled(dxhat, tv_loss_grad(xhat), static_cast<T>(w.gamma / n));
        }

        if (f.vgg_on) {
            Tensor<T> fm_x = m.feature_map(s.x);
            Tensor<T> fm_h = m.feature_net.forward(xhat);
            Tensor<T> flat = fm_h;
            flat.shape = {static_cast<int>(fm_h.size())};
            rep.feat += feature_loss(fm_x, flat) / n;
            if (with_grad) {
                Tensor<T> dfm = feature_loss_grad(fm_x, flat);
                for (auto& v : dfm.data) v *= static_cast<T>(phi / n);
                dfm.shape = fm_h.shape;
                add(dxhat, m.feature_net.backward(dfm));
            }
        }

        const T si = m.dimg_score(xhat, s.group, s.sex, f.gender_on);
        gi_scores.push_back(si);
        const T sz = m.dz_score(z);
        gz_scores.push_back(sz);

        if (with_grad) {
            add(dxhat, m.dimg.net.backward(trainer_detail::unit_grad(gen_score_grad(si, n, saturating))));
            Tensor<T> dinput = m.generator.backward(dxhat);
            Tensor<T> dz_grad({m.arch.n_z});
            std::copy(dinput.data.begin(), dinput.data.begin() + m.arch.n_z, dz_grad.data.begin());
            add(dz_grad, m.dz.backward(trainer_detail::unit_grad(gen_score_grad(sz, n, saturating))));
            m.encoder.backward(dz_grad);
        }
    }
    rep.adv_gen_img = saturating ? generator_adversarial_loss_saturating<T>(gi_scores)
                                 : generator_adversarial_loss<T>(gi_scores);
    rep.adv_gen_z = saturating ? generator_adversarial_loss_saturating<T>(gz_scores)
                               : generator_adversarial_loss<T>(gz_scores);
    rep.total = compose_eg_loss(rep, w, f);
    return rep;
}

struct TrainLogEntry {
    long step = 0;
    LossReport report;
    double wall_ms = 0;
};

using TrainLog = std::vector<TrainLogEntry>;

template <class T>
using ImageLoader = std::function<Tensor<T>(const std::string&, int)>;

template <class T = float>
class Trainer {
  public:
    Trainer(const TrainConfig& cfg, CaaeModel<T> model, ImageLoader<T> loader = {})
        : cfg_(cfg),
          model_(std::move(model)),
          loader_(std::move(loader)),
          opt_enc_(static_cast<T>(cfg.learning_rate)),
          opt_gen_(static_cast<T>(cfg.learning_rate)),
          opt_dz_(static_cast<T>(cfg.learning_rate)),
          opt_dimg_(static_cast<T>(cfg.learning_rate)),
          prior_rng_(derive_seed(cfg.seed, 0x9a10)) {
        cfg.validate();
    }

    CaaeModel<T>& model() { return model_; }
    long step_index() const { return step_; }

    // One alternating update: (1) D_img, (2) D_z, (3) E and G jointly.
    LossReport train_step(const std::vector<FaceRecord>& records) {
        if (records.empty()) throw EmptyInput("empty training batch");
        std::vector<EgSample<T>> batch;
        batch.reserve(records.size());
        for (const auto& r : records)
            batch.push_back({record_image<T>(r, cfg_.arch.image_size, loader_), r.group, r.sex});
        return train_step_samples(batch);
    }

    LossReport train_step_samples(const std::vector<EgSample<T>>& batch) {
        LossReport rep;

        model_.dimg.net.params.zero_grad();
        rep.adv_dimg = dimg_phase(model_, batch, cfg_.ablation.gender_on, true);
        require_finite(rep.adv_dimg, "adv_dimg");
        opt_dimg_.step(model_.dimg.net.params);

        model_.dz.params.zero_grad();
        auto prior = sample_prior<T>(static_cast<int>(batch.size()), cfg_.arch.n_z, prior_rng_);
        rep.adv_dz = dz_phase(model_, batch, prior, true);
        require_finite(rep.adv_dz, "adv_dz");
        opt_dz_.step(model_.dz.params);

        model_.encoder.params.zero_grad();
        model_.generator.params.zero_grad();
        LossReport eg = eg_phase(model_, batch, cfg_.weights, cfg_.ablation, cfg_.saturating_gan, true);
        rep.recon = eg.recon;
        rep.tv = eg.tv;
        rep.feat = eg.feat;
        rep.adv_gen_img = eg.adv_gen_img;
        rep.adv_gen_z = eg.adv_gen_z;
        rep.total = eg.total;
        require_finite(rep.recon, "recon");
        require_finite(rep.tv, "tv");
        require_finite(rep.feat, "feat");
        require_finite(rep.adv_gen_z, "adv_gen_z");
        require_finite(rep.adv_gen_img, "adv_gen_img");
        // stray gradients from chaining through the frozen nets
        model_.dimg.net.params.zero_grad();
        model_.dz.params.zero_grad();
        model_.feature_net.params.zero_grad();
        opt_enc_.step(model_.encoder.params);
        opt_gen_.step(model_.generator.params);

        ++step_;
        return rep;
    }

    TrainLog train(const std::vector<FaceRecord>& records, const std::string& out_dir = "") {
        if (records.empty()) throw EmptySource("empty training set");
        TrainLog log;
        std::ofstream log_file;
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            log_file.open(std::filesystem::path(out_dir) / "train_log.ndjson");
        }
        const auto t0 = std::chrono::steady_clock::now();
        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            std::vector<std::size_t> order(records.size());
            std::iota(order.begin(), order.end(), 0);
            Rng shuffle_rng(derive_seed(cfg_.seed, 0xe90c + epoch));
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
                std::vector<FaceRecord> batch;
                for (std::size_t i = start; i < std::min(order.size(), start + cfg_.batch_size); ++i)
                    batch.push_back(records[order[i]]);
                LossReport rep;
                try {
                    rep = train_step(batch);
                } catch (const NonFiniteLoss& e) {
                    throw NonFiniteLoss(std::string(e.what()) + " at step " + std::to_string(step_));
                }
                TrainLogEntry entry;
                entry.step = step_;
                entry.report = rep;
                entry.wall_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                log.push_back(entry);
                if (log_file) log_file << log_entry_json(entry).dump() << "\n";
                if (!out_dir.empty() && cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0)
                    save_checkpoint(model_,
                                    (std::filesystem::path(out_dir) / ("ckpt-" + std::to_string(step_))).string(),
                                    &cfg_.ablation);
            }
        }
        if (!out_dir.empty())
            save_checkpoint(model_, (std::filesystem::path(out_dir) / "final").string(), &cfg_.ablation);
        return log;
    }

    static nlohmann::json log_entry_json(const TrainLogEntry& e) {
        return {{"step", e.step},
                {"recon", e.report.recon},
                {"tv", e.report.tv},
                {"adv_dz", e.report.adv_dz},
                {"adv_dimg", e.report.adv_dimg},
                {"adv_gen_z", e.report.adv_gen_z},
                {"adv_gen_img", e.report.adv_gen_img},
                {"feat", e.report.feat},
                {"total", e.report.total},
                {"wall_ms", e.wall_ms}};
    }

  private:
    static void require_finite(double v, const char* term) {
        if (!std::isfinite(v)) throw NonFiniteLoss(std::string("non-finite loss term: ") + term);
    }

    TrainConfig cfg_;
    CaaeModel<T> model_;
    ImageLoader<T> loader_;
    Adam<T> opt_enc_, opt_gen_, opt_dz_, opt_dimg_;
    Rng prior_rng_;
    long step_ = 0;
};

// Age traversal: encode once, regenerate for every age group with the
// same (z, s).
template <class T>
std::array<Tensor<T>, kAgeGroups> simulate_ages(CaaeModel<T>& model, const Tensor<T>& x, Sex sex,
                                                bool gender_on = true, Tensor<T>* z_out = nullptr) {
    Tensor<T> z = model.encode(x);
    if (z_out) *z_out = z;
    std::array<Tensor<T>, kAgeGroups> out;
    for (int g = 0; g < kAgeGroups; ++g) out[g] = model.generate(z, g, sex, gender_on);
    return out;
}

}  // namespace caae
