#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "caae/dataset.hpp"
#include "caae/losses.hpp"
#include "caae/net.hpp"
#include "caae/optimizer.hpp"
#include "caae/trainer.hpp"

namespace caae {

// ---------- gender classifier C ----------

template <class T>
struct GenderClassifier {
    Sequential<T> net;
    int image_size = 64;

    // logits for {male, female}
    std::array<double, 2> logits(const Tensor<T>& x) {
        Tensor<T> out = net.forward(x);
        return {static_cast<double>(out.data[0]), static_cast<double>(out.data[1])};
    }
    Sex predict(const Tensor<T>& x) {
        auto l = logits(x);
        return l[0] >= l[1] ? Sex::male : Sex::female;
    }
};

template <class T>
GenderClassifier<T> build_gender_classifier(int image_size, std::uint64_t seed) {
    GenderClassifier<T> c;
    c.image_size = image_size;
    auto& net = c.net;
    net.template add<Conv2d<T>>(net.params, "conv0", 3, 8, 4, 2, 1);
    net.template add<LeakyRelu<T>>();
    net.template add<Conv2d<T>>(net.params, "conv1", 8, 16, 4, 2, 1);
    net.template add<LeakyRelu<T>>();
    const int fs = image_size / 4;
    net.template add<Dense<T>>(net.params, "fc", fs * fs * 16, 2);
    net.params.init(seed);
    return c;
}

struct ClassifierTrainOptions {
    int epochs = 3;
    int batch_size = 32;
    float learning_rate = 1e-3f;
    std::uint64_t seed = 7;
};

struct GroupAccuracy {
    long correct = 0;
    long total = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

// Per-(sex, group) held-out accuracy.
struct ClassifierReport {
    std::map<std::pair<int, int>, GroupAccuracy> cells;  // (sex, group) -> counts
    GroupAccuracy overall[2];
};

template <class T>
ClassifierReport train_gender_classifier(GenderClassifier<T>& c, const std::vector<FaceRecord>& train,
                                         const std::vector<FaceRecord>& test,
                                         const ClassifierTrainOptions& opt = {},
                                         const ImageLoader<T>& loader = {}) {
    if (train.empty()) throw EmptySource("classifier training set is empty");
    const bool has_male = std::any_of(train.begin(), train.end(), [](auto& r) { return r.sex == Sex::male; });
    const bool has_female = std::any_of(train.begin(), train.end(), [](auto& r) { return r.sex == Sex::female; });
    if (!has_male || !has_female) throw SingleClassDataset("classifier needs both sexes in training data");

    Adam<T> adam(static_cast<T>(opt.learning_rate));
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        std::vector<std::size_t> order(train.size());
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(opt.seed, 0xc1a5 + epoch));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
            c.net.params.zero_grad();
            const std::size_t end = std::min(order.size(), start + opt.batch_size);
            for (std::size_t i = start; i < end; ++i) {
                const auto& r = train[order[i]];
                Tensor<T> x = record_image<T>(r, c.image_size, loader);
                Tensor<T> out = c.net.forward(x);
                // softmax cross-entropy, gradient p - onehot
                const double m = std::max(out.data[0], out.data[1]);
                const double e0 = std::exp(out.data[0] - m), e1 = std::exp(out.data[1] - m);
                const double p0 = e0 / (e0 + e1);
                Tensor<T> d({2});
                const int label = static_cast<int>(r.sex);
                d.data[0] = static_cast<T>((p0 - (label == 0 ? 1.0 : 0.0)) / (end - start));
                d.data[1] = static_cast<T>(((1 - p0) - (label == 1 ? 1.0 : 0.0)) / (end - start));
                c.net.backward(d);
            }
            adam.step(c.net.params);
        }
    }

    ClassifierReport report;
    for (const auto& r : test) {
        Tensor<T> x = record_image<T>(r, c.image_size, loader);
        const bool ok = c.predict(x) == r.sex;
        auto& cell = report.cells[{static_cast<int>(r.sex), r.group}];
        cell.total++;
        report.overall[static_cast<int>(r.sex)].total++;
        if (ok) {
            cell.correct++;
            report.overall[static_cast<int>(r.sex)].correct++;
        }
    }
    return report;
}

// ---------- FaceNet stand-in: contrastive identity embedding ----------

template <class T>
struct EmbeddingNet {
    Sequential<T> net;
    int image_size = 64;
    int dim = 32;

    Tensor<T> embed(const Tensor<T>& x) { return net.forward(x); }
};

template <class T>
EmbeddingNet<T> build_embedding_net(int image_size, std::uint64_t seed) {
    EmbeddingNet<T> e;
    e.image_size = image_size;
    auto& net = e.net;
    net.template add<Conv2d<T>>(net.params, "conv0", 3, 8, 4, 2, 1);
    net.template add<LeakyRelu<T>>();
    net.template add<Conv2d<T>>(net.params, "conv1", 8, 16, 4, 2, 1);
    net.template add<LeakyRelu<T>>();
    net.template add<Conv2d<T>>(net.params, "conv2", 16, 32, 4, 2, 1);
    net.template add<LeakyRelu<T>>();
    const int fs = image_size / 8;
    net.template add<Dense<T>>(net.params, "fc", fs * fs * 32, e.dim);
    net.params.init(seed);
    return e;
}

struct EmbeddingTrainOptions {
    int steps = 400;
    int batch_pairs = 16;  // half same-identity, half different
    float learning_rate = 1e-3f;
    double margin = 2.0;
    std::uint64_t seed = 9;
};

// Contrastive objective: pull same-identity pairs together, push different
// identities beyond the margin.
template <class T>
void train_embedding_net(EmbeddingNet<T>& net, const std::vector<FaceRecord>& records,
                         const EmbeddingTrainOptions& opt = {}, const ImageLoader<T>& loader = {}) {
    std::map<std::uint64_t, std::vector<const FaceRecord*>> by_identity;
    for (const auto& r : records) by_identity[r.identity].push_back(&r);
    if (by_identity.size() < 2) throw SingleIdentityDataset("embedding training needs >= 2 identities");

    std::vector<std::uint64_t> idents;
    for (auto& [id, v] : by_identity) idents.push_back(id);
    std::vector<std::uint64_t> multi;  // identities with >= 2 records
    for (auto& [id, v] : by_identity)
        if (v.size() >= 2) multi.push_back(id);

    Rng rng(derive_seed(opt.seed, 0xe3bd));
    Adam<T> adam(static_cast<T>(opt.learning_rate));
    std::uniform_int_distribution<std::size_t> ident_pick(0, idents.size() - 1);

    for (int step = 0; step < opt.steps; ++step) {
        net.net.params.zero_grad();
        for (int p = 0; p < opt.batch_pairs; ++p) {
            const bool positive = (p % 2 == 0) && !multi.empty();
            const FaceRecord *a = nullptr, *b = nullptr;
            if (positive) {
                const auto& group = by_identity[multi[rng() % multi.size()]];
                const std::size_t i = rng() % group.size();
                std::size_t j = rng() % (group.size() - 1);
                if (j >= i) ++j;
                a = group[i];
                b = group[j];
            } else {
                std::size_t i = ident_pick(rng);
                std::size_t j = ident_pick(rng);
                while (j == i) j = ident_pick(rng);
                const auto& ga = by_identity[idents[i]];
                const auto& gb = by_identity[idents[j]];
                a = ga[rng() % ga.size()];
                b = gb[rng() % gb.size()];
            }
            Tensor<T> xa = record_image<T>(*a, net.image_size, loader);
            Tensor<T> xb = record_image<T>(*b, net.image_size, loader);
            Tensor<T> ea = net.embed(xa);
            // second forward overwrites caches; backprop one side per pass
            Tensor<T> eb_detached = net.embed(xb);

            double d2 = 0;
            for (int k = 0; k < net.dim; ++k) {
                const double diff = ea.data[k] - eb_detached.data[k];
                d2 += diff * diff;
            }
            const double d = std::sqrt(std::max(d2, 1e-12));
            Tensor<T> grad_b({net.dim});
            Tensor<T> grad_a({net.dim});
            const double scale = 1.0 / opt.batch_pairs;
            if (positive) {
                for (int k = 0; k < net.dim; ++k) {
                    const double g = 2.0 * (ea.data[k] - eb_detached.data[k]) * scale;
                    grad_a.data[k] = static_cast<T>(g);
                    grad_b.data[k] = static_cast<T>(-g);
                }
            } else if (d < opt.margin) {
                const double coeff = -2.0 * (opt.margin - d) / d * scale;
                for (int k = 0; k < net.dim; ++k) {
                    const double g = coeff * (ea.data[k] - eb_detached.data[k]);
                    grad_a.data[k] = static_cast<T>(g);
                    grad_b.data[k] = static_cast<T>(-g);
                }
            }
            net.net.backward(grad_b);  // caches currently hold xb
            net.embed(xa);
            net.net.backward(grad_a);
        }
        adam.step(net.net.params);
    }
}

// ---------- metrics ----------

template <class T>
double embedding_distance(const std::vector<T>& e1, const std::vector<T>& e2) {
    if (e1.size() != e2.size()) throw ShapeMismatch("embedding dimensions differ");
    double acc = 0;
    for (std::size_t i = 0; i < e1.size(); ++i) {
        const double d = static_cast<double>(e1[i]) - static_cast<double>(e2[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Fraction of distances strictly below the threshold.
inline double fr_score(const std::vector<double>& distances, double threshold) {
    if (distances.empty()) throw EmptyInput("fr_score needs at least one distance");
    long below = 0;
    for (double d : distances)
        if (d < threshold) ++below;
    return static_cast<double>(below) / static_cast<double>(distances.size());
}

struct DistanceStats {
    double min = 0, max = 0, mean = 0, sd = 0;
    std::array<double, 9> percentiles{};  // p10 .. p90 by 10
};

// Sample SD (n-1); percentiles by linear interpolation between closest ranks.
inline DistanceStats distance_stats(std::vector<double> distances) {
    if (distances.size() < 2) throw TooFewValues("distance_stats needs >= 2 values");
    std::sort(distances.begin(), distances.end());
    DistanceStats s;
    s.min = distances.front();
    s.max = distances.back();
    const std::size_t n = distances.size();
    double acc = 0;
    for (double d : distances) acc += d;
    s.mean = acc / static_cast<double>(n);
    double var = 0;
    for (double d : distances) var += (d - s.mean) * (d - s.mean);
    s.sd = std::sqrt(var / static_cast<double>(n - 1));
    for (int p = 1; p <= 9; ++p) {
        const double rank = (p / 10.0) * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(rank);
        const double w = rank - static_cast<double>(lo);
        s.percentiles[p - 1] =
            (lo + 1 < n) ? distances[lo] * (1 - w) + distances[lo + 1] * w : distances[lo];
    }
    return s;
}

// Gender-score table: absent cells stay absent, never 0.
struct GenderScoreTable {
    std::map<std::pair<int, int>, GroupAccuracy> cells;  // (sex, group)

    std::optional<double> accuracy(Sex sex, int group) const {
        auto it = cells.find({static_cast<int>(sex), group});
        if (it == cells.end() || it->second.total == 0) return std::nullopt;
        return it->second.accuracy();
    }
    // unweighted mean over populated groups
    std::optional<double> average(Sex sex) const {
        double acc = 0;
        int count = 0;
        for (int g = 0; g < kAgeGroups; ++g)
            if (auto a = accuracy(sex, g)) {
                acc += *a;
                ++count;
            }
        if (!count) return std::nullopt;
        return acc / count;
    }
};

struct ScoredImage {
    Sex expected;
    Sex predicted;
    int group;
};

inline GenderScoreTable gender_score(const std::vector<ScoredImage>& scored) {
    if (scored.empty()) throw EmptyInput("gender_score needs at least one image");
    GenderScoreTable t;
    for (const auto& s : scored) {
        auto& cell = t.cells[{static_cast<int>(s.expected), s.group}];
        cell.total++;
        if (s.predicted == s.expected) cell.correct++;
    }
    return t;
}

template <class T>
GenderScoreTable gender_score(GenderClassifier<T>& c,
                              const std::vector<std::pair<Tensor<T>, Sex>>& generated,
                              const std::vector<int>& group_of) {
    if (generated.empty()) throw EmptyInput("gender_score needs at least one image");
    if (generated.size() != group_of.size()) throw ShapeMismatch("generated/group lists differ in length");
    std::vector<ScoredImage> scored;
    scored.reserve(generated.size());
    for (std::size_t i = 0; i < generated.size(); ++i)
        scored.push_back({generated[i].second, c.predict(generated[i].first), group_of[i]});
    return gender_score(scored);
}

inline double percent_gain(double baseline, double value) {
    return (value - baseline) / baseline * 100.0;
}

// ---------- four-model evaluation ----------

struct ModelEval {
    std::string name;
    AblationFlags flags;
    GenderScoreTable gender;
    DistanceStats stats;
    std::map<double, double> fr;  // threshold -> accuracy
    std::vector<double> distances;
};

struct EvalReport {
    std::vector<ModelEval> models;
    std::vector<double> thresholds;
    std::string distance_pooling = "all_groups";  // one distance per (input, group) pair
};

// Runs simulate_ages for every model over every input, scores gender per
// (sex, group), pools input-vs-simulation embedding distances across all ten
// groups, and derives FR scores per threshold.
template <class T>
EvalReport evaluate_models(std::vector<std::pair<std::string, AblationFlags>> specs,
                           std::vector<CaaeModel<T>*> models, const std::vector<FaceRecord>& eval_inputs,
                           GenderClassifier<T>& classifier, EmbeddingNet<T>& embedder,
                           std::vector<double> thresholds, const ImageLoader<T>& loader = {}) {
    if (models.empty() || specs.size() != models.size()) throw BadConfig("model/spec count mismatch");
    if (eval_inputs.empty()) throw EmptyInput("no evaluation inputs");
    for (auto* m : models)
        if (m->arch.image_size != models[0]->arch.image_size || m->arch.n_z != models[0]->arch.n_z)
            throw BadConfig("all checkpoints must share image_size and n_z");
    std::sort(thresholds.begin(), thresholds.end());

    EvalReport report;
    report.thresholds = thresholds;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
        ModelEval me;
        me.name = specs[mi].first;
        me.flags = specs[mi].second;
        std::vector<ScoredImage> scored;
        for (const auto& input : eval_inputs) {
            Tensor<T> x = record_image<T>(input, models[mi]->arch.image_size, loader);
            Tensor<T> input_emb = embedder.embed(x);
            std::vector<T> ie(input_emb.data.begin(), input_emb.data.end());
            auto sims = simulate_ages(*models[mi], x, input.sex, me.flags.gender_on);
            for (int g = 0; g < kAgeGroups; ++g) {
                scored.push_back({input.sex, classifier.predict(sims[g]), g});
                Tensor<T> sim_emb = embedder.embed(sims[g]);
                std::vector<T> se(sim_emb.data.begin(), sim_emb.data.end());
                me.distances.push_back(embedding_distance(ie, se));
            }
        }
        me.gender = gender_score(scored);
        me.stats = distance_stats(me.distances);
        for (double th : thresholds) me.fr[th] = fr_score(me.distances, th);
        report.models.push_back(std::move(me));
    }
    return report;
}

}  // namespace caae
