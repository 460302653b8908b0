#pragma once

#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "caae/config.hpp"
#include "caae/eval.hpp"
#include "caae/report.hpp"
#include "caae/trainer.hpp"

namespace caae {

struct AblationVariant {
    std::string name;
    AblationFlags flags;
};

inline std::vector<AblationVariant> ablation_matrix() {
    return {{"CAAE", {false, false}},
            {"CAAE-G", {true, false}},
            {"CAAE-V", {false, true}},
            {"CAAE-GV", {true, true}}};
}

// Records from an image directory named per the UTKFace convention.
inline std::vector<FaceRecord> records_from_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw EmptySource("not a directory: " + dir);
    std::vector<FaceRecord> records;
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext != ".png" && ext != ".jpg" && ext != ".jpeg" && ext != ".PNG" && ext != ".JPG") continue;
        names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    for (const auto& name : names) {
        FaceRecord r = parse_face_filename(name);
        r.source = (fs::path(dir) / name).string();
        records.push_back(r);
    }
    if (records.empty()) throw EmptySource("no usable images in " + dir);
    return records;
}

inline std::vector<FaceRecord> records_from_config(const RunConfig& cfg) {
    if (cfg.data.synthetic) {
        SyntheticSpec spec = *cfg.data.synthetic;
        spec.size = cfg.train.arch.image_size;
        return make_synthetic_records(spec);
    }
    if (!cfg.data.dir.empty()) return records_from_directory(cfg.data.dir);
    throw BadConfig("config has no data source (data.dir or data.synthetic)");
}

// Held-out 0-5 year synthetic eval inputs; identities disjoint from every
// training identity when exclude_eval_inputs is set.
inline std::vector<FaceRecord> make_eval_inputs(const RunConfig& cfg, int per_sex) {
    if (!cfg.data.synthetic) throw BadConfig("held-out eval inputs require a synthetic data source");
    const std::uint64_t root = cfg.exclude_eval_inputs
                                   ? derive_seed(cfg.data.synthetic->seed, 0xea17)
                                   : cfg.data.synthetic->seed;
    Rng rng(derive_seed(root, 0xbabe));
    std::uniform_int_distribution<int> age_dist(0, 5);
    std::vector<FaceRecord> out;
    for (int sex = 0; sex < 2; ++sex)
        for (int i = 0; i < per_sex; ++i) {
            FaceRecord r;
            r.identity = cfg.exclude_eval_inputs ? derive_seed(root, 5000 + sex * per_sex + i)
                                                 : derive_seed(root, 1000 + (2 * i + sex) %
                                                                              cfg.data.synthetic->identities);
            r.sex = static_cast<Sex>(sex);
            r.age = age_dist(rng);
            r.group = 0;
            r.source = synthetic_source_id(r.identity, r.age, r.sex);
            out.push_back(r);
        }
    return out;
}

template <class T = float>
CaaeModel<T> train_variant(const RunConfig& cfg, const AblationVariant& variant,
                           const std::vector<FaceRecord>& train_records, const std::string& out_dir,
                           const ImageLoader<T>& loader = {}) {
    TrainConfig tc = cfg.train;
    tc.ablation = variant.flags;
    CaaeModel<T> model = init_model<T>(tc.arch, tc.seed);
    Trainer<T> trainer(tc, std::move(model), loader);
    trainer.train(train_records, out_dir);
    return std::move(trainer.model());
}

// Four trainings sharing seed and data, differing only in the ablation flags.
template <class T = float>
std::vector<std::string> run_ablation(const RunConfig& cfg, const std::vector<FaceRecord>& train_records,
                                      const std::string& out_root, bool parallel = false,
                                      const ImageLoader<T>& loader = {}) {
    std::vector<std::string> dirs;
    const auto variants = ablation_matrix();
    for (const auto& v : variants) dirs.push_back((std::filesystem::path(out_root) / v.name).string());
    auto run_one = [&](std::size_t i) { train_variant<T>(cfg, variants[i], train_records, dirs[i], loader); };
    if (parallel) {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < variants.size(); ++i) threads.emplace_back(run_one, i);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t i = 0; i < variants.size(); ++i) run_one(i);
    }
    return dirs;
}

template <class T = float>
struct EvalTools {
    GenderClassifier<T> classifier;
    EmbeddingNet<T> embedder;
    ClassifierReport classifier_report;
};

template <class T = float>
EvalTools<T> build_eval_tools(const RunConfig& cfg, const DatasetSplits& splits,
                              const ImageLoader<T>& loader = {}) {
    EvalTools<T> tools{build_gender_classifier<T>(cfg.train.arch.image_size, derive_seed(cfg.train.seed, 0xc1f)),
                       build_embedding_net<T>(cfg.train.arch.image_size, derive_seed(cfg.train.seed, 0xe3b))};
    ClassifierTrainOptions copt;
    copt.seed = derive_seed(cfg.train.seed, 0xc2);
    const auto& test = splits.test.empty() ? splits.train : splits.test;
    tools.classifier_report = train_gender_classifier(tools.classifier, splits.train, test, copt, loader);
    EmbeddingTrainOptions eopt;
    eopt.seed = derive_seed(cfg.train.seed, 0xe2);
    train_embedding_net(tools.embedder, splits.train, eopt, loader);
    return tools;
}

}  // namespace caae
