#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "caae/dataset.hpp"
#include "caae/trainer.hpp"

namespace caae {

struct DataSpec {
    std::string dir;                        // UTKFace-style image directory
    std::optional<SyntheticSpec> synthetic; // or generated faces
};

struct RunConfig {
    TrainConfig train;
    DataSpec data;
    double split_train = 0.70, split_val = 0.15, split_test = 0.15;
    std::vector<double> thresholds{1.6, 2.0, 2.5};
    bool exclude_eval_inputs = true;
    std::string out_dir = "runs";
};

namespace config_detail {

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw BadConfig(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw BadConfig("unknown key '" + key + "' in " + where);
}

template <class V>
void read(const nlohmann::json& j, const char* key, V& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<V>();
    } catch (const nlohmann::json::exception&) {
        throw BadConfig(std::string("bad value for '") + key + "'");
    }
}

}  // namespace config_detail

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
    config_detail::check_keys(j, {"count", "identities", "seed", "age_range", "size"}, "synthetic");
    SyntheticSpec s;
    config_detail::read(j, "count", s.count);
    config_detail::read(j, "identities", s.identities);
    config_detail::read(j, "seed", s.seed);
    config_detail::read(j, "size", s.size);
    if (j.contains("age_range")) {
        auto r = j.at("age_range").get<std::vector<int>>();
        if (r.size() != 2 || r[0] > r[1]) throw BadConfig("age_range must be [min, max]");
        s.age_min = r[0];
        s.age_max = r[1];
    }
    return s;
}

// Full run configuration; validated strictly before any work starts
// (schema published in docs/run_config.schema.json).
inline RunConfig run_config_from_json(const nlohmann::json& j) {
    config_detail::check_keys(
        j,
        {"image_size", "n_z", "base_channels", "t_l", "t_s", "hidden_act", "batch_size", "epochs",
         "learning_rate", "seed", "lambda", "gamma", "phi", "gender_on", "vgg_on", "checkpoint_every",
         "saturating_gan", "data", "split", "thresholds", "exclude_eval_inputs", "out_dir"},
        "config");
    using config_detail::read;
    RunConfig c;
    read(j, "image_size", c.train.arch.image_size);
    read(j, "n_z", c.train.arch.n_z);
    read(j, "base_channels", c.train.arch.base_channels);
    read(j, "t_l", c.train.arch.t_l);
    read(j, "t_s", c.train.arch.t_s);
    read(j, "hidden_act", c.train.arch.hidden_act);
    read(j, "batch_size", c.train.batch_size);
    read(j, "epochs", c.train.epochs);
    read(j, "learning_rate", c.train.learning_rate);
    read(j, "seed", c.train.seed);
    read(j, "lambda", c.train.weights.lambda);
    read(j, "gamma", c.train.weights.gamma);
    read(j, "phi", c.train.weights.phi);
    read(j, "gender_on", c.train.ablation.gender_on);
    read(j, "vgg_on", c.train.ablation.vgg_on);
    read(j, "checkpoint_every", c.train.checkpoint_every);
    read(j, "saturating_gan", c.train.saturating_gan);
    read(j, "exclude_eval_inputs", c.exclude_eval_inputs);
    read(j, "out_dir", c.out_dir);
    read(j, "thresholds", c.thresholds);
    if (j.contains("split")) {
        auto s = j.at("split").get<std::vector<double>>();
        if (s.size() != 3) throw BadConfig("split must be [train, val, test]");
        c.split_train = s[0];
        c.split_val = s[1];
        c.split_test = s[2];
    }
    if (j.contains("data")) {
        config_detail::check_keys(j.at("data"), {"dir", "synthetic"}, "data");
        read(j.at("data"), "dir", c.data.dir);
        if (j.at("data").contains("synthetic"))
            c.data.synthetic = synthetic_spec_from_json(j.at("data").at("synthetic"));
    }
    if (c.train.weights.lambda < 0 || c.train.weights.gamma < 0 || c.train.weights.phi < 0)
        throw BadConfig("loss weights must be non-negative");
    c.train.validate();
    if (c.data.synthetic && c.data.synthetic->size != c.train.arch.image_size)
        c.data.synthetic->size = c.train.arch.image_size;
    if (c.thresholds.empty()) throw BadConfig("thresholds must be non-empty");
    return c;
}

inline nlohmann::json run_config_to_json(const RunConfig& c) {
    nlohmann::json j = {{"image_size", c.train.arch.image_size},
                        {"n_z", c.train.arch.n_z},
                        {"base_channels", c.train.arch.base_channels},
                        {"t_l", c.train.arch.t_l},
                        {"t_s", c.train.arch.t_s},
                        {"hidden_act", c.train.arch.hidden_act},
                        {"batch_size", c.train.batch_size},
                        {"epochs", c.train.epochs},
                        {"learning_rate", c.train.learning_rate},
                        {"seed", c.train.seed},
                        {"lambda", c.train.weights.lambda},
                        {"gamma", c.train.weights.gamma},
                        {"phi", c.train.weights.phi},
                        {"gender_on", c.train.ablation.gender_on},
                        {"vgg_on", c.train.ablation.vgg_on},
                        {"checkpoint_every", c.train.checkpoint_every},
                        {"saturating_gan", c.train.saturating_gan},
                        {"split", {c.split_train, c.split_val, c.split_test}},
                        {"thresholds", c.thresholds},
                        {"exclude_eval_inputs", c.exclude_eval_inputs},
                        {"out_dir", c.out_dir}};
    nlohmann::json data = nlohmann::json::object();
    if (!c.data.dir.empty()) data["dir"] = c.data.dir;
    if (c.data.synthetic) {
        const auto& s = *c.data.synthetic;
        data["synthetic"] = {{"count", s.count},
                             {"identities", s.identities},
                             {"seed", s.seed},
                             {"age_range", {s.age_min, s.age_max}},
                             {"size", s.size}};
    }
    j["data"] = data;
    return j;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw BadConfig("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw BadConfig(std::string("config is not valid JSON: ") + e.what());
    }
    return run_config_from_json(j);
}

}  // namespace caae
