#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "caae/losses.hpp"
#include "caae/net.hpp"

namespace caae {

inline nlohmann::json arch_to_json(const ArchConfig& a) {
    return {{"image_size", a.image_size}, {"n_z", a.n_z},   {"base_channels", a.base_channels},
            {"t_l", a.t_l},               {"t_s", a.t_s},   {"hidden_act", a.hidden_act}};
}

inline ArchConfig arch_from_json(const nlohmann::json& j) {
    ArchConfig a;
    a.image_size = j.at("image_size").get<int>();
    a.n_z = j.at("n_z").get<int>();
    a.base_channels = j.at("base_channels").get<int>();
    a.t_l = j.at("t_l").get<int>();
    a.t_s = j.at("t_s").get<int>();
    a.hidden_act = j.at("hidden_act").get<std::string>();
    return a;
}

namespace ckpt_detail {

template <class T>
std::vector<std::pair<std::string, ParamStore<T>*>> named_stores(CaaeModel<T>& m) {
    return {{"enc", &m.encoder.params},
            {"gen", &m.generator.params},
            {"dz", &m.dz.params},
            {"dimg", &m.dimg.net.params},
            {"fm", &m.feature_net.params}};
}

}  // namespace ckpt_detail

// Checkpoint directory layout: manifest.json (array name -> shape/dtype/offset
// plus the architecture block) and weights.bin, raw little-endian f32 values
// concatenated in manifest order.
template <class T>
void save_checkpoint(CaaeModel<T>& model, const std::string& dir, const AblationFlags* flags = nullptr) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format"] = "caae-checkpoint-v1";
    manifest["arch"] = arch_to_json(model.arch);
    if (flags) manifest["ablation"] = {{"gender_on", flags->gender_on}, {"vgg_on", flags->vgg_on}};
    manifest["arrays"] = nlohmann::json::object();

    std::ofstream bin(std::filesystem::path(dir) / "weights.bin", std::ios::binary);
    if (!bin) throw BadConfig("cannot write checkpoint to " + dir);
    std::int64_t offset = 0;
    for (auto& [prefix, store] : ckpt_detail::named_stores(model)) {
        for (auto& [name, e] : store->entries) {
            const std::string full = prefix + "." + name;
            manifest["arrays"][full] = {{"shape", e.shape}, {"dtype", "f32"}, {"byte_offset", offset}};
            for (T v : e.value) {
                const float f = static_cast<float>(v);
                bin.write(reinterpret_cast<const char*>(&f), sizeof(float));
            }
            offset += static_cast<std::int64_t>(e.value.size()) * 4;
        }
    }
    bin.close();
    std::ofstream mf(std::filesystem::path(dir) / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

template <class T = float>
CaaeModel<T> load_checkpoint(const std::string& dir, AblationFlags* flags_out = nullptr) {
    std::ifstream mf(std::filesystem::path(dir) / "manifest.json");
    if (!mf) throw CorruptCheckpoint("missing manifest.json in " + dir);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(mf);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptCheckpoint(std::string("unparsable manifest: ") + e.what());
    }
    if (manifest.value("format", "") != "caae-checkpoint-v1")
        throw CorruptCheckpoint("unknown checkpoint format in " + dir);

    ArchConfig arch;
    try {
        arch = arch_from_json(manifest.at("arch"));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptCheckpoint(std::string("bad arch block: ") + e.what());
    }
    if (flags_out && manifest.contains("ablation")) {
        flags_out->gender_on = manifest["ablation"].value("gender_on", true);
        flags_out->vgg_on = manifest["ablation"].value("vgg_on", true);
    }
    CaaeModel<T> model = init_model<T>(arch, 0);

    std::ifstream bin(std::filesystem::path(dir) / "weights.bin", std::ios::binary);
    if (!bin) throw CorruptCheckpoint("missing weights.bin in " + dir);
    bin.seekg(0, std::ios::end);
    const std::int64_t file_size = bin.tellg();

    for (auto& [prefix, store] : ckpt_detail::named_stores(model)) {
        for (auto& [name, e] : store->entries) {
            const std::string full = prefix + "." + name;
            if (!manifest["arrays"].contains(full))
                throw CorruptCheckpoint("checkpoint missing array " + full + " (arch mismatch?)");
            const auto& entry = manifest["arrays"][full];
            if (entry.at("dtype").get<std::string>() != "f32")
                throw CorruptCheckpoint("unsupported dtype for " + full);
            const auto shape = entry.at("shape").get<std::vector<int>>();
            if (shape != e.shape) throw CorruptCheckpoint("shape mismatch for " + full);
            const std::int64_t off = entry.at("byte_offset").get<std::int64_t>();
            const std::int64_t bytes = static_cast<std::int64_t>(e.value.size()) * 4;
            if (off < 0 || off + bytes > file_size)
                throw CorruptCheckpoint("truncated weights.bin at array " + full);
            bin.seekg(off);
            for (auto& v : e.value) {
                float f;
                bin.read(reinterpret_cast<char*>(&f), sizeof(float));
                v = static_cast<T>(f);
            }
            if (!bin) throw CorruptCheckpoint("read failure at array " + full);
        }
    }
    if (static_cast<std::size_t>(manifest["arrays"].size()) !=
        [&] {
            std::size_t n = 0;
            for (auto& [p, s] : ckpt_detail::named_stores(model)) n += s->entries.size();
            return n;
        }())
        throw CorruptCheckpoint("checkpoint has extra arrays (arch mismatch?)");
    return model;
}

}  // namespace caae
