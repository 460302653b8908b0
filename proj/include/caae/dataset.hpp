#pragma once

#include <algorithm>
#include <cctype>
#include <functional>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "caae/labels.hpp"
#include "caae/renderer.hpp"
#include "caae/rng.hpp"
#include "caae/tensor.hpp"

namespace caae {

struct FaceRecord {
    std::string source;             // file path or synthetic id
    std::uint64_t identity = 0;     // synthetic identity seed; 0 for real images
    int age = 0;
    Sex sex = Sex::male;
    int group = 0;
};

// UTKFace convention: [age]_[gender]_[race]_[timestamp].ext, gender 0 = male.
inline FaceRecord parse_face_filename(const std::string& name) {
    std::string stem = name;
    if (auto dot = stem.rfind('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : stem) {
        if (ch == '_') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(cur);
    if (fields.size() < 3) throw MalformedName("expected at least 3 underscore-separated fields: " + name);
    auto numeric = [](const std::string& f) {
        return !f.empty() && std::all_of(f.begin(), f.end(), [](unsigned char c) { return std::isdigit(c); });
    };
    for (int i = 0; i < 3; ++i)
        if (!numeric(fields[i])) throw MalformedName("non-numeric field in " + name);
    const int age = std::stoi(fields[0]);
    const int gender = std::stoi(fields[1]);
    if (age < 0 || age > 116) throw MalformedName("age outside [0, 116] in " + name);
    if (gender != 0 && gender != 1) throw MalformedName("gender field must be 0 or 1 in " + name);
    FaceRecord r;
    r.source = name;
    r.age = age;
    r.sex = gender == 0 ? Sex::male : Sex::female;
    r.group = age_to_group(age);
    return r;
}

// Bytes [0,255] -> [-1,1] via v/127.5 - 1, then bilinear resize to target.
template <class T = float>
Tensor<T> normalize_image(const std::vector<std::uint8_t>& raw, int h, int w, int c, int target_size) {
    if (c != 3) throw BadChannels("expected 3 channels, got " + std::to_string(c));
    if (static_cast<std::size_t>(h) * w * c != raw.size()) throw ShapeMismatch("byte count mismatch");
    Tensor<T> img({h, w, 3});
    for (std::size_t i = 0; i < raw.size(); ++i)
        img.data[i] = static_cast<T>(raw[i] / 127.5 - 1.0);
    if (h == target_size && w == target_size) return img;

    Tensor<T> out({target_size, target_size, 3});
    const double sy = static_cast<double>(h) / target_size;
    const double sx = static_cast<double>(w) / target_size;
    for (int y = 0; y < target_size; ++y)
        for (int x = 0; x < target_size; ++x) {
            const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, h - 1.0);
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, w - 1.0);
            const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
            const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
            const double wy = fy - y0, wx = fx - x0;
            for (int ch = 0; ch < 3; ++ch) {
                const double v = (1 - wy) * ((1 - wx) * img.at(y0, x0, ch) + wx * img.at(y0, x1, ch)) +
                                 wy * ((1 - wx) * img.at(y1, x0, ch) + wx * img.at(y1, x1, ch));
                out.at(y, x, ch) = static_cast<T>(v);
            }
        }
    return out;
}

template <class T>
std::vector<std::uint8_t> denormalize_image(const Tensor<T>& img) {
    std::vector<std::uint8_t> raw(img.data.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double v = (static_cast<double>(img.data[i]) + 1.0) * 127.5;
        raw[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return raw;
}

enum class Split { train = 0, val = 1, test = 2 };

inline std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        default: return "test";
    }
}

struct DatasetSplits {
    std::vector<FaceRecord> train, val, test;
};

// Deterministic seeded split with exact largest-remainder sizes; every
// populated (sex, group) stratum contributes at least one training record.
inline DatasetSplits build_dataset(std::vector<FaceRecord> records, double f_train, double f_val,
                                   double f_test, std::uint64_t seed) {
    if (records.empty()) throw EmptySource("no records to split");
    if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9) throw BadConfig("split fractions must sum to 1");

    const std::size_t n = records.size();
    const double fr[3] = {f_train, f_val, f_test};
    std::size_t quota[3];
    double frac[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = fr[i] * static_cast<double>(n);
        quota[i] = static_cast<std::size_t>(exact);
        frac[i] = exact - static_cast<double>(quota[i]);
        assigned += quota[i];
    }
    while (assigned < n) {  // largest remainder, ties favor train first
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (frac[i] > frac[best] + 1e-12) best = i;
        ++quota[best];
        frac[best] = -1;
        ++assigned;
    }

    // group records into strata in a deterministic order
    std::sort(records.begin(), records.end(), [](const FaceRecord& a, const FaceRecord& b) {
        if (a.sex != b.sex) return a.sex < b.sex;
        if (a.group != b.group) return a.group < b.group;
        return a.source < b.source;
    });
    Rng rng(derive_seed(seed, 0x5717));
    DatasetSplits out;

    // one record per stratum straight into train
    std::vector<FaceRecord> rest;
    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        while (j < records.size() && records[j].sex == records[i].sex && records[j].group == records[i].group) ++j;
        std::vector<FaceRecord> stratum(records.begin() + i, records.begin() + j);
        std::shuffle(stratum.begin(), stratum.end(), rng);
        if (quota[0] > 0) {
            out.train.push_back(stratum.front());
            --quota[0];
            stratum.erase(stratum.begin());
        }
        rest.insert(rest.end(), stratum.begin(), stratum.end());
        i = j;
    }

    std::shuffle(rest.begin(), rest.end(), rng);
    for (const auto& r : rest) {
        if (quota[0] > 0) {
            out.train.push_back(r);
            --quota[0];
        } else if (quota[1] > 0) {
            out.val.push_back(r);
            --quota[1];
        } else {
            out.test.push_back(r);
        }
    }
    if ((f_val > 0 && out.val.empty()) || (f_test > 0 && out.test.empty()))
        std::cerr << "warning: dataset too small, val/test split is empty\n";
    return out;
}

struct SyntheticSpec {
    int count = 2000;
    int identities = 200;
    std::uint64_t seed = 1;
    int age_min = 0;
    int age_max = 100;
    int size = 64;
};

inline std::string synthetic_source_id(std::uint64_t identity, int age, Sex sex) {
    return "synthetic:" + std::to_string(identity) + ":" + std::to_string(age) + ":" + to_string(sex);
}

// Ages uniform over the range, sexes alternating per identity, ages drawn
// per record; all derived from the spec seed.
inline std::vector<FaceRecord> make_synthetic_records(const SyntheticSpec& spec) {
    if (spec.count <= 0 || spec.identities <= 0) throw BadConfig("synthetic spec needs positive counts");
    Rng rng(derive_seed(spec.seed, 0xda7a));
    std::uniform_int_distribution<int> age_dist(spec.age_min, spec.age_max);
    std::vector<FaceRecord> out;
    out.reserve(spec.count);
    for (int i = 0; i < spec.count; ++i) {
        const int ident_index = i % spec.identities;
        FaceRecord r;
        r.identity = derive_seed(spec.seed, 1000 + ident_index);
        r.sex = (ident_index % 2 == 0) ? Sex::male : Sex::female;
        r.age = age_dist(rng);
        r.group = age_to_group(r.age);
        r.source = synthetic_source_id(r.identity, r.age, r.sex);
        out.push_back(r);
    }
    return out;
}

// A record's pixels: renders synthetic sources, loader callback for files.
template <class T = float>
Tensor<T> record_image(const FaceRecord& r, int image_size,
                       const std::function<Tensor<T>(const std::string&, int)>& file_loader = {}) {
    if (r.source.rfind("synthetic:", 0) == 0) {
        SyntheticFaceParams p;
        p.identity_seed = r.identity;
        p.age = r.age;
        p.sex = r.sex;
        p.size = image_size;
        return render_synthetic_face<T>(p);
    }
    if (!file_loader) throw BadConfig("no file loader provided for " + r.source);
    return file_loader(r.source, image_size);
}

// --- manifest (dataset.json) ---

inline nlohmann::json record_to_json(const FaceRecord& r, const std::string& split) {
    return {{"source", r.source}, {"identity", r.identity}, {"age", r.age},
            {"sex", to_string(r.sex)},  {"group", r.group},    {"split", split}};
}

inline FaceRecord record_from_json(const nlohmann::json& j) {
    FaceRecord r;
    r.source = j.at("source").get<std::string>();
    r.identity = j.at("identity").get<std::uint64_t>();
    r.age = j.at("age").get<int>();
    r.sex = sex_from_string(j.at("sex").get<std::string>());
    r.group = j.at("group").get<int>();
    if (r.group != age_to_group(r.age)) throw BadConfig("manifest group does not match age: " + r.source);
    return r;
}

inline void write_manifest(const DatasetSplits& s, const std::string& path) {
    nlohmann::json j;
    j["records"] = nlohmann::json::array();
    for (const auto& r : s.train) j["records"].push_back(record_to_json(r, "train"));
    for (const auto& r : s.val) j["records"].push_back(record_to_json(r, "val"));
    for (const auto& r : s.test) j["records"].push_back(record_to_json(r, "test"));
    std::ofstream f(path);
    if (!f) throw BadConfig("cannot write manifest: " + path);
    f << j.dump(2) << "\n";
}

inline DatasetSplits read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw BadConfig("cannot read manifest: " + path);
    nlohmann::json j = nlohmann::json::parse(f);
    DatasetSplits s;
    for (const auto& rec : j.at("records")) {
        const std::string split = rec.at("split").get<std::string>();
        FaceRecord r = record_from_json(rec);
        if (split == "train")
            s.train.push_back(r);
        else if (split == "val")
            s.val.push_back(r);
        else
            s.test.push_back(r);
    }
    return s;
}

}  // namespace caae
