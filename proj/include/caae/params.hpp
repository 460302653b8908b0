#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "caae/errors.hpp"
#include "caae/rng.hpp"
#include "caae/tensor.hpp"

namespace caae {

// Named parameter arrays for one network. std::map keeps iteration order
// stable, which the checkpoint format and determinism tests rely on.
template <class T>
struct ParamStore {
    struct Entry {
        std::vector<int> shape;
        std::vector<T> value;
        std::vector<T> grad;
    };

    std::map<std::string, Entry> entries;

    Entry& add(const std::string& name, std::vector<int> shape) {
        auto [it, fresh] = entries.try_emplace(name);
        if (!fresh) throw BadConfig("duplicate parameter name: " + name);
        Entry& e = it->second;
        std::int64_t n = Tensor<T>::count(shape);
        e.shape = std::move(shape);
        e.value.assign(n, T(0));
        e.grad.assign(n, T(0));
        return e;
    }

    Entry& get(const std::string& name) {
        auto it = entries.find(name);
        if (it == entries.end()) throw BadConfig("unknown parameter: " + name);
        return it->second;
    }
    const Entry& get(const std::string& name) const {
        auto it = entries.find(name);
        if (it == entries.end()) throw BadConfig("unknown parameter: " + name);
        return it->second;
    }

    void zero_grad() {
        for (auto& [name, e] : entries) std::fill(e.grad.begin(), e.grad.end(), T(0));
    }

    std::int64_t parameter_count() const {
        std::int64_t n = 0;
        for (const auto& [name, e] : entries) n += static_cast<std::int64_t>(e.value.size());
        return n;
    }

    bool all_finite() const {
        for (const auto& [name, e] : entries)
            for (T v : e.value)
                if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    // Fan-in scaled zero-mean init for weights ("*.W"); biases stay zero.
    // fan_in = product of all but the last shape dimension.
    void init(std::uint64_t seed) {
        Rng rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        for (auto& [name, e] : entries) {
            if (name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0) continue;
            std::int64_t fan_in = 1;
            for (std::size_t i = 0; i + 1 < e.shape.size(); ++i) fan_in *= e.shape[i];
            double scale = std::sqrt(1.0 / static_cast<double>(fan_in));
            for (auto& v : e.value) v = static_cast<T>(g(rng) * scale);
        }
    }
};

}  // namespace caae
