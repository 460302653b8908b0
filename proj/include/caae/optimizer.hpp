#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "caae/params.hpp"

namespace caae {

// Adam with beta1 = 0.5, the usual choice for adversarial training.
template <class T>
class Adam {
  public:
    explicit Adam(T lr, T beta1 = T(0.5), T beta2 = T(0.999), T eps = T(1e-8))
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ParamStore<T>& params) {
        ++t_;
        const double b1t = 1.0 - std::pow(static_cast<double>(beta1_), t_);
        const double b2t = 1.0 - std::pow(static_cast<double>(beta2_), t_);
        for (auto& [name, e] : params.entries) {
            auto& m = m_[name];
            auto& v = v_[name];
            if (m.empty()) {
                m.assign(e.value.size(), T(0));
                v.assign(e.value.size(), T(0));
            }
            for (std::size_t i = 0; i < e.value.size(); ++i) {
                const T g = e.grad[i];
                m[i] = beta1_ * m[i] + (T(1) - beta1_) * g;
                v[i] = beta2_ * v[i] + (T(1) - beta2_) * g * g;
                const T mhat = m[i] / static_cast<T>(b1t);
                const T vhat = v[i] / static_cast<T>(b2t);
                e.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

    T learning_rate() const { return lr_; }

  private:
    T lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::map<std::string, std::vector<T>> m_, v_;
};

}  // namespace caae
