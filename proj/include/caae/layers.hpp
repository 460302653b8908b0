#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "caae/params.hpp"
#include "caae/tensor.hpp"

namespace caae {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<Mat<T>>;
template <class T>
using CMatMap = Eigen::Map<const Mat<T>>;

struct ConvGeom {
    int in_h, in_w, in_c;
    int k, stride, pad;
    int out_h, out_w;

    ConvGeom(int ih, int iw, int ic, int kk, int s, int p)
        : in_h(ih), in_w(iw), in_c(ic), k(kk), stride(s), pad(p) {
        out_h = (ih + 2 * p - kk) / s + 1;
        out_w = (iw + 2 * p - kk) / s + 1;
    }
};

// Patch matrix of shape (out_h*out_w) x (k*k*in_c); zero padding.
template <class T>
Mat<T> im2col(const Tensor<T>& in, const ConvGeom& g) {
    Mat<T> cols = Mat<T>::Zero(g.out_h * g.out_w, g.k * g.k * g.in_c);
    for (int oy = 0; oy < g.out_h; ++oy)
        for (int ox = 0; ox < g.out_w; ++ox) {
            const int row = oy * g.out_w + ox;
            for (int ky = 0; ky < g.k; ++ky) {
                const int iy = oy * g.stride + ky - g.pad;
                if (iy < 0 || iy >= g.in_h) continue;
                for (int kx = 0; kx < g.k; ++kx) {
                    const int ix = ox * g.stride + kx - g.pad;
                    if (ix < 0 || ix >= g.in_w) continue;
                    const T* src = &in.data[(static_cast<std::size_t>(iy) * g.in_w + ix) * g.in_c];
                    T* dst = &cols(row, (ky * g.k + kx) * g.in_c);
                    for (int c = 0; c < g.in_c; ++c) dst[c] = src[c];
                }
            }
        }
    return cols;
}

// Adjoint of im2col: scatter-add patch rows back into an image.
template <class T>
Tensor<T> col2im(const Mat<T>& cols, const ConvGeom& g) {
    Tensor<T> out({g.in_h, g.in_w, g.in_c});
    for (int oy = 0; oy < g.out_h; ++oy)
        for (int ox = 0; ox < g.out_w; ++ox) {
            const int row = oy * g.out_w + ox;
            for (int ky = 0; ky < g.k; ++ky) {
                const int iy = oy * g.stride + ky - g.pad;
                if (iy < 0 || iy >= g.in_h) continue;
                for (int kx = 0; kx < g.k; ++kx) {
                    const int ix = ox * g.stride + kx - g.pad;
                    if (ix < 0 || ix >= g.in_w) continue;
                    const T* src = &cols(row, (ky * g.k + kx) * g.in_c);
                    T* dst = &out.data[(static_cast<std::size_t>(iy) * g.in_w + ix) * g.in_c];
                    for (int c = 0; c < g.in_c; ++c) dst[c] += src[c];
                }
            }
        }
    return out;
}

template <class T>
class Layer {
  public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x) = 0;
    // Accumulates parameter gradients, returns gradient w.r.t. the input.
    virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
    // Called after the owning store moved; parameterless layers ignore it.
    virtual void rebind(ParamStore<T>&) {}
};

// k x k convolution, weight shape [k, k, in_c, out_c], bias [out_c].
template <class T>
class Conv2d final : public Layer<T> {
  public:
    Conv2d(ParamStore<T>& store, std::string name, int in_c, int out_c, int k, int stride, int pad)
        : store_(&store), name_(std::move(name)), in_c_(in_c), out_c_(out_c), k_(k), stride_(stride), pad_(pad) {
        store.add(name_ + ".W", {k, k, in_c, out_c});
        store.add(name_ + ".b", {out_c});
    }

    Tensor<T> forward(const Tensor<T>& x) override {
        if (static_cast<int>(x.shape.size()) != 3 || x.shape[2] != in_c_)
            throw ShapeMismatch(name_ + ": bad input shape");
        geom_ = std::make_unique<ConvGeom>(x.shape[0], x.shape[1], in_c_, k_, stride_, pad_);
        cols_ = im2col(x, *geom_);
        const auto& W = store_->get(name_ + ".W");
        const auto& b = store_->get(name_ + ".b");
        CMatMap<T> Wm(W.value.data(), k_ * k_ * in_c_, out_c_);
        Tensor<T> y({geom_->out_h, geom_->out_w, out_c_});
        MatMap<T> Ym(y.data.data(), geom_->out_h * geom_->out_w, out_c_);
        Ym.noalias() = cols_ * Wm;
        for (int r = 0; r < Ym.rows(); ++r)
            for (int c = 0; c < out_c_; ++c) Ym(r, c) += b.value[c];
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        auto& W = store_->get(name_ + ".W");
        auto& b = store_->get(name_ + ".b");
        CMatMap<T> dYm(dy.data.data(), geom_->out_h * geom_->out_w, out_c_);
        CMatMap<T> Wm(W.value.data(), k_ * k_ * in_c_, out_c_);
        MatMap<T> dWm(W.grad.data(), k_ * k_ * in_c_, out_c_);
        dWm.noalias() += cols_.transpose() * dYm;
        for (int c = 0; c < out_c_; ++c) b.grad[c] += dYm.col(c).sum();
        Mat<T> dcols = dYm * Wm.transpose();
        return col2im(dcols, *geom_);
    }

    void rebind(ParamStore<T>& s) override { store_ = &s; }

  private:
    ParamStore<T>* store_;
    std::string name_;
    int in_c_, out_c_, k_, stride_, pad_;
    std::unique_ptr<ConvGeom> geom_;
    Mat<T> cols_;
};

// Transposed k x k convolution (exact adjoint of Conv2d's data path).
// Weight shape [k, k, out_c, in_c]: the kernel of the conv that would map
// the output of this layer back to its input.
template <class T>
class ConvTranspose2d final : public Layer<T> {
  public:
    ConvTranspose2d(ParamStore<T>& store, std::string name, int in_c, int out_c, int k, int stride, int pad)
        : store_(&store), name_(std::move(name)), in_c_(in_c), out_c_(out_c), k_(k), stride_(stride), pad_(pad) {
        store.add(name_ + ".W", {k, k, out_c, in_c});
        store.add(name_ + ".b", {out_c});
    }

    Tensor<T> forward(const Tensor<T>& x) override {
        if (static_cast<int>(x.shape.size()) != 3 || x.shape[2] != in_c_)
            throw ShapeMismatch(name_ + ": bad input shape");
        in_h_ = x.shape[0];
        in_w_ = x.shape[1];
        const int oh = (in_h_ - 1) * stride_ + k_ - 2 * pad_;
        const int ow = (in_w_ - 1) * stride_ + k_ - 2 * pad_;
        geom_ = std::make_unique<ConvGeom>(oh, ow, out_c_, k_, stride_, pad_);
        x_mat_ = CMatMap<T>(x.data.data(), in_h_ * in_w_, in_c_);
        const auto& W = store_->get(name_ + ".W");
        const auto& b = store_->get(name_ + ".b");
        CMatMap<T> Wm(W.value.data(), k_ * k_ * out_c_, in_c_);
        Mat<T> cols = x_mat_ * Wm.transpose();
        Tensor<T> y = col2im(cols, *geom_);
        for (int i = 0; i < oh * ow; ++i)
            for (int c = 0; c < out_c_; ++c) y.data[static_cast<std::size_t>(i) * out_c_ + c] += b.value[c];
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        auto& W = store_->get(name_ + ".W");
        auto& b = store_->get(name_ + ".b");
        Mat<T> dcols = im2col(dy, *geom_);
        CMatMap<T> Wm(W.value.data(), k_ * k_ * out_c_, in_c_);
        MatMap<T> dWm(W.grad.data(), k_ * k_ * out_c_, in_c_);
        dWm.noalias() += dcols.transpose() * x_mat_;
        const int n = geom_->in_h * geom_->in_w;
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < out_c_; ++c) b.grad[c] += dy.data[static_cast<std::size_t>(i) * out_c_ + c];
        Tensor<T> dx({in_h_, in_w_, in_c_});
        MatMap<T> dXm(dx.data.data(), in_h_ * in_w_, in_c_);
        dXm.noalias() = dcols * Wm;
        return dx;
    }

    void rebind(ParamStore<T>& s) override { store_ = &s; }

  private:
    ParamStore<T>* store_;
    std::string name_;
    int in_c_, out_c_, k_, stride_, pad_;
    int in_h_ = 0, in_w_ = 0;
    std::unique_ptr<ConvGeom> geom_;
    Mat<T> x_mat_;
};

// Fully connected; flattens whatever shape it receives.
template <class T>
class Dense final : public Layer<T> {
  public:
    Dense(ParamStore<T>& store, std::string name, int in_dim, int out_dim)
        : store_(&store), name_(std::move(name)), in_dim_(in_dim), out_dim_(out_dim) {
        store.add(name_ + ".W", {in_dim, out_dim});
        store.add(name_ + ".b", {out_dim});
    }

    Tensor<T> forward(const Tensor<T>& x) override {
        if (x.size() != in_dim_) throw ShapeMismatch(name_ + ": bad input size");
        x_ = x;
        const auto& W = store_->get(name_ + ".W");
        const auto& b = store_->get(name_ + ".b");
        CMatMap<T> Wm(W.value.data(), in_dim_, out_dim_);
        CMatMap<T> Xm(x.data.data(), 1, in_dim_);
        Tensor<T> y({out_dim_});
        MatMap<T> Ym(y.data.data(), 1, out_dim_);
        Ym.noalias() = Xm * Wm;
        for (int c = 0; c < out_dim_; ++c) y.data[c] += b.value[c];
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        auto& W = store_->get(name_ + ".W");
        auto& b = store_->get(name_ + ".b");
        CMatMap<T> dYm(dy.data.data(), 1, out_dim_);
        CMatMap<T> Xm(x_.data.data(), 1, in_dim_);
        MatMap<T> dWm(W.grad.data(), in_dim_, out_dim_);
        dWm.noalias() += Xm.transpose() * dYm;
        for (int c = 0; c < out_dim_; ++c) b.grad[c] += dy.data[c];
        CMatMap<T> Wm(W.value.data(), in_dim_, out_dim_);
        Tensor<T> dx(x_.shape);
        MatMap<T> dXm(dx.data.data(), 1, in_dim_);
        dXm.noalias() = dYm * Wm.transpose();
        return dx;
    }

    void rebind(ParamStore<T>& s) override { store_ = &s; }

  private:
    ParamStore<T>* store_;
    std::string name_;
    int in_dim_, out_dim_;
    Tensor<T> x_;
};

template <class T>
class Reshape final : public Layer<T> {
  public:
    explicit Reshape(std::vector<int> target) : target_(std::move(target)) {}

    Tensor<T> forward(const Tensor<T>& x) override {
        if (Tensor<T>::count(target_) != x.size()) throw ShapeMismatch("reshape: element count mismatch");
        from_ = x.shape;
        Tensor<T> y = x;
        y.shape = target_;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx = dy;
        dx.shape = from_;
        return dx;
    }

  private:
    std::vector<int> target_, from_;
};

template <class T>
class Tanh final : public Layer<T> {
  public:
    Tensor<T> forward(const Tensor<T>& x) override {
        y_ = x;
        for (auto& v : y_.data) v = std::tanh(v);
        return y_;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx = dy;
        for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= T(1) - y_.data[i] * y_.data[i];
        return dx;
    }

  private:
    Tensor<T> y_;
};

template <class T>
class LeakyRelu final : public Layer<T> {
  public:
    explicit LeakyRelu(T slope = T(0.2)) : slope_(slope) {}
    Tensor<T> forward(const Tensor<T>& x) override {
        x_ = x;
        Tensor<T> y = x;
        for (auto& v : y.data)
            if (v < T(0)) v *= slope_;
        return y;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx = dy;
        for (std::size_t i = 0; i < dx.data.size(); ++i)
            if (x_.data[i] < T(0)) dx.data[i] *= slope_;
        return dx;
    }

  private:
    T slope_;
    Tensor<T> x_;
};

// Sigmoid clamped into [margin, 1-margin] so downstream logs stay finite.
// The clamp only engages when the logit saturates the scalar type.
template <class T>
class Sigmoid final : public Layer<T> {
  public:
    explicit Sigmoid(T margin = T(1e-6)) : margin_(margin) {}
    Tensor<T> forward(const Tensor<T>& x) override {
        y_ = x;
        for (auto& v : y_.data) {
            v = T(1) / (T(1) + std::exp(-v));
            if (v < margin_) v = margin_;
            if (v > T(1) - margin_) v = T(1) - margin_;
        }
        return y_;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx = dy;
        for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= y_.data[i] * (T(1) - y_.data[i]);
        return dx;
    }

  private:
    T margin_;
    Tensor<T> y_;
};

// Appends constant channels holding a condition vector (one channel per
// component, each filled with that component's value). set_condition must be
// called before forward; backward drops the gradient of the appended part.
template <class T>
class ConditionChannels final : public Layer<T> {
  public:
    explicit ConditionChannels(int cond_dim) : cond_dim_(cond_dim) {}

    void set_condition(const std::vector<T>& cond) {
        if (static_cast<int>(cond.size()) != cond_dim_)
            throw ShapeMismatch("condition channel count mismatch");
        cond_ = cond;
    }

    Tensor<T> forward(const Tensor<T>& x) override {
        in_c_ = x.shape[2];
        Tensor<T> y({x.shape[0], x.shape[1], in_c_ + cond_dim_});
        const int n = x.shape[0] * x.shape[1];
        for (int i = 0; i < n; ++i) {
            const T* src = &x.data[static_cast<std::size_t>(i) * in_c_];
            T* dst = &y.data[static_cast<std::size_t>(i) * (in_c_ + cond_dim_)];
            for (int c = 0; c < in_c_; ++c) dst[c] = src[c];
            for (int c = 0; c < cond_dim_; ++c) dst[in_c_ + c] = cond_[c];
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx({dy.shape[0], dy.shape[1], in_c_});
        const int n = dy.shape[0] * dy.shape[1];
        for (int i = 0; i < n; ++i) {
            const T* src = &dy.data[static_cast<std::size_t>(i) * (in_c_ + cond_dim_)];
            T* dst = &dx.data[static_cast<std::size_t>(i) * in_c_];
            for (int c = 0; c < in_c_; ++c) dst[c] = src[c];
        }
        return dx;
    }

  private:
    int cond_dim_;
    int in_c_ = 0;
    std::vector<T> cond_;
};

template <class T>
class Sequential {
  public:
    ParamStore<T> params;

    Sequential() = default;
    Sequential(const Sequential&) = delete;
    Sequential& operator=(const Sequential&) = delete;
    Sequential(Sequential&& other) noexcept
        : params(std::move(other.params)), layers_(std::move(other.layers_)) {
        for (auto& l : layers_) l->rebind(params);
    }
    Sequential& operator=(Sequential&& other) noexcept {
        params = std::move(other.params);
        layers_ = std::move(other.layers_);
        for (auto& l : layers_) l->rebind(params);
        return *this;
    }

    template <class L, class... Args>
    L* add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L* raw = layer.get();
        layers_.push_back(std::move(layer));
        return raw;
    }

    Tensor<T> forward(const Tensor<T>& x) {
        Tensor<T> h = x;
        for (auto& l : layers_) h = l->forward(h);
        return h;
    }

    Tensor<T> backward(const Tensor<T>& dy) {
        Tensor<T> g = dy;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

  private:
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace caae
