#pragma once

#include <array>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "caae/dataset.hpp"
#include "caae/tensor.hpp"

namespace caae {

// PNG/JPEG -> normalized square tensor. Non-square images are center-cropped
// to a square first (the dataset is assumed pre-cropped, this is a fallback).
template <class T = float>
Tensor<T> load_image_file(const std::string& path, int target_size) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw BadConfig("cannot read image: " + path);
    if (bgr.channels() != 3) throw BadChannels("expected 3 channels in " + path);
    if (bgr.rows != bgr.cols) {
        const int side = std::min(bgr.rows, bgr.cols);
        const int y0 = (bgr.rows - side) / 2, x0 = (bgr.cols - side) / 2;
        bgr = bgr(cv::Rect(x0, y0, side, side)).clone();
    }
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    std::vector<std::uint8_t> raw(rgb.data, rgb.data + static_cast<std::size_t>(rgb.total()) * 3);
    return normalize_image<T>(raw, rgb.rows, rgb.cols, 3, target_size);
}

template <class T>
void save_png(const std::string& path, const Tensor<T>& img) {
    auto raw = denormalize_image(img);
    cv::Mat rgb(img.shape[0], img.shape[1], CV_8UC3, raw.data());
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path, bgr)) throw BadConfig("cannot write image: " + path);
}

// 1 x 10 horizontal strip, age groups left to right.
template <class T>
void save_grid_png(const std::string& path, const std::array<Tensor<T>, 10>& images) {
    const int h = images[0].shape[0], w = images[0].shape[1];
    Tensor<T> strip({h, w * 10, 3});
    for (int g = 0; g < 10; ++g)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) strip.at(y, g * w + x, c) = images[g].at(y, x, c);
    save_png(path, strip);
}

}  // namespace caae
