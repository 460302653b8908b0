#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "caae/renderer.hpp"

using namespace caae;

namespace {
Tensor<float> face(std::uint64_t id, int age, Sex sex, int size = 64) {
    SyntheticFaceParams p;
    p.identity_seed = id;
    p.age = age;
    p.sex = sex;
    p.size = size;
    return render_synthetic_face<float>(p);
}

int count_wrinkle_rows(const Tensor<float>& img) {
    const int S = img.shape[0];
    int rows = 0;
    for (int y = 0; y < S; ++y) {
        bool hit = false;
        for (int x = 0; x < S; ++x)
            if (img.at(y, x, 0) == -0.55f && img.at(y, x, 1) == -0.55f && img.at(y, x, 2) == -0.55f)
                hit = true;
        if (hit) ++rows;
    }
    return rows;
}
}  // namespace

TEST_CASE("rendering is deterministic and bounded") {
    auto a = face(42, 35, Sex::female);
    auto b = face(42, 35, Sex::female);
    CHECK(a.data == b.data);
    for (float v : a.data) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("wrinkle strokes count completed decades") {
    CHECK(count_wrinkle_rows(face(7, 0, Sex::male)) == 0);
    CHECK(count_wrinkle_rows(face(7, 9, Sex::male)) == 0);
    CHECK(count_wrinkle_rows(face(7, 10, Sex::male)) == 1);
    CHECK(count_wrinkle_rows(face(7, 70, Sex::male)) == 7);
    CHECK(count_wrinkle_rows(face(7, 100, Sex::male)) == 10);
}

TEST_CASE("sex changes only the top band") {
    const int S = 64;
    auto m = face(99, 40, Sex::male, S);
    auto f = face(99, 40, Sex::female, S);
    const int band_rows = static_cast<int>(0.12 * S);
    bool band_differs = false;
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x)
            for (int c = 0; c < 3; ++c) {
                const bool same = m.at(y, x, c) == f.at(y, x, c);
                if (y < band_rows && !same) band_differs = true;
                if (y >= band_rows) CHECK(same);
            }
    CHECK(band_differs);
}

TEST_CASE("female band is wider than male band") {
    const int S = 64;
    auto m = face(5, 20, Sex::male, S);
    auto f = face(5, 20, Sex::female, S);
    auto band_width = [S](const Tensor<float>& img) {
        int w = 0;
        for (int x = 0; x < S; ++x)
            if (img.at(0, x, 0) == 0.9f && img.at(0, x, 2) == 0.85f) ++w;
        return w;
    };
    CHECK(band_width(f) > band_width(m));
}

TEST_CASE("identity features are pixel-identical across ages") {
    const int S = 64;
    auto young = face(1234, 5, Sex::male, S);
    auto old = face(1234, 75, Sex::male, S);
    // eyes and mouth rows are untouched by aging (wrinkles live higher up)
    const int eye_y = static_cast<int>(std::lround(0.48 * S));
    const int mouth_y = static_cast<int>(std::lround(0.70 * S));
    for (int y : {eye_y - 1, eye_y, eye_y + 1, mouth_y, mouth_y + 1})
        for (int x = 0; x < S; ++x)
            for (int c = 0; c < 3; ++c) {
                // the ellipse edge shifts with age; compare only central columns
                if (x < S / 4 || x >= 3 * S / 4) continue;
                CHECK(young.at(y, x, c) == old.at(y, x, c));
            }
}

TEST_CASE("different identities render different faces") {
    auto a = face(1, 30, Sex::male);
    auto b = face(2, 30, Sex::male);
    CHECK(a.data != b.data);
}

TEST_CASE("renderer validates its inputs") {
    SyntheticFaceParams p;
    p.age = 101;
    CHECK_THROWS_AS(render_synthetic_face<float>(p), OutOfRange);
    p.age = -1;
    CHECK_THROWS_AS(render_synthetic_face<float>(p), OutOfRange);
    p.age = 30;
    p.size = 8;
    CHECK_THROWS_AS(render_synthetic_face<float>(p), BadConfig);
}
