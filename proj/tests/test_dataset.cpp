#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "caae/dataset.hpp"

using namespace caae;

TEST_CASE("filename parsing follows the UTKFace convention") {
    FaceRecord r = parse_face_filename("25_0_3_20170116174525125.jpg.chip.jpg");
    CHECK(r.age == 25);
    CHECK(r.sex == Sex::male);
    CHECK(r.group == 4);

    r = parse_face_filename("1_1_2_20161219140623097.jpg");
    CHECK(r.age == 1);
    CHECK(r.sex == Sex::female);
    CHECK(r.group == 0);

    r = parse_face_filename("116_1_0_20170120134744096.png");
    CHECK(r.age == 116);
    CHECK(r.group == 9);

    CHECK_THROWS_AS(parse_face_filename("face.png"), MalformedName);
    CHECK_THROWS_AS(parse_face_filename("25_0.png"), MalformedName);
    CHECK_THROWS_AS(parse_face_filename("117_0_0_x.png"), MalformedName);
    CHECK_THROWS_AS(parse_face_filename("25_2_0_x.png"), MalformedName);
    CHECK_THROWS_AS(parse_face_filename("old_0_0_x.png"), MalformedName);
    CHECK_THROWS_AS(parse_face_filename("-3_0_0_x.png"), MalformedName);
}

TEST_CASE("age buckets cover 0..116 with the documented boundaries") {
    const int expected_firsts[10] = {0, 6, 11, 16, 21, 31, 41, 51, 61, 71};
    for (int age = 0; age <= 116; ++age) {
        const int g = age_to_group(age);
        CHECK(g >= 0);
        CHECK(g < kAgeGroups);
        if (age > 0) CHECK(g >= age_to_group(age - 1));  // monotone
    }
    for (int g = 0; g < kAgeGroups; ++g) CHECK(age_to_group(expected_firsts[g]) == g);
    CHECK(age_to_group(5) == 0);
    CHECK(age_to_group(70) == 8);
    CHECK(age_to_group(116) == 9);
    CHECK_THROWS_AS(age_to_group(-1), OutOfRange);
    CHECK_THROWS_AS(age_to_group(117), OutOfRange);
}

TEST_CASE("normalize maps bytes into [-1,1] and round-trips within quantization") {
    std::vector<std::uint8_t> raw(8 * 8 * 3);
    Rng rng(3);
    for (auto& b : raw) b = static_cast<std::uint8_t>(rng() % 256);
    Tensor<float> img = normalize_image<float>(raw, 8, 8, 3, 8);
    CHECK(img.shape == std::vector<int>{8, 8, 3});
    for (float v : img.data) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
    auto back = denormalize_image(img);
    for (std::size_t i = 0; i < raw.size(); ++i) CHECK(std::abs(int(back[i]) - int(raw[i])) <= 1);

    CHECK_THROWS_AS(normalize_image<float>(raw, 8, 8, 1, 8), BadChannels);
    CHECK_THROWS_AS(normalize_image<float>(raw, 9, 8, 3, 8), ShapeMismatch);
}

TEST_CASE("bilinear resize of a constant image stays constant") {
    std::vector<std::uint8_t> raw(10 * 10 * 3, 200);
    Tensor<float> img = normalize_image<float>(raw, 10, 10, 3, 7);
    CHECK(img.shape == std::vector<int>{7, 7, 3});
    for (float v : img.data) CHECK(v == doctest::Approx(200 / 127.5 - 1.0).epsilon(1e-6));
}

namespace {
std::vector<FaceRecord> fake_records(int n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.count = n;
    spec.identities = std::max(2, n / 5);
    spec.seed = seed;
    return make_synthetic_records(spec);
}
}  // namespace

TEST_CASE("splits have exact largest-remainder sizes and form a disjoint union") {
    auto records = fake_records(100, 5);
    auto s = build_dataset(records, 0.70, 0.15, 0.15, 42);
    CHECK(s.train.size() == 70);
    CHECK(s.val.size() == 15);
    CHECK(s.test.size() == 15);

    std::multiset<std::string> in, out;
    for (const auto& r : records) in.insert(r.source);
    for (const auto& r : s.train) out.insert(r.source);
    for (const auto& r : s.val) out.insert(r.source);
    for (const auto& r : s.test) out.insert(r.source);
    CHECK(in == out);
}

TEST_CASE("uneven counts still assign every record exactly once") {
    for (int n : {1, 2, 3, 7, 23}) {
        auto s = build_dataset(fake_records(n, 11), 0.70, 0.15, 0.15, 1);
        CHECK(s.train.size() + s.val.size() + s.test.size() == static_cast<std::size_t>(n));
        CHECK(!s.train.empty());
    }
}

TEST_CASE("split assignment is deterministic in the seed") {
    auto records = fake_records(60, 9);
    auto a = build_dataset(records, 0.70, 0.15, 0.15, 5);
    auto b = build_dataset(records, 0.70, 0.15, 0.15, 5);
    REQUIRE(a.train.size() == b.train.size());
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].source == b.train[i].source);
    auto c = build_dataset(records, 0.70, 0.15, 0.15, 6);
    bool same = a.train.size() == c.train.size();
    if (same)
        same = std::equal(a.train.begin(), a.train.end(), c.train.begin(),
                          [](const FaceRecord& x, const FaceRecord& y) { return x.source == y.source; });
    CHECK(!same);
}

TEST_CASE("every populated stratum lands at least one record in train") {
    auto records = fake_records(120, 21);
    auto s = build_dataset(records, 0.70, 0.15, 0.15, 3);
    std::set<std::pair<int, int>> populated, train_strata;
    for (const auto& r : records) populated.insert({static_cast<int>(r.sex), r.group});
    for (const auto& r : s.train) train_strata.insert({static_cast<int>(r.sex), r.group});
    CHECK(populated == train_strata);
}

TEST_CASE("invalid split requests are rejected") {
    auto records = fake_records(10, 1);
    CHECK_THROWS_AS(build_dataset({}, 0.7, 0.15, 0.15, 1), EmptySource);
    CHECK_THROWS_AS(build_dataset(records, 0.5, 0.2, 0.2, 1), BadConfig);
}

TEST_CASE("synthetic records alternate sexes per identity and stay in range") {
    SyntheticSpec spec;
    spec.count = 40;
    spec.identities = 8;
    spec.seed = 77;
    spec.age_min = 10;
    spec.age_max = 30;
    auto records = make_synthetic_records(spec);
    REQUIRE(records.size() == 40);
    std::map<std::uint64_t, Sex> sex_of;
    for (const auto& r : records) {
        CHECK(r.age >= 10);
        CHECK(r.age <= 30);
        CHECK(r.group == age_to_group(r.age));
        auto [it, fresh] = sex_of.emplace(r.identity, r.sex);
        if (!fresh) CHECK(it->second == r.sex);  // sex is a function of identity
    }
    CHECK(sex_of.size() == 8);
    int male = 0;
    for (auto& [id, s] : sex_of)
        if (s == Sex::male) ++male;
    CHECK(male == 4);

    auto again = make_synthetic_records(spec);
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].source == again[i].source);
}

TEST_CASE("manifest round-trips all splits") {
    auto s = build_dataset(fake_records(30, 2), 0.70, 0.15, 0.15, 8);
    const std::string path = "test_manifest.json";
    write_manifest(s, path);
    auto back = read_manifest(path);
    CHECK(back.train.size() == s.train.size());
    CHECK(back.val.size() == s.val.size());
    CHECK(back.test.size() == s.test.size());
    for (std::size_t i = 0; i < s.train.size(); ++i) {
        CHECK(back.train[i].source == s.train[i].source);
        CHECK(back.train[i].identity == s.train[i].identity);
        CHECK(back.train[i].age == s.train[i].age);
        CHECK(back.train[i].sex == s.train[i].sex);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_manifest("does_not_exist.json"), BadConfig);
}

TEST_CASE("record_image renders synthetic sources and demands a loader for files") {
    FaceRecord r;
    r.source = synthetic_source_id(123, 30, Sex::female);
    r.identity = 123;
    r.age = 30;
    r.sex = Sex::female;
    Tensor<float> img = record_image<float>(r, 32);
    CHECK(img.shape == std::vector<int>{32, 32, 3});

    FaceRecord file;
    file.source = "somewhere/25_0_0_x.jpg";
    CHECK_THROWS_AS(record_image<float>(file, 32), BadConfig);
}
