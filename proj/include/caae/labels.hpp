#pragma once

#include <string>
#include <vector>

#include "caae/errors.hpp"

namespace caae {

enum class Sex { male = 0, female = 1 };

inline std::string to_string(Sex s) { return s == Sex::male ? "male" : "female"; }

inline Sex sex_from_string(const std::string& s) {
    if (s == "male") return Sex::male;
    if (s == "female") return Sex::female;
    throw BadConfig("sex must be 'male' or 'female', got '" + s + "'");
}

inline constexpr int kAgeGroups = 10;

// Age buckets: 0-5, 6-10, 11-15, 16-20, 21-30, 31-40, 41-50, 51-60, 61-70, >70.
inline int age_to_group(int age) {
    if (age < 0 || age > 116) throw OutOfRange("age outside [0, 116]: " + std::to_string(age));
    if (age <= 5) return 0;
    if (age <= 10) return 1;
    if (age <= 15) return 2;
    if (age <= 20) return 3;
    if (age <= 30) return 4;
    if (age <= 40) return 5;
    if (age <= 50) return 6;
    if (age <= 60) return 7;
    if (age <= 70) return 8;
    return 9;
}

// 10-dim one-hot age-group label.
inline std::vector<double> age_group_one_hot(int group) {
    if (group < 0 || group >= kAgeGroups) throw OutOfRange("age group outside [0, 9]");
    std::vector<double> v(kAgeGroups, 0.0);
    v[group] = 1.0;
    return v;
}

// 2-dim one-hot gender label, index 0 = male.
inline std::vector<double> gender_one_hot(Sex s) {
    std::vector<double> v(2, 0.0);
    v[static_cast<int>(s)] = 1.0;
    return v;
}

}  // namespace caae
