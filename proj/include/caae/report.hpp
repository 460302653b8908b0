#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "caae/eval.hpp"

namespace caae {

inline const char* kGroupNames[kAgeGroups] = {"0-5",   "6-10",  "11-15", "16-20", "21-30",
                                              "31-40", "41-50", "51-60", "61-70", ">70"};

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}
inline std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

// score rendered to two decimals; non-baseline columns add the percentage
// gain over the baseline in parentheses, one decimal. A zero baseline has
// no meaningful gain, so the parenthetical is dropped.
inline std::string score_cell(double value, std::optional<double> baseline) {
    if (!baseline) return fmt2(value);
    const double gain = percent_gain(*baseline, value);
    if (!std::isfinite(gain)) return fmt2(value);
    return fmt2(value) + " (" + fmt1(gain) + "%)";
}

// ---------- JSON round trip ----------

inline nlohmann::json gender_table_to_json(const GenderScoreTable& t) {
    nlohmann::json j;
    for (int sex = 0; sex < 2; ++sex) {
        nlohmann::json groups = nlohmann::json::object();
        for (int g = 0; g < kAgeGroups; ++g) {
            auto it = t.cells.find({sex, g});
            if (it == t.cells.end() || it->second.total == 0) continue;
            groups[std::to_string(g)] = {{"correct", it->second.correct}, {"total", it->second.total}};
        }
        nlohmann::json entry = {{"groups", groups}};
        Sex s = static_cast<Sex>(sex);
        if (auto avg = t.average(s)) entry["average"] = *avg;
        j[to_string(s)] = entry;
    }
    return j;
}

inline GenderScoreTable gender_table_from_json(const nlohmann::json& j) {
    GenderScoreTable t;
    for (int sex = 0; sex < 2; ++sex) {
        const std::string key = to_string(static_cast<Sex>(sex));
        if (!j.contains(key)) continue;
        for (const auto& [g, cell] : j.at(key).at("groups").items()) {
            GroupAccuracy acc;
            acc.correct = cell.at("correct").get<long>();
            acc.total = cell.at("total").get<long>();
            t.cells[{sex, std::stoi(g)}] = acc;
        }
    }
    return t;
}

inline nlohmann::json stats_to_json(const DistanceStats& s) {
    nlohmann::json j = {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"sd", s.sd}};
    for (int p = 1; p <= 9; ++p) j["p" + std::to_string(p * 10)] = s.percentiles[p - 1];
    return j;
}

inline DistanceStats stats_from_json(const nlohmann::json& j) {
    DistanceStats s;
    s.min = j.at("min").get<double>();
    s.max = j.at("max").get<double>();
    s.mean = j.at("mean").get<double>();
    s.sd = j.at("sd").get<double>();
    for (int p = 1; p <= 9; ++p) s.percentiles[p - 1] = j.at("p" + std::to_string(p * 10)).get<double>();
    return s;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["schema"] = "caae-eval-report-v1";
    j["thresholds"] = r.thresholds;
    j["metadata"] = {{"distance_pooling", r.distance_pooling}};
    j["models"] = nlohmann::json::array();
    for (const auto& m : r.models) {
        nlohmann::json fr = nlohmann::json::object();
        for (const auto& [th, acc] : m.fr) fr[fmt2(th)] = acc;
        j["models"].push_back({{"name", m.name},
                               {"gender_on", m.flags.gender_on},
                               {"vgg_on", m.flags.vgg_on},
                               {"gender", gender_table_to_json(m.gender)},
                               {"stats", stats_to_json(m.stats)},
                               {"fr", fr}});
    }
    return j;
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "caae-eval-report-v1") throw BadConfig("not a caae eval report");
    EvalReport r;
    r.thresholds = j.at("thresholds").get<std::vector<double>>();
    r.distance_pooling = j.at("metadata").at("distance_pooling").get<std::string>();
    for (const auto& mj : j.at("models")) {
        ModelEval m;
        m.name = mj.at("name").get<std::string>();
        m.flags.gender_on = mj.at("gender_on").get<bool>();
        m.flags.vgg_on = mj.at("vgg_on").get<bool>();
        m.gender = gender_table_from_json(mj.at("gender"));
        m.stats = stats_from_json(mj.at("stats"));
        for (const auto& [th, acc] : mj.at("fr").items()) m.fr[std::stod(th)] = acc.get<double>();
        r.models.push_back(std::move(m));
    }
    if (r.models.empty()) throw BadConfig("eval report has no models");
    return r;
}

inline nlohmann::json classifier_report_to_json(const ClassifierReport& r) {
    nlohmann::json j;
    for (int sex = 0; sex < 2; ++sex) {
        nlohmann::json groups = nlohmann::json::object();
        for (int g = 0; g < kAgeGroups; ++g) {
            auto it = r.cells.find({sex, g});
            if (it == r.cells.end() || it->second.total == 0) continue;
            groups[std::to_string(g)] = {{"correct", it->second.correct}, {"total", it->second.total}};
        }
        j[to_string(static_cast<Sex>(sex))] = {
            {"groups", groups},
            {"overall", {{"correct", r.overall[sex].correct}, {"total", r.overall[sex].total}}}};
    }
    return j;
}

// ---------- formatted tables ----------

namespace report_detail {
inline std::string join(const std::vector<std::string>& cells, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += sep;
        out += cells[i];
    }
    return out;
}
}  // namespace report_detail

// Gender scores per age group across models; baseline column bare, other
// columns carry percentage gains.
inline std::string format_gender_table(const EvalReport& r, Sex sex, bool csv) {
    using report_detail::join;
    const std::string sep = csv ? "," : "  | ";
    std::ostringstream out;
    out << "Gender score (" << to_string(sex) << ")\n";
    std::vector<std::string> header{"group"};
    for (const auto& m : r.models) header.push_back(m.name);
    out << join(header, sep) << "\n";
    const auto& base = r.models.front();
    for (int g = 0; g < kAgeGroups; ++g) {
        std::vector<std::string> row{kGroupNames[g]};
        bool any = false;
        for (std::size_t mi = 0; mi < r.models.size(); ++mi) {
            auto acc = r.models[mi].gender.accuracy(sex, g);
            if (!acc) {
                row.push_back("-");
                continue;
            }
            any = true;
            std::optional<double> b;
            if (mi != 0) b = base.gender.accuracy(sex, g);
            row.push_back(score_cell(*acc, b));
        }
        if (any) out << join(row, sep) << "\n";
    }
    std::vector<std::string> avg_row{"Average"};
    for (std::size_t mi = 0; mi < r.models.size(); ++mi) {
        auto a = r.models[mi].gender.average(sex);
        if (!a) {
            avg_row.push_back("-");
            continue;
        }
        std::optional<double> b;
        if (mi != 0) b = base.gender.average(sex);
        avg_row.push_back(score_cell(*a, b));
    }
    out << join(avg_row, sep) << "\n";
    return out.str();
}

inline std::string format_distance_table(const EvalReport& r, bool csv) {
    using report_detail::join;
    const std::string sep = csv ? "," : "  | ";
    std::ostringstream out;
    out << "Distance (L2) statistics between original and simulated faces\n";
    std::vector<std::string> header{"stat"};
    for (const auto& m : r.models) header.push_back(m.name);
    out << join(header, sep) << "\n";
    auto emit = [&](const std::string& label, auto getter, bool lower_is_better) {
        std::vector<std::string> row{label};
        const double base = getter(r.models.front().stats);
        for (std::size_t mi = 0; mi < r.models.size(); ++mi) {
            const double v = getter(r.models[mi].stats);
            if (mi == 0) {
                row.push_back(fmt2(v));
            } else {
                // for distances, improvement is a reduction
                const double gain = lower_is_better ? percent_gain(v, base) : percent_gain(base, v);
                row.push_back(std::isfinite(gain) ? fmt2(v) + " (" + fmt1(gain) + "%)" : fmt2(v));
            }
        }
        out << join(row, sep) << "\n";
    };
    emit("min", [](const DistanceStats& s) { return s.min; }, true);
    for (int p = 1; p <= 9; ++p)
        emit(std::to_string(p * 10) + "-PCTL",
             [p](const DistanceStats& s) { return s.percentiles[p - 1]; }, true);
    emit("max", [](const DistanceStats& s) { return s.max; }, true);
    emit("mean", [](const DistanceStats& s) { return s.mean; }, true);
    emit("SD", [](const DistanceStats& s) { return s.sd; }, true);
    return out.str();
}

inline std::string format_fr_table(const EvalReport& r, bool csv) {
    using report_detail::join;
    const std::string sep = csv ? "," : "  | ";
    std::ostringstream out;
    out << "Face recognition (FR) score comparison\n";
    std::vector<std::string> header{"threshold"};
    for (const auto& m : r.models) header.push_back(m.name);
    out << join(header, sep) << "\n";
    for (double th : r.thresholds) {
        std::vector<std::string> row{fmt2(th)};
        const double base = r.models.front().fr.at(th);
        for (std::size_t mi = 0; mi < r.models.size(); ++mi) {
            const double v = r.models[mi].fr.at(th);
            row.push_back(mi == 0 ? fmt2(v) : score_cell(v, base));
        }
        out << join(row, sep) << "\n";
    }
    return out.str();
}

inline std::string format_report(const EvalReport& r, bool csv) {
    std::string out = format_gender_table(r, Sex::male, csv);
    out += "\n" + format_gender_table(r, Sex::female, csv);
    out += "\n" + format_distance_table(r, csv);
    out += "\n" + format_fr_table(r, csv);
    return out;
}

}  // namespace caae
