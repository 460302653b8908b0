// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. The heavy end-to-end criteria train all four ablation
// variants concurrently per seed.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include "caae/checkpoint.hpp"
#include "caae/pipeline.hpp"
#include "gradcheck_util.hpp"

using namespace caae;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(const char* id, bool pass, const std::string& detail) {
    std::cout << id << (pass ? " PASS" : " FAIL");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n" << std::flush;
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// ---- AC-1: loss identities and worked values ----

bool ac1(std::string& detail) {
    Tensor<double> x({2, 2, 1});
    x.data = {0.3, -0.4, 0.9, -0.1};
    if (reconstruction_loss(x, x) != 0.0) return false;

    Tensor<double> zeros({2, 2, 1}), ones({2, 2, 1});
    ones.data = {1, 1, 1, 1};
    if (std::abs(reconstruction_loss(zeros, ones) - 1.0) > 1e-9) return false;

    Tensor<double> constant({3, 3, 2});
    for (auto& v : constant.data) v = 0.7;
    if (tv_loss(constant) != 0.0) return false;

    Tensor<double> stripes({2, 2, 1});
    stripes.data = {0, 1, 0, 1};
    if (std::abs(tv_loss(stripes) - 0.5) > 1e-9) return false;

    std::vector<double> half{0.5};
    const double dloss = dz_discriminator_loss<double>(half, half);
    if (std::abs(dloss - 1.3862943611198906) > 1e-9) return false;

    Tensor<double> f({5});
    f.data = {1, -2, 3, 0.5, -0.5};
    if (feature_loss(f, f) != 0.0) return false;

    detail = "identities exact, worked values within 1e-9";
    return true;
}

// ---- AC-2: finite-difference gradient checks over 20 seeds ----

bool ac2(std::string& detail) {
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        worst = std::max(worst, caae::testing::max_eg_gradient_error(seed));
        worst = std::max(worst, caae::testing::max_dimg_gradient_error(seed));
        worst = std::max(worst, caae::testing::max_dz_gradient_error(seed));
    }
    detail = "max rel err " + fmt(worst) + " over 20 seeds";
    return worst < 1e-4;
}

// ---- AC-3: shape and ablation contracts ----

bool ac3(std::string& detail) {
    ArchConfig arch;
    arch.image_size = 16;
    arch.n_z = 8;
    arch.base_channels = 4;
    auto model = init_model<double>(arch, 3);

    Rng rng(11);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    Tensor<double> x({16, 16, 3});
    for (auto& v : x.data) v = u(rng);
    Tensor<double> z = model.encode(x);
    for (int g = 0; g < kAgeGroups; ++g)
        for (int s = 0; s < 2; ++s) {
            Tensor<double> y = model.generate(z, g, static_cast<Sex>(s));
            if (y.shape != std::vector<int>{16, 16, 3}) return false;
            for (double v : y.data)
                if (v < -1.0 || v > 1.0) return false;
        }

    // gender off: flipping s leaves every loss term identical
    std::vector<EgSample<double>> batch;
    for (int i = 0; i < 4; ++i) {
        EgSample<double> s;
        s.x = Tensor<double>({16, 16, 3});
        for (auto& v : s.x.data) v = u(rng);
        s.group = i % kAgeGroups;
        s.sex = Sex::male;
        batch.push_back(std::move(s));
    }
    auto flipped = batch;
    for (auto& s : flipped) s.sex = Sex::female;
    LossWeights w;
    AblationFlags off{false, false};
    auto ra = eg_phase(model, batch, w, off, false, false);
    auto rb = eg_phase(model, flipped, w, off, false, false);
    const double d_off = dimg_phase(model, batch, false, false);
    const double d_off_f = dimg_phase(model, flipped, false, false);
    if (ra.total != rb.total || d_off != d_off_f) return false;

    // vgg off: perturbing the feature net leaves every loss term identical
    auto before = eg_phase(model, batch, w, AblationFlags{true, false}, false, false);
    for (auto& [name, e] : model.feature_net.params.entries)
        for (auto& v : e.value) v += 0.25;
    auto after = eg_phase(model, batch, w, AblationFlags{true, false}, false, false);
    if (before.total != after.total || after.feat != 0.0) return false;

    detail = "20 (group, sex) shapes, s-flip and FM-perturbation invariance";
    return true;
}

// ---- AC-5: metric oracles ----

bool ac5(std::string& detail) {
    Rng rng(77);
    std::uniform_real_distribution<double> u(0.0, 5.0);

    // embedding_distance and fr_score against brute force on 1000 inputs
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a(8), b(8);
        for (int i = 0; i < 8; ++i) {
            a[i] = u(rng) - 2.5;
            b[i] = u(rng) - 2.5;
        }
        double acc = 0;
        for (int i = 0; i < 8; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        const double oracle = std::sqrt(acc);
        const double got = embedding_distance(a, b);
        if (std::abs(got - oracle) > 1e-12 * std::max(1.0, oracle)) return false;
    }

    std::vector<double> d(1000);
    for (auto& v : d) v = u(rng);
    for (int trial = 0; trial < 1000; ++trial) {
        const double th = u(rng);
        long below = 0;
        for (double v : d)
            if (v < th) ++below;
        if (fr_score(d, th) != static_cast<double>(below) / d.size()) return false;
    }

    // distance_stats against a direct recomputation
    DistanceStats s = distance_stats(d);
    std::vector<double> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    double mean = 0;
    for (double v : sorted) mean += v;
    mean /= sorted.size();
    double var = 0;
    for (double v : sorted) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (sorted.size() - 1));
    if (std::abs(s.mean - mean) > 1e-12 || std::abs(s.sd - sd) > 1e-12) return false;
    if (s.min != sorted.front() || s.max != sorted.back()) return false;

    // gender_score against direct counting
    std::vector<ScoredImage> scored;
    std::map<std::pair<int, int>, std::pair<long, long>> oracle_cells;
    for (int i = 0; i < 1000; ++i) {
        ScoredImage si;
        si.expected = static_cast<Sex>(rng() % 2);
        si.predicted = static_cast<Sex>(rng() % 2);
        si.group = static_cast<int>(rng() % kAgeGroups);
        auto& cell = oracle_cells[{static_cast<int>(si.expected), si.group}];
        ++cell.second;
        if (si.expected == si.predicted) ++cell.first;
        scored.push_back(si);
    }
    GenderScoreTable t = gender_score(scored);
    for (const auto& [key, counts] : oracle_cells) {
        auto acc = t.accuracy(static_cast<Sex>(key.first), key.second);
        if (!acc) return false;
        if (std::abs(*acc - static_cast<double>(counts.first) / counts.second) > 1e-12) return false;
    }

    // monotonicity over 10,000 threshold pairs
    std::vector<double> sample(200);
    for (auto& v : sample) v = u(rng);
    for (int trial = 0; trial < 10000; ++trial) {
        double t1 = u(rng), t2 = u(rng);
        if (t1 > t2) std::swap(t1, t2);
        if (fr_score(sample, t1) > fr_score(sample, t2)) return false;
    }

    // degenerate threshold: every distance below it
    if (fr_score(sample, 1e9) != 1.0) return false;

    detail = "oracles within 1e-12, monotone over 10k cases, degenerate = 1";
    return true;
}

// ---- AC-6: data pipeline ----

bool ac6(std::string& detail) {
    const int firsts[10] = {0, 6, 11, 16, 21, 31, 41, 51, 61, 71};
    const int lasts[10] = {5, 10, 15, 20, 30, 40, 50, 60, 70, 116};
    for (int g = 0; g < 10; ++g)
        for (int age = firsts[g]; age <= lasts[g]; ++age)
            if (age_to_group(age) != g) return false;

    SyntheticSpec spec;
    spec.count = 100;
    spec.identities = 20;
    spec.seed = 4;
    auto splits = build_dataset(make_synthetic_records(spec), 0.70, 0.15, 0.15, 4);
    if (splits.train.size() != 70 || splits.val.size() != 15 || splits.test.size() != 15) return false;

    ArchConfig arch;
    arch.image_size = 16;
    arch.n_z = 8;
    arch.base_channels = 4;
    auto model = init_model<float>(arch, 9);
    const fs::path dir = fs::temp_directory_path() / "caae_ac6_ckpt";
    fs::remove_all(dir);
    save_checkpoint(model, dir.string());
    auto loaded = load_checkpoint<float>(dir.string());
    auto sa = ckpt_detail::named_stores(model);
    auto sb = ckpt_detail::named_stores(loaded);
    for (std::size_t i = 0; i < sa.size(); ++i) {
        auto ia = sa[i].second->entries.begin();
        auto ib = sb[i].second->entries.begin();
        for (; ia != sa[i].second->entries.end(); ++ia, ++ib)
            if (ia->second.value != ib->second.value) return false;
    }
    fs::remove_all(dir);
    detail = "buckets 0-116, split (70,15,15), checkpoint bit-exact";
    return true;
}

// ---- AC-4 / AC-7: end-to-end directional reproduction and determinism ----

RunConfig ac4_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.train.arch.image_size = 64;
    // small latent: the baseline cannot smuggle gender through z, so the
    // gender-conditioned variants have measurable headroom
    cfg.train.arch.n_z = 4;
    cfg.train.arch.base_channels = 16;
    cfg.train.batch_size = 32;
    cfg.train.epochs = 3;
    cfg.train.seed = seed;
    SyntheticSpec spec;
    spec.count = 2000;
    spec.identities = 200;
    spec.seed = seed;
    spec.size = 64;
    cfg.data.synthetic = spec;
    return cfg;
}

struct SeedRun {
    EvalReport report;
    std::vector<std::vector<float>> weights;  // per variant, flattened
};

std::vector<float> flatten(CaaeModel<float>& m) {
    std::vector<float> out;
    for (auto& [prefix, store] : ckpt_detail::named_stores(m))
        for (auto& [name, e] : store->entries) out.insert(out.end(), e.value.begin(), e.value.end());
    return out;
}

SeedRun run_seed(std::uint64_t seed) {
    RunConfig cfg = ac4_config(seed);
    auto records = records_from_config(cfg);
    auto splits = build_dataset(records, cfg.split_train, cfg.split_val, cfg.split_test, seed);

    const auto variants = ablation_matrix();
    std::vector<CaaeModel<float>> models;
    models.reserve(variants.size());
    for (std::size_t i = 0; i < variants.size(); ++i)
        models.push_back(init_model<float>(cfg.train.arch, cfg.train.seed));
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < variants.size(); ++i)
        threads.emplace_back([&, i] {
            TrainConfig tc = cfg.train;
            tc.ablation = variants[i].flags;
            Trainer<float> tr(tc, std::move(models[i]));
            tr.train(splits.train);
            models[i] = std::move(tr.model());
        });
    for (auto& t : threads) t.join();

    auto tools = build_eval_tools<float>(cfg, splits);
    auto inputs = make_eval_inputs(cfg, 100);
    std::vector<std::pair<std::string, AblationFlags>> specs;
    std::vector<CaaeModel<float>*> ptrs;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        specs.emplace_back(variants[i].name, variants[i].flags);
        ptrs.push_back(&models[i]);
    }
    SeedRun run;
    run.report =
        evaluate_models<float>(specs, ptrs, inputs, tools.classifier, tools.embedder, cfg.thresholds);
    for (auto& m : models) run.weights.push_back(flatten(m));
    return run;
}

bool directional_checks(const EvalReport& r, std::string& why) {
    const ModelEval* caae = nullptr;
    const ModelEval* g = nullptr;
    const ModelEval* gv = nullptr;
    for (const auto& m : r.models) {
        if (m.name == "CAAE") caae = &m;
        if (m.name == "CAAE-G") g = &m;
        if (m.name == "CAAE-GV") gv = &m;
    }
    if (!caae || !g || !gv) {
        why = "missing models";
        return false;
    }
    const auto base = caae->gender.average(Sex::male);
    const auto avg_g = g->gender.average(Sex::male);
    const auto avg_gv = gv->gender.average(Sex::male);
    if (!base || !avg_g || !avg_gv) {
        why = "missing male averages";
        return false;
    }
    const bool a = (*avg_g - *base >= 0.05) && (*avg_gv - *base >= 0.05);
    const double tightest = r.thresholds.front();
    const bool b = gv->fr.at(tightest) > caae->fr.at(tightest);
    const bool c = gv->stats.mean <= caae->stats.mean;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "a:%s base=%.2f g=%.2f gv=%.2f  b:%s fr=%.3f/%.3f  c:%s mean=%.2f/%.2f",
                  a ? "ok" : "no", *base, *avg_g, *avg_gv, b ? "ok" : "no", gv->fr.at(tightest),
                  caae->fr.at(tightest), c ? "ok" : "no", gv->stats.mean, caae->stats.mean);
    why = buf;
    return a && b && c;
}

}  // namespace

int main() {
    std::string detail;

    verdict("AC-1", ac1(detail), detail);
    detail.clear();
    verdict("AC-2", ac2(detail), detail);
    detail.clear();
    verdict("AC-3", ac3(detail), detail);
    detail.clear();
    verdict("AC-5", ac5(detail), detail);
    detail.clear();
    verdict("AC-6", ac6(detail), detail);
    detail.clear();

    // AC-4: directional reproduction in >= 2 of 3 seeds
    int wins = 0;
    std::string ac4_detail;
    SeedRun first_run;
    const std::uint64_t seeds[3] = {1, 2, 3};
    for (int i = 0; i < 3; ++i) {
        SeedRun run = run_seed(seeds[i]);
        std::string why;
        const bool ok = directional_checks(run.report, why);
        ac4_detail += (i ? "; " : "") + ("seed " + std::to_string(seeds[i]) + " " +
                                         (ok ? "win" : "loss") + " [" + why + "]");
        if (ok) ++wins;
        if (i == 0) first_run = std::move(run);
    }
    verdict("AC-4", wins >= 2, std::to_string(wins) + "/3 seeds; " + ac4_detail);

    // AC-7: a second identical run of seed 1 must match bit for bit
    SeedRun rerun = run_seed(seeds[0]);
    bool identical = rerun.weights == first_run.weights;
    if (identical) {
        const auto ja = eval_report_to_json(first_run.report).dump();
        const auto jb = eval_report_to_json(rerun.report).dump();
        identical = ja == jb;
    }
    verdict("AC-7", identical, identical ? "checkpoints and report bit-identical" : "mismatch");

    return failures == 0 ? 0 : 1;
}
