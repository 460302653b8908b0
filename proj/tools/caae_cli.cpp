#include <sstream>
// Command-line entry point: prepare / train / ablation / simulate /
// evaluate / report.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "caae/checkpoint.hpp"
#include "caae/image_io.hpp"
#include "caae/pipeline.hpp"

namespace fs = std::filesystem;
using namespace caae;

namespace {

ImageLoader<float> file_loader() {
    return [](const std::string& path, int size) { return load_image_file<float>(path, size); };
}

std::string default_out_root() {
    if (const char* env = std::getenv("CAAE_OUT_ROOT")) return env;
    return "runs";
}

std::vector<FaceRecord> resolve_records(const RunConfig& cfg, const std::string& data_arg) {
    if (data_arg.empty()) return records_from_config(cfg);
    if (fs::is_regular_file(data_arg)) {
        auto splits = read_manifest(data_arg);
        std::vector<FaceRecord> all = splits.train;
        all.insert(all.end(), splits.val.begin(), splits.val.end());
        all.insert(all.end(), splits.test.begin(), splits.test.end());
        return all;
    }
    if (fs::is_regular_file(fs::path(data_arg) / "dataset.json")) {
        return resolve_records(cfg, (fs::path(data_arg) / "dataset.json").string());
    }
    return records_from_directory(data_arg);
}

DatasetSplits resolve_splits(const RunConfig& cfg, const std::string& data_arg) {
    if (!data_arg.empty()) {
        if (fs::is_regular_file(data_arg)) return read_manifest(data_arg);
        if (fs::is_regular_file(fs::path(data_arg) / "dataset.json"))
            return read_manifest((fs::path(data_arg) / "dataset.json").string());
    }
    return build_dataset(resolve_records(cfg, data_arg), cfg.split_train, cfg.split_val, cfg.split_test,
                         cfg.train.seed);
}

void persist_config(const RunConfig& cfg, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream f(fs::path(dir) / "config.json");
    f << run_config_to_json(cfg).dump(2) << "\n";
}

int cmd_prepare(const RunConfig& cfg, const std::string& data_arg, std::string out_path) {
    if (out_path.empty()) out_path = (fs::path(cfg.out_dir) / "dataset.json").string();
    auto records = resolve_records(cfg, data_arg);
    auto splits = build_dataset(records, cfg.split_train, cfg.split_val, cfg.split_test, cfg.train.seed);
    fs::create_directories(fs::path(out_path).parent_path().empty() ? "." : fs::path(out_path).parent_path().string());
    write_manifest(splits, out_path);
    std::cout << "wrote " << out_path << " (" << splits.train.size() << " train / " << splits.val.size()
              << " val / " << splits.test.size() << " test)\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& data_arg, const std::string& out_dir) {
    auto splits = resolve_splits(cfg, data_arg);
    persist_config(cfg, out_dir);
    CaaeModel<float> model = init_model<float>(cfg.train.arch, cfg.train.seed);
    Trainer<float> trainer(cfg.train, std::move(model), file_loader());
    trainer.train(splits.train, out_dir);
    std::cout << "trained " << trainer.step_index() << " steps -> " << out_dir << "/final\n";
    return 0;
}

int cmd_ablation(const RunConfig& cfg, const std::string& data_arg, const std::string& out_root,
                 bool parallel) {
    auto splits = resolve_splits(cfg, data_arg);
    persist_config(cfg, out_root);
    auto dirs = run_ablation<float>(cfg, splits.train, out_root, parallel, file_loader());
    for (const auto& d : dirs) std::cout << d << "/final\n";
    return 0;
}

int cmd_simulate(const std::string& ckpt, const std::string& image_arg, const std::string& sex_arg,
                 const std::string& out_path) {
    AblationFlags flags;
    CaaeModel<float> model = load_checkpoint<float>(ckpt, &flags);
    Tensor<float> x;
    if (image_arg.rfind("synthetic:", 0) == 0) {
        std::vector<std::string> parts;
        std::stringstream ss(image_arg);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 4) throw BadConfig("expected synthetic:<id>:<age>:<sex>, got " + image_arg);
        FaceRecord r;
        r.source = image_arg;
        r.identity = std::stoull(parts[1]);
        r.age = std::stoi(parts[2]);
        r.sex = sex_from_string(parts[3]);
        r.group = age_to_group(r.age);
        x = record_image<float>(r, model.arch.image_size);
    } else {
        x = load_image_file<float>(image_arg, model.arch.image_size);
    }
    auto grid = simulate_ages(model, x, sex_from_string(sex_arg), flags.gender_on);
    save_grid_png(out_path, grid);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::vector<std::string>& ckpts, const std::string& inputs,
                 int per_sex, const std::string& out_path) {
    std::vector<CaaeModel<float>> models;
    std::vector<std::pair<std::string, AblationFlags>> specs;
    const auto matrix = ablation_matrix();
    for (const auto& c : ckpts) {
        AblationFlags flags;
        models.push_back(load_checkpoint<float>(c, &flags));
        std::string name = fs::path(c).parent_path().filename().string();
        for (const auto& v : matrix)
            if (v.flags.gender_on == flags.gender_on && v.flags.vgg_on == flags.vgg_on) name = v.name;
        specs.emplace_back(name, flags);
    }

    std::vector<FaceRecord> eval_inputs;
    if (inputs == "synthetic" || inputs.empty()) {
        eval_inputs = make_eval_inputs(cfg, per_sex);
    } else if (fs::is_regular_file(inputs)) {
        auto s = read_manifest(inputs);
        eval_inputs = s.train;
        eval_inputs.insert(eval_inputs.end(), s.val.begin(), s.val.end());
        eval_inputs.insert(eval_inputs.end(), s.test.begin(), s.test.end());
    } else {
        eval_inputs = records_from_directory(inputs);
    }

    auto splits = resolve_splits(cfg, "");
    auto tools = build_eval_tools<float>(cfg, splits, file_loader());

    std::vector<CaaeModel<float>*> ptrs;
    for (auto& m : models) ptrs.push_back(&m);
    EvalReport report = evaluate_models(specs, ptrs, eval_inputs, tools.classifier, tools.embedder,
                                        cfg.thresholds, file_loader());
    nlohmann::json j = eval_report_to_json(report);
    j["classifier"] = classifier_report_to_json(tools.classifier_report);
    fs::path out(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream f(out);
    f << j.dump(2) << "\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

// "--set key=value" overrides on top of the config file; dotted keys address
// nested objects, values parse as JSON when possible and fall back to strings
RunConfig load_config_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
    nlohmann::json j = nlohmann::json::object();
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) throw BadConfig("cannot open config file: " + path);
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            throw BadConfig(std::string("config is not valid JSON: ") + e.what());
        }
    }
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw BadConfig("--set expects key=value, got " + kv);
        std::string key = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);
        std::replace(key.begin(), key.end(), '.', '/');
        nlohmann::json value;
        try {
            value = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::exception&) {
            value = raw;
        }
        j[nlohmann::json::json_pointer("/" + key)] = value;
    }
    return run_config_from_json(j);
}

int cmd_report(const std::string& in_path, const std::string& format) {
    std::ifstream f(in_path);
    if (!f) throw BadConfig("cannot open report: " + in_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw BadConfig(std::string("report is not valid JSON: ") + e.what());
    }
    EvalReport report = eval_report_from_json(j);
    std::cout << format_report(report, format == "csv");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gender- and identity-preserving face age progression"};
    app.require_subcommand(1);

    std::string config_path, data_arg, out_arg, image_arg, sex_arg = "male", ckpt_arg, inputs_arg;
    std::string report_in, report_format = "table";
    std::vector<std::string> ckpts, sets;
    bool parallel = false;
    int per_sex = 100;

    auto* prepare = app.add_subcommand("prepare", "build a dataset manifest");
    prepare->add_option("--config", config_path)->required();
    prepare->add_option("--set", sets, "override config keys, e.g. --set epochs=3 --set data.synthetic.count=500");
    prepare->add_option("--data", data_arg);
    prepare->add_option("--out", out_arg);

    auto* train = app.add_subcommand("train", "train one model");
    train->add_option("--config", config_path)->required();
    train->add_option("--set", sets, "override config keys, e.g. --set epochs=3 --set data.synthetic.count=500");
    train->add_option("--data", data_arg);
    train->add_option("--out", out_arg);

    auto* ablation = app.add_subcommand("ablation", "train CAAE / CAAE-G / CAAE-V / CAAE-GV");
    ablation->add_option("--config", config_path)->required();
    ablation->add_option("--set", sets, "override config keys, e.g. --set epochs=3 --set data.synthetic.count=500");
    ablation->add_option("--data", data_arg);
    ablation->add_option("--out", out_arg);
    ablation->add_flag("--parallel", parallel, "run the four trainings concurrently");

    auto* simulate = app.add_subcommand("simulate", "age-progression strip for one face");
    simulate->add_option("--checkpoint", ckpt_arg)->required();
    simulate->add_option("--image", image_arg)->required();
    simulate->add_option("--sex", sex_arg)->check(CLI::IsMember({"male", "female"}));
    simulate->add_option("--out", out_arg)->required();

    auto* evaluate = app.add_subcommand("evaluate", "score models with gender / FR metrics");
    evaluate->add_option("--config", config_path)->required();
    evaluate->add_option("--set", sets, "override config keys, e.g. --set epochs=3 --set data.synthetic.count=500");
    evaluate->add_option("--checkpoints", ckpts)->required()->delimiter(',');
    evaluate->add_option("--inputs", inputs_arg, "image dir, manifest, or 'synthetic'");
    evaluate->add_option("--per-sex", per_sex);
    evaluate->add_option("--out", out_arg);

    auto* report = app.add_subcommand("report", "format an eval report");
    report->add_option("--in", report_in)->required();
    report->add_option("--format", report_format)->check(CLI::IsMember({"table", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty() || !sets.empty()) cfg = load_config_with_overrides(config_path, sets);
        if (cfg.out_dir == "runs") cfg.out_dir = default_out_root();

        if (prepare->parsed()) return cmd_prepare(cfg, data_arg, out_arg);
        if (train->parsed())
            return cmd_train(cfg, data_arg, out_arg.empty() ? (fs::path(cfg.out_dir) / "train").string() : out_arg);
        if (ablation->parsed())
            return cmd_ablation(cfg, data_arg,
                                out_arg.empty() ? (fs::path(cfg.out_dir) / "ablation").string() : out_arg,
                                parallel);
        if (simulate->parsed()) return cmd_simulate(ckpt_arg, image_arg, sex_arg, out_arg);
        if (evaluate->parsed())
            return cmd_evaluate(cfg, ckpts, inputs_arg, per_sex,
                                out_arg.empty() ? (fs::path(cfg.out_dir) / "report.json").string() : out_arg);
        if (report->parsed()) return cmd_report(report_in, report_format);
    } catch (const NonFiniteLoss& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const BadConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const MalformedName& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const EmptySource& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const EmptyInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CorruptCheckpoint& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
