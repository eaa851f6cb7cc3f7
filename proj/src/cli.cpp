#include "catgeo/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "catgeo/config.hpp"
#include "catgeo/gradcheck.hpp"
#include "catgeo/io.hpp"
#include "catgeo/metrics.hpp"
#include "catgeo/model.hpp"
#include "catgeo/pags.hpp"
#include "catgeo/synth.hpp"
#include "catgeo/trainer.hpp"

namespace catgeo {
namespace {

/// Registers `--<key>` for every config key; values land in `overrides`.
void add_config_flags(CLI::App* cmd, std::map<std::string, std::string>& overrides) {
    for (const auto& key : config_keys()) {
        cmd->add_option_function<std::string>(
            "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
            "override config key '" + key + "'");
    }
}

TrainConfig load_config(const std::string& config_path, const std::map<std::string, std::string>& overrides) {
    TrainConfig cfg;
    if (!config_path.empty()) apply_config(cfg, read_key_value_file(config_path));
    apply_config(cfg, overrides);
    cfg.validate();
    return cfg;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw io::IoError("cannot write '" + path.string() + "'");
    out << text;
}

int cmd_synth(const std::string& out, std::size_t n_train, std::size_t n_test, std::size_t points, double severity,
              std::uint64_t seed, double extent) {
    synth::SynthConfig sc;
    sc.points_per_scene = points;
    sc.shift_severity = severity;
    sc.seed = seed;
    sc.scene_extent = extent;
    const auto split = synth::make_split(sc, n_train, n_test);
    const std::filesystem::path root(out);
    for (const auto& [dir, scenes] : {std::pair{root / "train", &split.train}, std::pair{root / "test", &split.test}}) {
        io::write_class_table(dir, sc.classes);
        for (const auto& s : *scenes) io::write_scene(dir, s);
    }
    std::cout << "train_scenes = " << split.train.size() << "\n"
              << "test_scenes = " << split.test.size() << "\n"
              << "points_per_scene = " << points << "\n"
              << "shift_severity = " << severity << "\n";
    return kExitOk;
}

int cmd_train(const std::string& data, const std::string& config_path, const std::string& out_dir,
              const std::map<std::string, std::string>& overrides) {
    TrainConfig cfg = load_config(config_path, overrides);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    const auto table = io::read_class_table(data);
    const auto scenes = io::read_dataset(data, table);
    std::filesystem::create_directories(cfg.output_dir);
    write_text(cfg.output_dir / "config.txt", to_text(cfg));

    std::ofstream curve(cfg.output_dir / "losses.txt");
    curve.precision(17);
    train::TrainResult result;
    if (cfg.epochs == 0) {
        result.state = train::init_state(cfg, table.size());
    } else {
        result = train::train(scenes, table, cfg, [&](std::size_t epoch, const train::EpochLog& log) {
            curve << "epoch_" << epoch << " = " << log.total << " seg=" << log.seg << " gpl=" << log.gpl
                  << " gcl=" << log.gcl << '\n';
            std::cout << "epoch " << epoch << " total " << log.total << " seg " << log.seg << " gpl " << log.gpl
                      << " gcl " << log.gcl << std::endl;
        });
    }
    model::save_checkpoint(cfg.output_dir / "model.gseg",
                           {result.state.model, result.state.relation, result.state.embedding});
    std::cout << "checkpoint = " << (cfg.output_dir / "model.gseg").string() << "\n"
              << "skipped_steps = " << result.skipped_steps << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& data, bool tta, const std::string& summary,
             const std::vector<double>& severities, const std::string& config_path,
             const std::map<std::string, std::string>& overrides) {
    const TrainConfig cfg = load_config(config_path, overrides);
    const auto ckpt = model::load_checkpoint(checkpoint);
    const auto table = io::read_class_table(data);
    if (ckpt.model.num_classes() != table.size())
        throw DimensionError("dimension mismatch: checkpoint has C = " + std::to_string(ckpt.model.num_classes()) +
                             " classes but the data has C = " + std::to_string(table.size()));
    const auto scenes = io::read_dataset(data, table);
    std::optional<metrics::TtaGrid> grid;
    if (tta) grid = metrics::TtaGrid{cfg.tta_angles_deg, cfg.tta_scales};
    auto report = metrics::evaluate(ckpt.model, scenes, table, grid);
    for (double severity : severities) {
        synth::SynthConfig sc;
        sc.classes = table;
        sc.seed = cfg.seed;
        sc.shift = cfg.augment;
        sc.shift_severity = severity;
        std::vector<Scene> shifted;
        shifted.reserve(scenes.size());
        for (std::size_t i = 0; i < scenes.size(); ++i) shifted.push_back(synth::shift_scene(sc, scenes[i], i));
        std::ostringstream key;
        key << "miou.severity_" << severity;
        report.extra.emplace_back(key.str(), metrics::evaluate(ckpt.model, shifted, table, grid).miou);
    }
    const auto text = report.to_text();
    std::cout << text;
    if (!summary.empty()) write_text(summary, text);
    return kExitOk;
}

int cmd_augment(const std::string& data, const std::string& id, const std::string& out,
                const std::string& config_path, const std::map<std::string, std::string>& overrides) {
    const TrainConfig cfg = load_config(config_path, overrides);
    const auto table = io::read_class_table(data);
    const auto scene = io::read_scene(data, id, table);
    Rng rng = Rng(cfg.seed).split("augment").split(id);
    const auto result = pags::compound_augment(scene, table, cfg.augment, rng);
    io::write_class_table(out, table);
    io::write_scene(out, result.scene);
    const auto text = result.report.to_text();
    write_text(std::filesystem::path(out) / (id + ".report.txt"), text);
    std::cout << text;
    return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t configs) {
    gradcheck::Options opts;
    opts.seed = seed;
    opts.configs = configs;
    const auto report = gradcheck::run(opts);
    std::cout << "configs = " << report.configs << "\n"
              << "coordinates = " << report.coordinates << "\n"
              << "failures = " << report.failures << "\n"
              << "max_rel_error = " << report.max_rel_error << "\n"
              << "embedding_untouched = " << (report.embedding_untouched ? "true" : "false") << "\n";
    if (!report.first_failure.empty()) std::cout << "first_failure = " << report.first_failure << "\n";
    return report.passed() ? kExitOk : kExitNumeric;
}

int cmd_ablate(std::size_t seeds, const train::AblationConfig& base_ab, const std::string& summary,
               const std::string& config_path, const std::map<std::string, std::string>& overrides) {
    const TrainConfig cfg = load_config(config_path, overrides);
    train::AblationConfig ab = base_ab;
    ab.seeds.clear();
    for (std::size_t s = 0; s < seeds; ++s) ab.seeds.push_back(cfg.seed + s);
    const auto rows = train::run_ablation(ab, cfg, [](const std::string& line) { std::cerr << line << std::endl; });
    const auto table = train::ablation_table(rows);
    std::cout << table;
    if (!summary.empty()) write_text(summary, table);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Category-level geometry learning for point-cloud segmentation"};
    app.require_subcommand(1);

    std::map<std::string, std::string> overrides;
    std::string config_path;

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic train/test dataset");
    std::string synth_out;
    std::size_t n_train = 200, n_test = 50, points = 600;
    double severity = 1.5, extent = 50.0;
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--n-train", n_train, "training scenes");
    synth_cmd->add_option("--n-test", n_test, "shifted test scenes");
    synth_cmd->add_option("--points", points, "points per scene");
    synth_cmd->add_option("--severity", severity, "test-time shift severity");
    synth_cmd->add_option("--extent", extent, "scene extent in meters");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");

    auto* train_cmd = app.add_subcommand("train", "train a model");
    std::string train_data, train_out;
    train_cmd->add_option("--data", train_data, "dataset root (velodyne/, labels/)")->required()->check(CLI::ExistingDirectory);
    train_cmd->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train_out, "output directory (overrides output_dir)");
    add_config_flags(train_cmd, overrides);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string eval_ckpt, eval_data, eval_summary;
    bool eval_tta = false;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--data", eval_data, "dataset root")->required()->check(CLI::ExistingDirectory);
    eval_cmd->add_flag("--tta", eval_tta, "average predictions over the rotation/scale grid");
    eval_cmd->add_option("--summary", eval_summary, "also write the metrics to this file");
    bool eval_shift = false;
    std::vector<double> eval_severities = {0.5, 1.0, 1.5, 2.0};
    eval_cmd->add_flag("--shift", eval_shift, "also score the data re-shifted at every --severities value");
    eval_cmd->add_option("--severities", eval_severities, "shift severities for --shift");
    eval_cmd->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    add_config_flags(eval_cmd, overrides);

    auto* aug_cmd = app.add_subcommand("augment", "run one scene through the compound augmentation");
    std::string aug_data, aug_id, aug_out;
    aug_cmd->add_option("--data", aug_data, "dataset root")->required()->check(CLI::ExistingDirectory);
    aug_cmd->add_option("--id", aug_id, "scene id (file stem)")->required();
    aug_cmd->add_option("--out", aug_out, "output dataset root")->required();
    aug_cmd->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    add_config_flags(aug_cmd, overrides);

    auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
    std::uint64_t gc_seed = 0;
    std::size_t gc_configs = 20;
    gc_cmd->add_option("--seed", gc_seed, "seed");
    gc_cmd->add_option("--configs", gc_configs, "random configurations");

    auto* ab_cmd = app.add_subcommand("ablate", "baseline vs +CGE vs +CGE+GCL on the same seeds");
    std::size_t ab_seeds = 5;
    std::string ab_summary;
    train::AblationConfig ab;
    ab_cmd->add_option("--seeds", ab_seeds, "number of seeds, starting at --seed");
    ab_cmd->add_option("--n-train", ab.n_train, "training scenes");
    ab_cmd->add_option("--n-test", ab.n_test, "test scenes");
    ab_cmd->add_option("--points", ab.points_per_scene, "points per scene");
    ab_cmd->add_option("--severity", ab.severity, "test shift severity");
    ab_cmd->add_option("--summary", ab_summary, "also write the table to this file");
    ab_cmd->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    add_config_flags(ab_cmd, overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth_out, n_train, n_test, points, severity, synth_seed, extent);
        if (*train_cmd) return cmd_train(train_data, config_path, train_out, overrides);
        if (*eval_cmd) return cmd_eval(eval_ckpt, eval_data, eval_tta, eval_summary,
                                        eval_shift ? eval_severities : std::vector<double>{}, config_path,
                                        overrides);
        if (*aug_cmd) return cmd_augment(aug_data, aug_id, aug_out, config_path, overrides);
        if (*gc_cmd) return cmd_gradcheck(gc_seed, gc_configs);
        if (*ab_cmd) return cmd_ablate(ab_seeds, ab, ab_summary, config_path, overrides);
    } catch (const train::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace catgeo
