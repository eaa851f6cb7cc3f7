#include "catgeo/trainer.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "catgeo/pags.hpp"
#include "catgeo/synth.hpp"

namespace catgeo::train {

TrainState init_state(const TrainConfig& cfg, std::size_t num_classes) {
    cfg.validate();
    Rng rng = Rng(cfg.seed).split("init");
    Rng net_rng = rng.split("network");
    Rng emb_rng = rng.split("embedding");
    Rng rel_rng = rng.split("relation");
    TrainState s;
    s.model = model::PointNetLite::random(cfg.widths, num_classes, net_rng);
    s.embedding = cge::EmbeddingMatrix::random(cfg.widths.back(), num_classes, cfg.num_props, emb_rng);
    s.relation = cge::RelationMatrix::random(num_classes, cfg.num_props, rel_rng);
    s.sgd.lr = cfg.lr;
    s.sgd.momentum = cfg.momentum;
    s.sgd.weight_decay = cfg.weight_decay;
    return s;
}

Scene concat(std::span<const Scene> scenes) {
    Scene out;
    std::size_t total = 0;
    for (const auto& s : scenes) total += s.size();
    out.cloud.points.reserve(total);
    out.labels.labels.reserve(total);
    for (const auto& s : scenes) {
        out.cloud.points.insert(out.cloud.points.end(), s.cloud.points.begin(), s.cloud.points.end());
        out.labels.labels.insert(out.labels.labels.end(), s.labels.labels.begin(), s.labels.labels.end());
        if (!out.id.empty()) out.id += "+";
        out.id += s.id;
    }
    return out;
}

StepLosses train_step(TrainState& state, std::span<const Scene> batch, const ClassTable& table,
                      const TrainConfig& cfg, const Rng& rng) {
    const bool use_geometry = cfg.lambda1 != 0.0 || cfg.lambda2 != 0.0;
    const bool use_augmented = cfg.lambda2 != 0.0 || cfg.seg_on_augmented;

    std::vector<Scene> originals;
    originals.reserve(batch.size());
    const Rng std_rng = rng.split("standard");
    const auto std_cfg = cfg.standard_augment ? pags::StandardAugmentConfig{} : pags::StandardAugmentConfig::disabled();
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Rng r = std_rng.split(i);
        originals.push_back(pags::standard_augment(batch[i], r, std_cfg));
    }
    const Scene original = concat(originals);

    StepLosses out;
    model::GradientTape tape(state.model, state.relation);
    const auto pass = tape.record(original.cloud);
    const auto seg = tape.add_seg_loss(pass, original.labels, 1.0);
    out.seg = seg.value;
    bool any = !seg.empty();
    if (cfg.lambda1 != 0.0) {
        const auto gpl = tape.add_geometry_loss(pass, state.embedding, original.labels, cfg.lambda1);
        out.gpl = gpl.value;
        any = any || !gpl.empty();
    }
    if (use_augmented) {
        std::vector<Scene> augmented;
        augmented.reserve(batch.size());
        const Rng aug_rng = rng.split("compound");
        for (std::size_t i = 0; i < originals.size(); ++i) {
            Rng r = aug_rng.split(i);
            augmented.push_back(pags::compound_augment(originals[i], table, cfg.augment, r).scene);
        }
        const Scene aug = concat(augmented);
        const auto aug_pass = tape.record(aug.cloud);
        if (cfg.lambda2 != 0.0) {
            const auto gcl = tape.add_geometry_loss(aug_pass, state.embedding, aug.labels, cfg.lambda2);
            out.gcl = gcl.value;
            any = any || !gcl.empty();
        }
        if (cfg.seg_on_augmented) any = !tape.add_seg_loss(aug_pass, aug.labels, 1.0).empty() || any;
    }

    const auto total = tape.total();
    out.total = total.value;
    if (!any) {
        out.skipped = true;
        ++state.step;
        return out;
    }
    const auto grads = tape.backward(total);
    const auto gviews = grads.views();
    std::vector<std::span<const double>> cgrads(gviews.begin(), gviews.end());
    const auto params = model::trainable(state.model, state.relation);
    if (!model::sgd_step(state.sgd, params, cgrads))
        throw NumericError("non-finite gradient at step " + std::to_string(state.step));

    if (use_geometry && cfg.epsilon < 1.0) {
        const auto& fwd = tape.pass(pass);
        const auto& F = fwd.features();
        const auto predictions = fwd.predictions();
        const auto G = cge::embed(F, state.embedding);
        std::map<std::size_t, Eigen::MatrixXd> updates;
        for (std::size_t c = 0; c < table.size(); ++c) {
            // No predictions exist before the first update, so every labeled
            // point counts as reliable on step 0.
            const auto reliable = state.step == 0 ? cge::labeled_points(original.labels, c)
                                                  : cge::reliable_points(original.labels, predictions, c);
            const auto plan = cge::class_plan(G, reliable, c, cfg.sinkhorn);
            if (!plan) continue;
            if (auto update = cge::class_update(F, *plan, reliable)) updates.emplace(c, std::move(*update));
        }
        out.classes_updated = cge::momentum_update(state.embedding, updates, cfg.epsilon).updated;
    }
    ++state.step;
    return out;
}

TrainResult train(std::span<const Scene> scenes, const ClassTable& table, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    if (scenes.empty()) throw std::invalid_argument("train: no training scenes");
    TrainResult result{init_state(cfg, table.size()), {}, {}, 0};
    const Rng root(cfg.seed);
    std::vector<std::size_t> order(scenes.size());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng = root.split("epoch").split(epoch);
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        EpochLog log;
        std::size_t steps = 0;
        std::vector<Scene> batch;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            batch.clear();
            for (std::size_t k = begin; k < std::min(order.size(), begin + cfg.batch_size); ++k)
                batch.push_back(scenes[order[k]]);
            const Rng step_rng = root.split("step").split(result.state.step);
            const auto losses = train_step(result.state, batch, table, cfg, step_rng);
            result.step_totals.push_back(losses.total);
            if (losses.skipped) {
                ++result.skipped_steps;
                continue;
            }
            log.seg += losses.seg;
            log.gpl += losses.gpl;
            log.gcl += losses.gcl;
            log.total += losses.total;
            ++steps;
        }
        if (steps > 0) {
            const double inv = 1.0 / static_cast<double>(steps);
            log.seg *= inv;
            log.gpl *= inv;
            log.gcl *= inv;
            log.total *= inv;
        }
        result.epochs.push_back(log);
        if (on_epoch) on_epoch(epoch, log);
    }
    return result;
}

const char* method_name(Method m) {
    switch (m) {
        case Method::baseline: return "baseline";
        case Method::cge: return "+CGE";
        case Method::full: return "+CGE+GCL";
    }
    return "?";
}

TrainConfig configure(TrainConfig cfg, Method m) {
    switch (m) {
        case Method::baseline:
            cfg.lambda1 = 0.0;
            cfg.lambda2 = 0.0;
            cfg.augment.beta1 = 0.0;
            cfg.augment.beta2 = 0.0;
            cfg.seg_on_augmented = false;
            break;
        case Method::cge:
            cfg.lambda2 = 0.0;
            cfg.augment.beta1 = 0.0;
            cfg.augment.beta2 = 0.0;
            cfg.seg_on_augmented = false;
            break;
        case Method::full:
            break;
    }
    return cfg;
}

std::vector<AblationRow> run_ablation(const AblationConfig& ab, const TrainConfig& base,
                                      const std::function<void(const std::string&)>& log) {
    std::vector<AblationRow> rows;
    for (auto seed : ab.seeds) {
        synth::SynthConfig sc;
        sc.points_per_scene = ab.points_per_scene;
        sc.shift_severity = ab.severity;
        sc.seed = seed;
        const auto split = synth::make_split(sc, ab.n_train, ab.n_test);
        AblationRow row;
        row.seed = seed;
        for (Method m : {Method::baseline, Method::cge, Method::full}) {
            TrainConfig cfg = configure(base, m);
            cfg.seed = seed;
            const auto result = train(split.train, sc.classes, cfg);
            const double miou = metrics::evaluate(result.state.model, split.test, sc.classes).miou;
            row.first_epoch_loss.push_back(result.epochs.empty() ? 0.0 : result.epochs.front().total);
            row.final_epoch_loss.push_back(result.epochs.empty() ? 0.0 : result.epochs.back().total);
            switch (m) {
                case Method::baseline: row.baseline = miou; break;
                case Method::cge: row.cge = miou; break;
                case Method::full:
                    row.full = miou;
                    row.full_tta = ab.with_tta
                                       ? metrics::evaluate(result.state.model, split.test, sc.classes,
                                                           metrics::TtaGrid{cfg.tta_angles_deg, cfg.tta_scales})
                                             .miou
                                       : miou;
                    break;
            }
            if (log) {
                std::ostringstream os;
                os << "seed " << seed << " " << method_name(m) << ": mIoU " << 100.0 * miou;
                log(os.str());
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << "seed | baseline | +CGE | +CGE+GCL | +TTA\n";
    double b = 0, c = 0, f = 0, t = 0;
    for (const auto& r : rows) {
        os << r.seed << " | " << 100 * r.baseline << " | " << 100 * r.cge << " | " << 100 * r.full << " | "
           << 100 * r.full_tta << '\n';
        b += r.baseline;
        c += r.cge;
        f += r.full;
        t += r.full_tta;
    }
    if (!rows.empty()) {
        const double k = 100.0 / static_cast<double>(rows.size());
        os << "mean | " << b * k << " | " << c * k << " | " << f * k << " | " << t * k << '\n';
    }
    return os.str();
}

}  // namespace catgeo::train
