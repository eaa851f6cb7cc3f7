#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "catgeo/cge.hpp"
#include "catgeo/config.hpp"
#include "catgeo/metrics.hpp"
#include "catgeo/model.hpp"
#include "catgeo/rng.hpp"
#include "catgeo/types.hpp"

namespace catgeo::train {

/// Raised when an optimizer step sees a non-finite gradient.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainState {
    model::PointNetLite model;
    cge::EmbeddingMatrix embedding;
    cge::RelationMatrix relation;
    model::SgdState sgd;
    std::size_t step = 0;
};

TrainState init_state(const TrainConfig& cfg, std::size_t num_classes);

struct StepLosses {
    double seg = 0.0;
    double gpl = 0.0;
    double gcl = 0.0;
    double total = 0.0;
    bool skipped = false;
    std::size_t classes_updated = 0;
};

/// Scenes of a batch concatenated into one cloud; the network is point-wise,
/// so this is the same as running them separately with a joint mean loss.
Scene concat(std::span<const Scene> scenes);

/// One optimization step:
///   standard augmentation -> forward -> L_seg -> L_gpl (F A, Q)
///   -> compound augmentation -> forward -> L_gcl (F_aug A, Q)
///   -> backward of L_seg + l1 L_gpl + l2 L_gcl -> SGD
///   -> transport-plan update of every class present, momentum into A.
/// All randomness comes from `rng`.
StepLosses train_step(TrainState& state, std::span<const Scene> batch, const ClassTable& table,
                      const TrainConfig& cfg, const Rng& rng);

struct EpochLog {
    double seg = 0.0;
    double gpl = 0.0;
    double gcl = 0.0;
    double total = 0.0;
};

struct TrainResult {
    TrainState state;
    std::vector<EpochLog> epochs;
    std::vector<double> step_totals;
    std::size_t skipped_steps = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochLog&)>;

TrainResult train(std::span<const Scene> scenes, const ClassTable& table, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

enum class Method { baseline, cge, full };

const char* method_name(Method m);

/// baseline: segmentation loss only. cge: + geometry property loss.
/// full: + adverse simulation and consistency loss.
TrainConfig configure(TrainConfig cfg, Method m);

struct AblationRow {
    std::uint64_t seed = 0;
    double baseline = 0.0;
    double cge = 0.0;
    double full = 0.0;
    double full_tta = 0.0;
    std::vector<double> first_epoch_loss;  // per method
    std::vector<double> final_epoch_loss;  // per method
};

struct AblationConfig {
    std::size_t n_train = 200;
    std::size_t n_test = 50;
    std::size_t points_per_scene = 600;
    double severity = 1.5;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    bool with_tta = true;
};

/// Train all three methods on the same synthetic split per seed and score
/// each on the shifted test set.
std::vector<AblationRow> run_ablation(const AblationConfig& ab, const TrainConfig& base,
                                      const std::function<void(const std::string&)>& log = {});

std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace catgeo::train
