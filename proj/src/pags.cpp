#include "catgeo/pags.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace catgeo::pags {

void AugmentationConfig::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(beta1) || !prob(beta2)) throw std::invalid_argument("augment: beta must lie in [0, 1]");
    if (!prob(rho)) throw std::invalid_argument("augment: rho must lie in [0, 1]");
    if (!(h1 <= h2)) throw std::invalid_argument("augment: h1 must be <= h2");
    if (!(gamma1 > 0.0 && gamma1 <= gamma2))
        throw std::invalid_argument("augment: need 0 < gamma1 <= gamma2");
    if (!(fog_alpha_max >= 0.0)) throw std::invalid_argument("augment: fog_alpha_max must be >= 0");
    if (!(fog_threshold >= 0.0)) throw std::invalid_argument("augment: fog_threshold must be >= 0");
}

std::string AugmentationReport::to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "psi1_applied = " << (psi1_applied ? "true" : "false") << '\n'
       << "psi2_applied = " << (psi2_applied ? "true" : "false") << '\n'
       << "points_accumulated = " << points_accumulated << '\n'
       << "labels_masked = " << labels_masked << '\n'
       << "h_min = " << h_min << '\n'
       << "h_max = " << h_max << '\n'
       << "gamma_min = " << gamma_min << '\n'
       << "gamma_max = " << gamma_max << '\n'
       << "fog_alpha = " << fog_alpha << '\n';
    return os.str();
}

Augmented psi1_matter_accumulation(const Scene& scene, const ClassTable& table,
                                   const AugmentationConfig& cfg, Rng& rng) {
    cfg.validate();
    Augmented out{scene, {}};
    out.report.psi1_applied = true;

    std::vector<std::size_t> eligible;
    for (std::size_t n = 0; n < scene.size(); ++n) {
        const auto l = scene.labels.labels[n];
        if (cfg.accumulate_all_points || (l != kIgnoreLabel && table.is_accumulable(l)))
            eligible.push_back(n);
    }
    const auto count = static_cast<std::size_t>(
        std::floor(cfg.rho * static_cast<double>(eligible.size())));

    // Partial Fisher-Yates: the first `count` slots are a uniform sample
    // without replacement.
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
    }

    bool first = true;
    for (std::size_t i = 0; i < count; ++i) {
        const double h = rng.uniform(cfg.h1, cfg.h2);
        const double gamma = rng.uniform(cfg.gamma1, cfg.gamma2);
        auto& p = out.scene.cloud.points[eligible[i]];
        p.z = static_cast<float>(static_cast<double>(p.z) + h);
        p.intensity = static_cast<float>(std::clamp(static_cast<double>(p.intensity) * gamma, 0.0, 1.0));
        if (first) {
            out.report.h_min = out.report.h_max = h;
            out.report.gamma_min = out.report.gamma_max = gamma;
            first = false;
        } else {
            out.report.h_min = std::min(out.report.h_min, h);
            out.report.h_max = std::max(out.report.h_max, h);
            out.report.gamma_min = std::min(out.report.gamma_min, gamma);
            out.report.gamma_max = std::max(out.report.gamma_max, gamma);
        }
    }
    out.report.points_accumulated = count;
    return out;
}

Augmented apply_fog(const Scene& scene, double alpha, double threshold) {
    Augmented out{scene, {}};
    out.report.psi2_applied = true;
    out.report.fog_alpha = alpha;
    for (std::size_t n = 0; n < scene.size(); ++n) {
        auto& p = out.scene.cloud.points[n];
        const double x = p.x, y = p.y, z = p.z;
        const double r = std::sqrt(x * x + y * y + z * z);
        const double attenuated = static_cast<double>(p.intensity) * std::exp(-2.0 * alpha * r);
        p.intensity = static_cast<float>(attenuated);
        // Compare the stored echo so the mask agrees with what a reader sees.
        if (static_cast<double>(p.intensity) < threshold) {
            auto& label = out.scene.labels.labels[n];
            if (label != kIgnoreLabel) ++out.report.labels_masked;
            label = kIgnoreLabel;
        }
    }
    return out;
}

Augmented psi2_fuzzy_recognition(const Scene& scene, const AugmentationConfig& cfg, Rng& rng) {
    cfg.validate();
    const double alpha = rng.uniform(0.0, cfg.fog_alpha_max);
    return apply_fog(scene, alpha, cfg.fog_threshold);
}

Augmented compound_augment(const Scene& scene, const ClassTable& table,
                           const AugmentationConfig& cfg, Rng& rng) {
    cfg.validate();
    const bool use_psi1 = rng.bernoulli(cfg.beta1);
    const bool use_psi2 = rng.bernoulli(cfg.beta2);
    Augmented out{scene, {}};
    if (use_psi1) {
        Rng sub = rng.split("psi1");
        auto step = psi1_matter_accumulation(out.scene, table, cfg, sub);
        out.scene = std::move(step.scene);
        out.report = step.report;
    }
    if (use_psi2) {
        Rng sub = rng.split("psi2");
        auto step = psi2_fuzzy_recognition(out.scene, cfg, sub);
        out.scene = std::move(step.scene);
        out.report.psi2_applied = true;
        out.report.labels_masked = step.report.labels_masked;
        out.report.fog_alpha = step.report.fog_alpha;
    }
    return out;
}

StandardAugmentConfig StandardAugmentConfig::disabled() {
    StandardAugmentConfig cfg;
    cfg.p_rotate = cfg.p_scale = cfg.p_flip_x = cfg.p_flip_y = cfg.p_jitter = cfg.p_dropout = 0.0;
    return cfg;
}

PointCloud rotate_scale(const PointCloud& cloud, double theta, double scale) {
    PointCloud out = cloud;
    const double c = std::cos(theta) * scale, s = std::sin(theta) * scale;
    for (auto& p : out.points) {
        const double x = p.x, y = p.y;
        p.x = static_cast<float>(c * x - s * y);
        p.y = static_cast<float>(s * x + c * y);
        p.z = static_cast<float>(static_cast<double>(p.z) * scale);
    }
    return out;
}

Scene standard_augment(const Scene& scene, Rng& rng, const StandardAugmentConfig& cfg) {
    // Every gate is drawn up front so the number of draws per scene does not
    // depend on which branches fire.
    const bool rotate = rng.bernoulli(cfg.p_rotate);
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const bool scale = rng.bernoulli(cfg.p_scale);
    const double s = rng.uniform(cfg.scale_lo, cfg.scale_hi);
    const bool flip_x = rng.bernoulli(cfg.p_flip_x);
    const bool flip_y = rng.bernoulli(cfg.p_flip_y);
    const bool jitter = rng.bernoulli(cfg.p_jitter);
    const bool dropout = rng.bernoulli(cfg.p_dropout);
    Rng jitter_rng = rng.split("jitter");
    Rng dropout_rng = rng.split("dropout");

    Scene out = scene;
    if (rotate || scale) out.cloud = rotate_scale(out.cloud, rotate ? theta : 0.0, scale ? s : 1.0);
    for (auto& p : out.cloud.points) {
        if (flip_x) p.x = -p.x;
        if (flip_y) p.y = -p.y;
        if (jitter) {
            p.x = static_cast<float>(p.x + jitter_rng.normal(0.0, cfg.jitter_sigma));
            p.y = static_cast<float>(p.y + jitter_rng.normal(0.0, cfg.jitter_sigma));
            p.z = static_cast<float>(p.z + jitter_rng.normal(0.0, cfg.jitter_sigma));
        }
    }
    if (dropout) {
        Scene kept;
        kept.id = out.id;
        kept.cloud.points.reserve(out.size());
        kept.labels.labels.reserve(out.size());
        for (std::size_t n = 0; n < out.size(); ++n) {
            if (dropout_rng.uniform() < cfg.dropout_rate) continue;
            kept.cloud.points.push_back(out.cloud.points[n]);
            kept.labels.labels.push_back(out.labels.labels[n]);
        }
        out = std::move(kept);
    }
    return out;
}

}  // namespace catgeo::pags
