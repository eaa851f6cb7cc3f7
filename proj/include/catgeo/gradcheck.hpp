#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace catgeo::gradcheck {

struct Options {
    std::uint64_t seed = 0;
    std::size_t configs = 20;
    std::size_t max_points = 32;
    std::size_t feature_dim = 8;  // D
    std::size_t num_classes = 4;  // C
    std::size_t num_props = 4;    // M
    double step = 1e-5;
    double rel_tol = 1e-4;
    double abs_floor = 1e-8;
    bool seg = true;
    bool gpl = true;
    bool gcl = true;
};

struct Report {
    std::size_t configs = 0;
    std::size_t coordinates = 0;
    std::size_t failures = 0;
    double max_rel_error = 0.0;
    bool embedding_untouched = true;
    std::string first_failure;

    bool passed() const { return failures == 0 && embedding_untouched; }
};

/// Compares every reverse-mode gradient coordinate of the selected loss sum
/// (network parameters and Q) against central finite differences on random
/// small problems. A coordinate passes when
///   |analytic - numeric| <= rel_tol * max(|analytic|, |numeric|),
/// or, when both are below `abs_floor`, when they differ by at most
/// `abs_floor`.
Report run(const Options& opts);

}  // namespace catgeo::gradcheck
