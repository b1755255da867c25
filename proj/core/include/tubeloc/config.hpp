#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

namespace tubeloc {

/// Discretization of the Hough offset space (du, dv, ds).
struct HoughParams {
    int translation_bins = 16;
    int scale_bins = 7;
    double translation_range = 1.0;          // du, dv in [-range, range]
    double scale_range = std::log(4.0);      // ds in [-range, range]
    double bandwidth_scale = 1.0;            // Gaussian sigma in bin widths

    double translation_bin_width() const { return 2.0 * translation_range / translation_bins; }
    double scale_bin_width() const { return 2.0 * scale_range / scale_bins; }
};

struct Config {
    double alpha = 0.5;            // weight of motion coherence in the unary term
    double lambda = 2.0;           // weight of temporal consistency
    double theta = -2.0;           // motion consistency when no track is shared
    int k_neighbors = 10;
    int p_tubes = 5;
    int iterations = 5;
    int keyframe_stride = 20;
    int top_candidates = 100;
    int retrieval_proposals = 20;
    double affinity_gamma = 1.0;
    /// 0 scores every other-video key frame during retrieval; otherwise only
    /// the this-many nearest frames by signature distance are scored.
    int retrieval_shortlist = 0;
    HoughParams hough;
    std::uint64_t rng_seed = 0;
    int threads = 0;               // 0 = hardware concurrency

    /// Throws ValidationError naming the first violated field.
    void validate() const;
};

/// Reads a JSON object whose keys mirror Config field names. Unknown keys are
/// rejected; missing keys keep their defaults.
Config load_config(const std::filesystem::path& path);
Config config_from_json_text(const std::string& text);
std::string config_to_json_text(const Config& config);

}  // namespace tubeloc
