#pragma once

// Deterministic synthetic collections with planted objects, and exhaustive
// oracles used to check the optimized code paths.

#include "tubeloc/appearance.hpp"
#include "tubeloc/config.hpp"
#include "tubeloc/tube_solver.hpp"
#include "tubeloc/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tubeloc {

struct SynthSpec {
    std::uint64_t seed = 7;
    int classes = 2;
    int videos_per_class = 4;
    int frames_per_video = 100;
    int keyframe_stride = 20;
    double frame_width = 320.0;
    double frame_height = 240.0;
    int descriptor_dim = 32;
    int signature_dim = 16;
    double class_separation_deg = 90.0;
    /// Per-component std of Gaussian noise added to planted and part
    /// descriptors before normalization.
    double descriptor_noise = 0.0;
    double signature_noise = 0.02;
    int distractors = 5;
    int parts = 3;                    // nested part proposals, at most 3
    bool context_proposal = true;     // one proposal strictly containing the object
    double object_min_size = 0.25;    // object side as fraction of frame side
    double object_max_size = 0.35;
    double max_step = 0.12;           // object displacement per key frame, fraction of frame side
    int object_track_grid = 6;        // object cluster: grid x grid tracks
    int background_clusters = 2;
    int tracks_per_background_cluster = 30;

    int proposals_per_frame() const { return 1 + parts + (context_proposal ? 1 : 0) + distractors; }

    /// Throws ValidationError for counts < 1, negative noise, or geometry
    /// that cannot fit inside the frame.
    void validate() const;
};

SynthSpec load_synth_spec(const std::filesystem::path& path);
SynthSpec synth_spec_from_json_text(const std::string& text);
std::string synth_spec_to_json_text(const SynthSpec& spec);

struct PlantedVideo {
    std::string video_id;
    std::string class_label;
    Tube tube;  // planted proposal at every key frame

    friend bool operator==(const PlantedVideo&, const PlantedVideo&) = default;
};

struct PlantedTruth {
    std::vector<PlantedVideo> videos;  // same order as Collection::videos

    void save(const std::filesystem::path& path) const;
    static PlantedTruth load(const std::filesystem::path& path);

    friend bool operator==(const PlantedTruth&, const PlantedTruth&) = default;
};

struct SynthCollection {
    Collection collection;  // ground_truth filled in (one annotated frame per video)
    PlantedTruth planted;
};

SynthCollection generate_collection(const SynthSpec& spec);

/// Per-component noise std at which the expected affinity margin between two
/// noisy copies of a prototype (versus two random unit vectors) shrinks to
/// `fraction` of its noise-free value, for gamma = 1.
double noise_for_margin_fraction(int descriptor_dim, double fraction);

/// Mean affinity between planted descriptors of same-class key frames in
/// different videos, minus the mean affinity between planted and distractor
/// descriptors of the same frame.
double affinity_margin(const SynthCollection& synth, double gamma);

/// Exhaustive enumeration over all candidate sequences. Guarded to at most 8
/// frames and 10 candidates per frame (ValidationError otherwise).
TubeSolution brute_force_tube(const Trellis& trellis, double lambda);

/// Best and second-best objective over all sequences (second is -inf when
/// only one sequence exists).
std::pair<TubeSolution, double> brute_force_top_two(const Trellis& trellis, double lambda);

/// Naive triple loop over pairs and bins without separable factorization.
/// Guarded to |R_t| * |R_u| <= 10^4.
std::pair<HoughGrid, MatchScoreTable> brute_force_phm(const RegionSet& query,
                                                      const RegionSet& candidate,
                                                      const Config& config);

struct PlantedCheck {
    bool ok = true;
    std::string counterexample;  // empty when ok
};

/// Scores every video against ideal neighbors (same-class key frames of other
/// videos, localized at the planted boxes) and confirms by exhaustive
/// enumeration that the planted tube is the unique maximizer.
PlantedCheck verify_planted_optimal(const Collection& collection, const PlantedTruth& planted,
                                    const Config& config);

}  // namespace tubeloc
