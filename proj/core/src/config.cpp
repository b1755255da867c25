#include "tubeloc/config.hpp"

#include "tubeloc/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace tubeloc {

using nlohmann::ordered_json;

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError("invalid config: " + what);
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid config: field '") + key + "': " + e.what());
    }
}

}  // namespace

void Config::validate() const {
    require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    require(std::isfinite(theta) && theta < -1.0, "theta must be < -1");
    require(k_neighbors >= 1, "k_neighbors must be >= 1");
    require(p_tubes >= 1, "p_tubes must be >= 1");
    require(iterations >= 1, "iterations must be >= 1");
    require(keyframe_stride >= 1, "keyframe_stride must be >= 1");
    require(top_candidates >= 1, "top_candidates must be >= 1");
    require(retrieval_proposals >= 1, "retrieval_proposals must be >= 1");
    require(std::isfinite(affinity_gamma) && affinity_gamma >= 0.0, "affinity_gamma must be >= 0");
    require(retrieval_shortlist >= 0, "retrieval_shortlist must be >= 0");
    require(hough.translation_bins >= 1, "hough_translation_bins must be >= 1");
    require(hough.scale_bins >= 1, "hough_scale_bins must be >= 1");
    require(std::isfinite(hough.translation_range) && hough.translation_range > 0.0,
            "hough_translation_range must be > 0");
    require(std::isfinite(hough.scale_range) && hough.scale_range > 0.0,
            "hough_scale_range must be > 0");
    require(std::isfinite(hough.bandwidth_scale) && hough.bandwidth_scale > 0.0,
            "hough_bandwidth_scale must be > 0");
    require(threads >= 0, "threads must be >= 0");
}

Config config_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("invalid config: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("invalid config: expected a JSON object");

    static const char* const kKnown[] = {
        "alpha", "lambda", "theta", "k_neighbors", "p_tubes", "iterations", "keyframe_stride",
        "top_candidates", "retrieval_proposals", "affinity_gamma", "retrieval_shortlist",
        "hough_translation_bins", "hough_scale_bins", "hough_translation_range",
        "hough_scale_range", "hough_bandwidth_scale", "rng_seed", "threads"};
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : kKnown) known = known || key == k;
        if (!known) throw ValidationError("invalid config: unknown field '" + key + "'");
    }

    Config c;
    read_field(j, "alpha", c.alpha);
    read_field(j, "lambda", c.lambda);
    read_field(j, "theta", c.theta);
    read_field(j, "k_neighbors", c.k_neighbors);
    read_field(j, "p_tubes", c.p_tubes);
    read_field(j, "iterations", c.iterations);
    read_field(j, "keyframe_stride", c.keyframe_stride);
    read_field(j, "top_candidates", c.top_candidates);
    read_field(j, "retrieval_proposals", c.retrieval_proposals);
    read_field(j, "affinity_gamma", c.affinity_gamma);
    read_field(j, "retrieval_shortlist", c.retrieval_shortlist);
    read_field(j, "hough_translation_bins", c.hough.translation_bins);
    read_field(j, "hough_scale_bins", c.hough.scale_bins);
    read_field(j, "hough_translation_range", c.hough.translation_range);
    read_field(j, "hough_scale_range", c.hough.scale_range);
    read_field(j, "hough_bandwidth_scale", c.hough.bandwidth_scale);
    read_field(j, "rng_seed", c.rng_seed);
    read_field(j, "threads", c.threads);
    c.validate();
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return config_from_json_text(ss.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string config_to_json_text(const Config& c) {
    ordered_json j;
    j["alpha"] = c.alpha;
    j["lambda"] = c.lambda;
    j["theta"] = c.theta;
    j["k_neighbors"] = c.k_neighbors;
    j["p_tubes"] = c.p_tubes;
    j["iterations"] = c.iterations;
    j["keyframe_stride"] = c.keyframe_stride;
    j["top_candidates"] = c.top_candidates;
    j["retrieval_proposals"] = c.retrieval_proposals;
    j["affinity_gamma"] = c.affinity_gamma;
    j["retrieval_shortlist"] = c.retrieval_shortlist;
    j["hough_translation_bins"] = c.hough.translation_bins;
    j["hough_scale_bins"] = c.hough.scale_bins;
    j["hough_translation_range"] = c.hough.translation_range;
    j["hough_scale_range"] = c.hough.scale_range;
    j["hough_bandwidth_scale"] = c.hough.bandwidth_scale;
    j["rng_seed"] = c.rng_seed;
    j["threads"] = c.threads;
    return j.dump(2);
}

}  // namespace tubeloc
