#include "tubeloc/synth.hpp"

#include "tubeloc/discovery.hpp"
#include "tubeloc/error.hpp"
#include "tubeloc/model_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace tubeloc {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Spec
// ---------------------------------------------------------------------------

void SynthSpec::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ValidationError("invalid synth spec: " + what);
    };
    require(classes >= 1, "classes must be >= 1");
    require(videos_per_class >= 1, "videos_per_class must be >= 1");
    require(frames_per_video >= 1, "frames_per_video must be >= 1");
    require(keyframe_stride >= 1, "keyframe_stride must be >= 1");
    require(frame_width > 0.0 && frame_height > 0.0, "frame size must be > 0");
    require(descriptor_dim >= 1 && signature_dim >= 1, "dimensions must be >= 1");
    require(class_separation_deg > 0.0 && class_separation_deg <= 90.0,
            "class_separation_deg must be in (0, 90]");
    require(descriptor_noise >= 0.0 && signature_noise >= 0.0, "noise levels must be >= 0");
    require(distractors >= 0, "distractors must be >= 0");
    require(parts >= 0 && parts <= 3, "parts must be in [0, 3]");
    require(object_track_grid >= 1, "object_track_grid must be >= 1");
    require(background_clusters >= 0 && tracks_per_background_cluster >= 1,
            "background cluster counts must be >= 0 / >= 1");
    require(max_step >= 0.0, "max_step must be >= 0");
    const int basis = 1 + classes + classes * parts;
    require(descriptor_dim >= basis,
            "descriptor_dim must be >= " + std::to_string(basis) + " for the requested classes and parts");
    require(signature_dim >= classes + 1, "signature_dim must be >= classes + 1");
    require(object_min_size > 0.0 && object_min_size <= object_max_size,
            "object sizes must satisfy 0 < min <= max");
    require(object_max_size < 1.0, "infeasible geometry: object must be smaller than the frame");
}

SynthSpec synth_spec_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("invalid synth spec: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("invalid synth spec: expected a JSON object");
    SynthSpec s;
    auto read = [&](const char* key, auto& out) {
        auto it = j.find(key);
        if (it == j.end()) return;
        try {
            out = it->get<std::decay_t<decltype(out)>>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("invalid synth spec: field '") + key + "': " + e.what());
        }
    };
    static const char* const kKnown[] = {
        "seed", "classes", "videos_per_class", "frames_per_video", "keyframe_stride", "frame_width",
        "frame_height", "descriptor_dim", "signature_dim", "class_separation_deg", "descriptor_noise",
        "signature_noise", "distractors", "parts", "context_proposal", "object_min_size", "object_max_size",
        "max_step", "object_track_grid", "background_clusters", "tracks_per_background_cluster"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return key == k; }) ==
            std::end(kKnown)) {
            throw ValidationError("invalid synth spec: unknown field '" + key + "'");
        }
    }
    read("seed", s.seed);
    read("classes", s.classes);
    read("videos_per_class", s.videos_per_class);
    read("frames_per_video", s.frames_per_video);
    read("keyframe_stride", s.keyframe_stride);
    read("frame_width", s.frame_width);
    read("frame_height", s.frame_height);
    read("descriptor_dim", s.descriptor_dim);
    read("signature_dim", s.signature_dim);
    read("class_separation_deg", s.class_separation_deg);
    read("descriptor_noise", s.descriptor_noise);
    read("signature_noise", s.signature_noise);
    read("distractors", s.distractors);
    read("parts", s.parts);
    read("context_proposal", s.context_proposal);
    read("object_min_size", s.object_min_size);
    read("object_max_size", s.object_max_size);
    read("max_step", s.max_step);
    read("object_track_grid", s.object_track_grid);
    read("background_clusters", s.background_clusters);
    read("tracks_per_background_cluster", s.tracks_per_background_cluster);
    s.validate();
    return s;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synth spec: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return synth_spec_from_json_text(ss.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string synth_spec_to_json_text(const SynthSpec& s) {
    ordered_json j;
    j["seed"] = s.seed;
    j["classes"] = s.classes;
    j["videos_per_class"] = s.videos_per_class;
    j["frames_per_video"] = s.frames_per_video;
    j["keyframe_stride"] = s.keyframe_stride;
    j["frame_width"] = s.frame_width;
    j["frame_height"] = s.frame_height;
    j["descriptor_dim"] = s.descriptor_dim;
    j["signature_dim"] = s.signature_dim;
    j["class_separation_deg"] = s.class_separation_deg;
    j["descriptor_noise"] = s.descriptor_noise;
    j["signature_noise"] = s.signature_noise;
    j["distractors"] = s.distractors;
    j["parts"] = s.parts;
    j["context_proposal"] = s.context_proposal;
    j["object_min_size"] = s.object_min_size;
    j["object_max_size"] = s.object_max_size;
    j["max_step"] = s.max_step;
    j["object_track_grid"] = s.object_track_grid;
    j["background_clusters"] = s.background_clusters;
    j["tracks_per_background_cluster"] = s.tracks_per_background_cluster;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// Planted truth I/O
// ---------------------------------------------------------------------------

void PlantedTruth::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const PlantedVideo& v : videos) {
        ordered_json rec;
        rec["record"] = "planted";
        rec["video_id"] = v.video_id;
        rec["class_label"] = v.class_label;
        auto regions = ordered_json::array();
        for (const TubeRegion& r : v.tube.regions) {
            regions.push_back(ordered_json{{"frame_index", r.frame_index},
                                           {"proposal_id", r.proposal_id},
                                           {"box", {r.box.x_min, r.box.y_min, r.box.width, r.box.height}}});
        }
        rec["regions"] = std::move(regions);
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

PlantedTruth PlantedTruth::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    PlantedTruth truth;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto rec = ordered_json::parse(line);
            PlantedVideo v;
            v.video_id = rec.at("video_id").get<std::string>();
            v.class_label = rec.at("class_label").get<std::string>();
            v.tube.video_id = v.video_id;
            for (const auto& r : rec.at("regions")) {
                const auto b = r.at("box").get<std::vector<double>>();
                if (b.size() != 4) throw ValidationError("box must have 4 numbers");
                v.tube.regions.push_back(TubeRegion{r.at("frame_index").get<int>(), r.at("proposal_id").get<int>(),
                                                    Box{b[0], b[1], b[2], b[3]}});
            }
            truth.videos.push_back(std::move(v));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return truth;
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

namespace {

using Vec = std::vector<double>;

Vec normalized(Vec v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return normal_(rng_); }

    Vec gaussian(int dim, double scale) {
        Vec v(static_cast<std::size_t>(dim));
        for (double& x : v) x = scale * normal();
        return v;
    }
    Vec unit_vector(int dim) { return normalized(gaussian(dim, 1.0)); }

    /// Unit vector = normalize(prototype + N(0, noise^2 I)).
    Vec noisy(const Vec& prototype, double noise) {
        Vec v = prototype;
        if (noise > 0.0) {
            for (double& x : v) x += noise * normal();
        }
        return normalized(std::move(v));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        std::shuffle(v.begin(), v.end(), rng_);
    }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Orthonormal basis via Gram-Schmidt on Gaussian draws.
std::vector<Vec> orthonormal_basis(Sampler& rng, int dim, int count) {
    std::vector<Vec> basis;
    while (static_cast<int>(basis.size()) < count) {
        Vec v = rng.gaussian(dim, 1.0);
        for (const Vec& b : basis) {
            double dot = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * b[i];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * b[i];
        }
        double n = 0.0;
        for (double x : v) n += x * x;
        if (n < 1e-12) continue;
        basis.push_back(normalized(std::move(v)));
    }
    return basis;
}

/// Prototypes with pairwise angle `separation_deg`: sqrt(cos) * shared axis
/// + sqrt(1 - cos) * own axis.
std::vector<Vec> class_prototypes(const std::vector<Vec>& basis, int classes, double separation_deg) {
    const double c = std::cos(separation_deg * std::acos(-1.0) / 180.0);
    const double a = std::sqrt(std::max(0.0, c));
    const double b = std::sqrt(std::max(0.0, 1.0 - c));
    std::vector<Vec> out;
    for (int k = 0; k < classes; ++k) {
        Vec v(basis[0].size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * basis[0][i] + b * basis[static_cast<std::size_t>(1 + k)][i];
        out.push_back(normalized(std::move(v)));
    }
    return out;
}

Box clamp_into(Box b, double width, double height) {
    b.x_min = std::clamp(b.x_min, 0.0, width - b.width);
    b.y_min = std::clamp(b.y_min, 0.0, height - b.height);
    return b;
}

std::string two_digits(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

}  // namespace

SynthCollection generate_collection(const SynthSpec& spec) {
    spec.validate();
    Sampler rng(spec.seed);
    const double W = spec.frame_width;
    const double H = spec.frame_height;

    const auto desc_basis = orthonormal_basis(rng, spec.descriptor_dim, 1 + spec.classes + spec.classes * spec.parts);
    const auto protos = class_prototypes(desc_basis, spec.classes, spec.class_separation_deg);
    std::vector<std::vector<Vec>> part_protos(static_cast<std::size_t>(spec.classes));
    for (int c = 0; c < spec.classes; ++c) {
        for (int k = 0; k < spec.parts; ++k) {
            const Vec& q = desc_basis[static_cast<std::size_t>(1 + spec.classes + c * spec.parts + k)];
            Vec v = protos[static_cast<std::size_t>(c)];
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += 0.6 * q[i];
            part_protos[static_cast<std::size_t>(c)].push_back(normalized(std::move(v)));
        }
    }
    const auto sig_basis = orthonormal_basis(rng, spec.signature_dim, spec.classes);

    SynthCollection out;
    Collection& col = out.collection;
    col.descriptor_dim = static_cast<std::size_t>(spec.descriptor_dim);
    col.signature_dim = static_cast<std::size_t>(spec.signature_dim);

    const std::vector<int> kfs = key_frames(spec.frames_per_video, spec.keyframe_stride);
    const int proposals = spec.proposals_per_frame();

    for (int c = 0; c < spec.classes; ++c) {
        const std::string label = "class" + two_digits(c);
        for (int vi = 0; vi < spec.videos_per_class; ++vi) {
            Video video;
            video.id = "c" + two_digits(c) + "-v" + two_digits(vi);
            video.length = spec.frames_per_video;

            // Object path: one waypoint per key frame, static afterwards.
            const double ow = rng.uniform(spec.object_min_size, spec.object_max_size) * W;
            const double oh = rng.uniform(spec.object_min_size, spec.object_max_size) * H;
            std::vector<Box> waypoints;
            waypoints.push_back(Box{rng.uniform(0.0, W - ow), rng.uniform(0.0, H - oh), ow, oh});
            for (std::size_t k = 1; k < kfs.size(); ++k) {
                Box next = waypoints.back();
                next.x_min += rng.uniform(-spec.max_step, spec.max_step) * W;
                next.y_min += rng.uniform(-spec.max_step, spec.max_step) * H;
                waypoints.push_back(clamp_into(next, W, H));
            }
            Tube path;
            path.video_id = video.id;
            for (std::size_t k = 0; k < kfs.size(); ++k) path.regions.push_back(TubeRegion{kfs[k], 0, waypoints[k]});
            auto object_at = [&](int t) { return interpolate_tube_at(path, t); };

            PlantedVideo planted;
            planted.video_id = video.id;
            planted.class_label = label;
            planted.tube.video_id = video.id;

            for (std::size_t k = 0; k < kfs.size(); ++k) {
                const Box obj = waypoints[k];
                Frame frame;
                frame.frame_index = kfs[k];
                frame.width = W;
                frame.height = H;
                frame.signature = Descriptor(rng.noisy(sig_basis[static_cast<std::size_t>(c)], spec.signature_noise));

                std::vector<int> ids(static_cast<std::size_t>(proposals));
                std::iota(ids.begin(), ids.end(), 0);
                rng.shuffle(ids);
                std::size_t next_id = 0;
                auto add = [&](const Box& box, Vec desc) {
                    frame.proposals.push_back(Proposal{ids[next_id++], box, Descriptor(std::move(desc))});
                    return frame.proposals.back().id;
                };

                const int planted_id = add(obj, rng.noisy(protos[static_cast<std::size_t>(c)], spec.descriptor_noise));
                planted.tube.regions.push_back(TubeRegion{kfs[k], planted_id, obj});

                const Box parts[3] = {
                    Box{obj.x_min, obj.y_min, 0.5 * obj.width, obj.height},
                    Box{obj.x_min, obj.y_min, obj.width, 0.5 * obj.height},
                    Box{obj.x_min + 0.25 * obj.width, obj.y_min + 0.25 * obj.height, 0.5 * obj.width,
                        0.5 * obj.height},
                };
                for (int p = 0; p < spec.parts; ++p) {
                    add(parts[p], rng.noisy(part_protos[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)],
                                            spec.descriptor_noise));
                }
                if (spec.context_proposal) {
                    const double x0 = std::max(0.0, obj.x_min - 0.5 * obj.width);
                    const double y0 = std::max(0.0, obj.y_min - 0.5 * obj.height);
                    const double x1 = std::min(W, obj.x_max() + 0.5 * obj.width);
                    const double y1 = std::min(H, obj.y_max() + 0.5 * obj.height);
                    add(Box{x0, y0, x1 - x0, y1 - y0}, rng.unit_vector(spec.descriptor_dim));
                }
                for (int d = 0; d < spec.distractors; ++d) {
                    const double w = rng.uniform(0.15, 0.5) * W;
                    const double h = rng.uniform(0.15, 0.5) * H;
                    add(Box{rng.uniform(0.0, W - w), rng.uniform(0.0, H - h), w, h}, rng.unit_vector(spec.descriptor_dim));
                }
                std::sort(frame.proposals.begin(), frame.proposals.end(),
                          [](const Proposal& a, const Proposal& b) { return a.id < b.id; });
                video.frames.push_back(std::move(frame));
            }

            // Object cluster (label 0): a grid of points riding on the object box.
            int track_id = 0;
            const int g = spec.object_track_grid;
            for (int gy = 0; gy < g; ++gy) {
                for (int gx = 0; gx < g; ++gx) {
                    const double rx = (gx + 0.5) / g;
                    const double ry = (gy + 0.5) / g;
                    Track t;
                    t.id = track_id++;
                    t.cluster_label = 0;
                    t.start_frame = 0;
                    for (int f = 0; f < video.length; ++f) {
                        const Box b = object_at(f);
                        t.points.push_back(Point2{b.x_min + rx * b.width, b.y_min + ry * b.height});
                    }
                    if (video.length < 2) t.points.push_back(t.points.back());
                    video.tracks.push_back(std::move(t));
                }
            }
            // Static background clusters scattered over the frame, never
            // under the object.
            std::vector<Box> object_boxes;
            for (int f = 0; f < video.length; ++f) object_boxes.push_back(object_at(f));
            for (int bc = 0; bc < spec.background_clusters; ++bc) {
                for (int n = 0; n < spec.tracks_per_background_cluster; ++n) {
                    Point2 p;
                    int attempts = 0;
                    for (;;) {
                        p = Point2{rng.uniform(0.0, W), rng.uniform(0.0, H)};
                        const bool covered = std::any_of(object_boxes.begin(), object_boxes.end(),
                                                         [&](const Box& b) { return b.contains(p.x, p.y); });
                        if (!covered) break;
                        if (++attempts > 10000) {
                            throw ValidationError("infeasible geometry: no background area outside the object path");
                        }
                    }
                    Track t;
                    t.id = track_id++;
                    t.cluster_label = 1 + bc;
                    t.start_frame = 0;
                    t.points.assign(static_cast<std::size_t>(std::max(video.length, 2)), p);
                    if (video.length < 2) t.points.resize(1);
                    video.tracks.push_back(std::move(t));
                }
            }
            if (video.length < 2) video.tracks.clear();  // tracks need two frames

            const int annotated = static_cast<int>(rng.uniform(0.0, static_cast<double>(video.length)));
            const int gt_frame = std::clamp(annotated, 0, video.length - 1);
            col.ground_truth.push_back(GroundTruth{video.id, gt_frame, object_at(gt_frame), label});

            col.videos.push_back(std::move(video));
            out.planted.videos.push_back(std::move(planted));
        }
    }
    // Ids are zero-padded so generation order is already sorted order.
    return out;
}

double noise_for_margin_fraction(int descriptor_dim, double fraction) {
    const double floor_affinity = std::exp(-2.0);
    const double target = fraction * (1.0 - floor_affinity) + floor_affinity;
    // Two noisy copies have expected cosine 1 / (1 + D s^2).
    const double cosine = 1.0 + 0.5 * std::log(target);
    return std::sqrt((1.0 / cosine - 1.0) / static_cast<double>(descriptor_dim));
}

double affinity_margin(const SynthCollection& synth, double gamma) {
    const Collection& col = synth.collection;
    std::vector<std::pair<std::string, const Proposal*>> planted;
    double distractor_sum = 0.0;
    long distractor_n = 0;
    for (std::size_t v = 0; v < col.videos.size(); ++v) {
        const PlantedVideo& pv = synth.planted.videos[v];
        for (const TubeRegion& r : pv.tube.regions) {
            const Frame& f = col.videos[v].frame(r.frame_index);
            const Proposal* p = f.find_proposal(r.proposal_id);
            planted.emplace_back(pv.class_label + "\x1f" + pv.video_id, p);
            for (const Proposal& q : f.proposals) {
                if (q.id == p->id || strictly_contains(p->box, q.box) || strictly_contains(q.box, p->box)) continue;
                distractor_sum += appearance_affinity(p->descriptor, q.descriptor, gamma);
                ++distractor_n;
            }
        }
    }
    double same_sum = 0.0;
    long same_n = 0;
    for (std::size_t i = 0; i < planted.size(); ++i) {
        for (std::size_t j = i + 1; j < planted.size(); ++j) {
            const auto& a = planted[i].first;
            const auto& b = planted[j].first;
            const auto ca = a.substr(0, a.find('\x1f'));
            const auto cb = b.substr(0, b.find('\x1f'));
            if (ca != cb || a == b) continue;
            same_sum += appearance_affinity(planted[i].second->descriptor, planted[j].second->descriptor, gamma);
            ++same_n;
        }
    }
    const double same = same_n == 0 ? 0.0 : same_sum / static_cast<double>(same_n);
    const double other = distractor_n == 0 ? 0.0 : distractor_sum / static_cast<double>(distractor_n);
    return same - other;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

namespace {

constexpr long double kOracleTieEps = 1e-12L;

void guard_trellis(const Trellis& trellis) {
    if (trellis.frame_count() > 8) throw ValidationError("brute_force_tube: more than 8 frames");
    for (std::size_t t = 0; t < trellis.frame_count(); ++t) {
        if (trellis.candidates(t).size() > 10) throw ValidationError("brute_force_tube: more than 10 candidates");
        if (trellis.candidates(t).empty()) throw ValidationError("brute_force_tube: empty frame");
    }
}

}  // namespace

std::pair<TubeSolution, double> brute_force_top_two(const Trellis& trellis, double lambda) {
    guard_trellis(trellis);
    const std::size_t T = trellis.frame_count();
    TubeSolution best;
    best.frame_indices = trellis.frame_indices();
    long double best_score = -std::numeric_limits<long double>::infinity();
    long double second = -std::numeric_limits<long double>::infinity();
    if (T == 0) return {best, static_cast<double>(second)};

    std::vector<std::size_t> idx(T, 0);
    std::vector<int> ids(T);
    bool have_best = false;
    for (;;) {
        long double unary = 0.0L;
        long double pair = 0.0L;
        for (std::size_t t = 0; t < T; ++t) {
            ids[t] = trellis.candidates(t)[idx[t]].proposal_id;
            unary += trellis.candidates(t)[idx[t]].phi;
            if (t + 1 < T) pair += trellis.psi(t, idx[t], idx[t + 1]);
        }
        const long double score = unary + static_cast<long double>(lambda) * pair;
        bool take = !have_best;
        if (have_best) {
            if (score > best_score + kOracleTieEps) {
                take = true;
            } else if (score >= best_score - kOracleTieEps) {
                take = ids < best.proposal_ids;
            }
        }
        if (take) {
            if (have_best) second = std::max(second, best_score);
            best_score = score;
            best.proposal_ids = ids;
            have_best = true;
        } else {
            second = std::max(second, score);
        }

        std::size_t t = T;
        while (t-- > 0) {
            if (++idx[t] < trellis.candidates(t).size()) break;
            idx[t] = 0;
        }
        if (t == static_cast<std::size_t>(-1)) break;
    }
    best.objective = static_cast<double>(best_score);
    return {best, static_cast<double>(second)};
}

TubeSolution brute_force_tube(const Trellis& trellis, double lambda) {
    return brute_force_top_two(trellis, lambda).first;
}

std::pair<HoughGrid, MatchScoreTable> brute_force_phm(const RegionSet& query, const RegionSet& candidate,
                                                      const Config& config) {
    if (query.proposals.empty() || candidate.proposals.empty()) {
        throw ValidationError("brute_force_phm: empty proposal set");
    }
    if (query.proposals.size() * candidate.proposals.size() > 10000) {
        throw ValidationError("brute_force_phm: more than 10^4 pairs");
    }
    HoughGrid grid(config.hough);
    auto votes = grid.mutable_votes();
    auto offset = [&](const Proposal& a, const Proposal& b) {
        return offset_between(location_of(a.box, query.frame_width, query.frame_height),
                              location_of(b.box, candidate.frame_width, candidate.frame_height));
    };
    for (const Proposal& a : query.proposals) {
        for (const Proposal& b : candidate.proposals) {
            const double aff = appearance_affinity(a.descriptor, b.descriptor, config.affinity_gamma);
            const Offset o = offset(a, b);
            for (int iu = 0; iu < grid.translation_bins(); ++iu) {
                for (int iv = 0; iv < grid.translation_bins(); ++iv) {
                    for (int is = 0; is < grid.scale_bins(); ++is) {
                        votes[grid.index(iu, iv, is)] += aff * geometry_likelihood(o, grid.center(iu, iv, is), config.hough);
                    }
                }
            }
        }
    }
    MatchScoreTable table(query.proposals.size(), candidate.proposals.size());
    for (std::size_t r = 0; r < query.proposals.size(); ++r) {
        for (std::size_t c = 0; c < candidate.proposals.size(); ++c) {
            const Proposal& a = query.proposals[r];
            const Proposal& b = candidate.proposals[c];
            const double aff = appearance_affinity(a.descriptor, b.descriptor, config.affinity_gamma);
            const Offset o = offset(a, b);
            double sum = 0.0;
            for (int iu = 0; iu < grid.translation_bins(); ++iu) {
                for (int iv = 0; iv < grid.translation_bins(); ++iv) {
                    for (int is = 0; is < grid.scale_bins(); ++is) {
                        sum += geometry_likelihood(o, grid.center(iu, iv, is), config.hough) * grid.at(iu, iv, is);
                    }
                }
            }
            table(r, c) = aff * sum;
        }
    }
    return {std::move(grid), std::move(table)};
}

PlantedCheck verify_planted_optimal(const Collection& collection, const PlantedTruth& planted, const Config& config) {
    if (planted.videos.size() != collection.videos.size()) {
        return {false, "planted truth does not cover the collection"};
    }
    const int stride = config.keyframe_stride;
    RegionMap regions;
    for (std::size_t v = 0; v < collection.videos.size(); ++v) {
        for (const TubeRegion& r : planted.videos[v].tube.regions) regions[FrameRef{v, r.frame_index}].push_back(r.box);
    }
    NeighborGraph ideal;
    for (std::size_t v = 0; v < collection.videos.size(); ++v) {
        for (int t : key_frames(collection.videos[v], stride)) {
            std::vector<Neighbor> list;
            for (std::size_t u = 0; u < collection.videos.size(); ++u) {
                if (u == v || planted.videos[u].class_label != planted.videos[v].class_label) continue;
                for (int s : key_frames(collection.videos[u], stride)) {
                    if (list.size() < static_cast<std::size_t>(config.k_neighbors)) list.push_back(Neighbor{FrameRef{u, s}, 1.0});
                }
            }
            ideal.neighbors.emplace(FrameRef{v, t}, std::move(list));
        }
    }

    for (std::size_t v = 0; v < collection.videos.size(); ++v) {
        const Video& video = collection.videos[v];
        const Trellis trellis = build_video_trellis(collection, v, ideal, regions, config);
        std::vector<int> want;
        for (const TubeRegion& r : planted.videos[v].tube.regions) want.push_back(r.proposal_id);
        for (std::size_t t = 0; t < trellis.frame_count(); ++t) {
            if (trellis.find(t, want.at(t)) == static_cast<std::size_t>(-1)) {
                return {false, "video '" + video.id + "': planted proposal pruned at frame " +
                                   std::to_string(trellis.frame_indices()[t])};
            }
        }
        std::pair<TubeSolution, double> top;
        try {
            top = brute_force_top_two(trellis, config.lambda);
        } catch (const ValidationError& e) {
            return {false, "video '" + video.id + "': " + e.what()};
        }
        if (top.first.proposal_ids != want) {
            std::ostringstream os;
            os << "video '" << video.id << "': optimum [";
            for (int id : top.first.proposal_ids) os << ' ' << id;
            os << " ] differs from planted [";
            for (int id : want) os << ' ' << id;
            os << " ]";
            return {false, os.str()};
        }
        if (!(top.first.objective - top.second > 1e-9)) {
            return {false, "video '" + video.id + "': planted tube ties with another sequence"};
        }
    }
    return {};
}

}  // namespace tubeloc
