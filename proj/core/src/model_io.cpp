#include "tubeloc/model_io.hpp"

#include "tubeloc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace tubeloc {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

/// Line-oriented JSON reader that tags errors with "path:line:".
class JsonlReader {
public:
    explicit JsonlReader(const fs::path& path) : path_(path), in_(path) {
        if (!in_) throw IoError("cannot open " + path.string());
    }

    bool next(ordered_json& record) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            try {
                record = ordered_json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                fail(std::string("malformed JSON: ") + e.what());
            }
            if (!record.is_object()) fail("record is not a JSON object");
            return true;
        }
        if (in_.bad()) throw IoError("read error in " + path_.string());
        return false;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ValidationError(where() + ": " + message);
    }

    std::string where() const { return path_.string() + ":" + std::to_string(line_no_); }

    template <typename T>
    T get(const ordered_json& record, const char* key) const {
        auto it = record.find(key);
        if (it == record.end()) fail(std::string("missing field '") + key + "'");
        try {
            return it->get<T>();
        } catch (const nlohmann::json::exception&) {
            fail(std::string("field '") + key + "' has the wrong type");
        }
    }

    std::string record_type(const ordered_json& record) const {
        return get<std::string>(record, "record");
    }

private:
    fs::path path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
};

class JsonlWriter {
public:
    explicit JsonlWriter(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw IoError("cannot write " + path.string());
    }
    void write(const ordered_json& record) {
        out_ << record.dump() << '\n';
        if (!out_) throw IoError("write failed: " + path_.string());
    }
    void close() {
        out_.close();
        if (!out_) throw IoError("write failed: " + path_.string());
    }

private:
    fs::path path_;
    std::ofstream out_;
};

ordered_json box_json(const Box& b) { return ordered_json::array({b.x_min, b.y_min, b.width, b.height}); }

Box parse_box(const JsonlReader& reader, const ordered_json& record, const char* key) {
    auto values = reader.get<std::vector<double>>(record, key);
    if (values.size() != 4) reader.fail(std::string("field '") + key + "' must have 4 numbers");
    Box b{values[0], values[1], values[2], values[3]};
    if (!b.valid()) {
        reader.fail(std::string("invalid box in '") + key + "': width and height must be > 0 and finite");
    }
    return b;
}

Descriptor parse_descriptor(const JsonlReader& reader, const ordered_json& record, const char* key,
                            std::size_t expected_dim, const std::string& what) {
    Descriptor d(reader.get<std::vector<double>>(record, key));
    if (d.size() != expected_dim) {
        reader.fail("dimension mismatch in " + what + ": expected " + std::to_string(expected_dim) +
                    ", got " + std::to_string(d.size()));
    }
    if (!d.normalize()) reader.fail(what + " is zero or not finite");
    return d;
}

bool inside_frame(const Box& b, double width, double height) {
    return b.x_min >= 0.0 && b.y_min >= 0.0 && b.x_max() <= width && b.y_max() <= height;
}

void load_frames(const fs::path& path, Video& video, const Collection& collection) {
    JsonlReader reader(path);
    std::map<int, Frame> frames;
    std::map<int, std::set<int>> ids;
    ordered_json rec;
    while (reader.next(rec)) {
        const std::string type = reader.record_type(rec);
        if (type == "frame") {
            Frame f;
            f.frame_index = reader.get<int>(rec, "frame_index");
            f.width = reader.get<double>(rec, "width");
            f.height = reader.get<double>(rec, "height");
            if (f.frame_index < 0 || f.frame_index >= video.length) {
                reader.fail("frame_index " + std::to_string(f.frame_index) + " outside video length " +
                            std::to_string(video.length));
            }
            if (!(f.width > 0.0) || !(f.height > 0.0) || !std::isfinite(f.width) || !std::isfinite(f.height)) {
                reader.fail("frame " + std::to_string(f.frame_index) + " has invalid size");
            }
            f.signature = parse_descriptor(reader, rec, "signature", collection.signature_dim,
                                           "signature of frame " + std::to_string(f.frame_index));
            if (!frames.emplace(f.frame_index, std::move(f)).second) {
                reader.fail("duplicate frame " + std::to_string(rec["frame_index"].get<int>()));
            }
        } else if (type == "proposal") {
            const int frame_index = reader.get<int>(rec, "frame_index");
            auto it = frames.find(frame_index);
            if (it == frames.end()) {
                reader.fail("proposal refers to frame " + std::to_string(frame_index) +
                            " before its frame record");
            }
            Proposal p;
            p.id = reader.get<int>(rec, "id");
            const std::string locus = "frame " + std::to_string(frame_index) + " proposal " + std::to_string(p.id);
            auto values = reader.get<std::vector<double>>(rec, "box");
            if (values.size() != 4) reader.fail(locus + ": box must have 4 numbers");
            p.box = Box{values[0], values[1], values[2], values[3]};
            if (!p.box.valid()) reader.fail(locus + ": invalid box (width and height must be > 0)");
            if (!inside_frame(p.box, it->second.width, it->second.height)) {
                reader.fail(locus + ": box outside frame bounds");
            }
            p.descriptor = parse_descriptor(reader, rec, "descriptor", collection.descriptor_dim,
                                            "descriptor of " + locus);
            if (!ids[frame_index].insert(p.id).second) reader.fail(locus + ": duplicate proposal id");
            it->second.proposals.push_back(std::move(p));
        } else {
            reader.fail("unexpected record type '" + type + "' in frames file");
        }
    }
    video.frames.clear();
    for (auto& [idx, f] : frames) {
        std::sort(f.proposals.begin(), f.proposals.end(),
                  [](const Proposal& a, const Proposal& b) { return a.id < b.id; });
        video.frames.push_back(std::move(f));
    }
}

void load_tracks(const fs::path& path, Video& video) {
    JsonlReader reader(path);
    std::set<int> ids;
    double width = 0.0;
    double height = 0.0;
    if (!video.frames.empty()) {
        width = video.frames.front().width;
        height = video.frames.front().height;
    }
    ordered_json rec;
    while (reader.next(rec)) {
        if (reader.record_type(rec) != "track") reader.fail("expected a track record");
        Track t;
        t.id = reader.get<int>(rec, "id");
        t.cluster_label = reader.get<int>(rec, "cluster");
        t.start_frame = reader.get<int>(rec, "start_frame");
        const std::string locus = "track " + std::to_string(t.id);
        if (t.cluster_label < 0) reader.fail(locus + ": cluster label must be >= 0");
        auto pts = reader.get<std::vector<std::vector<double>>>(rec, "points");
        if (pts.size() < 2) reader.fail(locus + ": needs at least 2 points");
        for (const auto& p : pts) {
            if (p.size() != 2) reader.fail(locus + ": points must be [x, y] pairs");
            t.points.push_back(Point2{p[0], p[1]});
        }
        if (t.start_frame < 0 || t.end_frame() > video.length) reader.fail(locus + ": frames outside video");
        for (int f = t.start_frame; f < t.end_frame(); ++f) {
            const Point2& p = t.at(f);
            double w = width;
            double h = height;
            if (const Frame* fr = video.find_frame(f)) {
                w = fr->width;
                h = fr->height;
            }
            if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0 ||
                (w > 0.0 && p.x > w) || (h > 0.0 && p.y > h)) {
                reader.fail(locus + ": point at frame " + std::to_string(f) + " outside frame bounds");
            }
        }
        if (!ids.insert(t.id).second) reader.fail(locus + ": duplicate track id");
        video.tracks.push_back(std::move(t));
    }
    std::sort(video.tracks.begin(), video.tracks.end(),
              [](const Track& a, const Track& b) { return a.id < b.id; });
}

void load_ground_truth(const fs::path& path, const Video& video, std::vector<GroundTruth>& out) {
    JsonlReader reader(path);
    ordered_json rec;
    int count = 0;
    while (reader.next(rec)) {
        if (reader.record_type(rec) != "ground_truth") reader.fail("expected a ground_truth record");
        GroundTruth gt;
        gt.video_id = video.id;
        gt.frame_index = reader.get<int>(rec, "frame_index");
        gt.box = parse_box(reader, rec, "box");
        gt.class_label = reader.get<std::string>(rec, "class_label");
        if (gt.frame_index < 0 || gt.frame_index >= video.length) reader.fail("frame_index outside video");
        if (gt.class_label.empty()) reader.fail("class_label must be non-empty");
        if (++count > 1) reader.fail("only one annotated frame per video is supported");
        out.push_back(std::move(gt));
    }
}

std::string sanitize_component(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04zu", index);
    return buf;
}

}  // namespace

Collection load_collection(const fs::path& manifest_path) {
    if (!fs::exists(manifest_path)) throw IoError("manifest not found: " + manifest_path.string());
    const fs::path base = manifest_path.parent_path();
    JsonlReader reader(manifest_path);

    Collection c;
    ordered_json rec;
    if (!reader.next(rec)) throw ValidationError(manifest_path.string() + ": empty manifest");
    if (reader.record_type(rec) != "collection") reader.fail("first record must be 'collection'");
    if (reader.get<int>(rec, "version") != kFormatVersion) reader.fail("unsupported format version");
    const int ddim = reader.get<int>(rec, "descriptor_dim");
    const int sdim = reader.get<int>(rec, "signature_dim");
    if (ddim < 1 || sdim < 1) reader.fail("dimensions must be >= 1");
    c.descriptor_dim = static_cast<std::size_t>(ddim);
    c.signature_dim = static_cast<std::size_t>(sdim);

    std::set<std::string> seen;
    while (reader.next(rec)) {
        if (reader.record_type(rec) != "video") reader.fail("expected a video record");
        Video v;
        v.id = reader.get<std::string>(rec, "id");
        v.length = reader.get<int>(rec, "length");
        if (v.id.empty()) reader.fail("video id must be non-empty");
        if (v.length < 1) reader.fail("video '" + v.id + "': length must be >= 1");
        if (!seen.insert(v.id).second) reader.fail("duplicate video id '" + v.id + "'");
        const std::string where = reader.where();
        auto resolve = [&](const char* key) { return base / reader.get<std::string>(rec, key); };

        const fs::path frames_path = resolve("frames");
        if (!fs::exists(frames_path)) throw IoError(where + ": missing file " + frames_path.string());
        load_frames(frames_path, v, c);
        if (rec.contains("tracks")) {
            const fs::path p = resolve("tracks");
            if (!fs::exists(p)) throw IoError(where + ": missing file " + p.string());
            load_tracks(p, v);
        }
        if (rec.contains("ground_truth")) {
            const fs::path p = resolve("ground_truth");
            if (!fs::exists(p)) throw IoError(where + ": missing file " + p.string());
            load_ground_truth(p, v, c.ground_truth);
        }
        c.videos.push_back(std::move(v));
    }
    std::sort(c.videos.begin(), c.videos.end(), [](const Video& a, const Video& b) { return a.id < b.id; });
    std::sort(c.ground_truth.begin(), c.ground_truth.end(),
              [](const GroundTruth& a, const GroundTruth& b) { return a.video_id < b.video_id; });
    return c;
}

void save_collection(const Collection& collection, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::map<std::string, const GroundTruth*> gt_by_video;
    for (const auto& gt : collection.ground_truth) gt_by_video[gt.video_id] = &gt;

    JsonlWriter manifest(out_dir / "manifest.jsonl");
    ordered_json head;
    head["record"] = "collection";
    head["version"] = kFormatVersion;
    head["descriptor_dim"] = collection.descriptor_dim;
    head["signature_dim"] = collection.signature_dim;
    manifest.write(head);

    for (std::size_t vi = 0; vi < collection.videos.size(); ++vi) {
        const Video& v = collection.videos[vi];
        const fs::path rel = fs::path("videos") / sanitize_component(vi);
        fs::create_directories(out_dir / rel, ec);
        if (ec) throw IoError("cannot create " + (out_dir / rel).string() + ": " + ec.message());

        ordered_json vr;
        vr["record"] = "video";
        vr["id"] = v.id;
        vr["length"] = v.length;
        vr["frames"] = (rel / "frames.jsonl").generic_string();
        vr["tracks"] = (rel / "tracks.jsonl").generic_string();

        JsonlWriter frames(out_dir / rel / "frames.jsonl");
        for (const Frame& f : v.frames) {
            ordered_json fr;
            fr["record"] = "frame";
            fr["frame_index"] = f.frame_index;
            fr["width"] = f.width;
            fr["height"] = f.height;
            fr["signature"] = f.signature.values();
            frames.write(fr);
            for (const Proposal& p : f.proposals) {
                ordered_json pr;
                pr["record"] = "proposal";
                pr["frame_index"] = f.frame_index;
                pr["id"] = p.id;
                pr["box"] = box_json(p.box);
                pr["descriptor"] = p.descriptor.values();
                frames.write(pr);
            }
        }
        frames.close();

        JsonlWriter tracks(out_dir / rel / "tracks.jsonl");
        for (const Track& t : v.tracks) {
            ordered_json tr;
            tr["record"] = "track";
            tr["id"] = t.id;
            tr["cluster"] = t.cluster_label;
            tr["start_frame"] = t.start_frame;
            ordered_json pts = ordered_json::array();
            for (const auto& p : t.points) pts.push_back(ordered_json::array({p.x, p.y}));
            tr["points"] = std::move(pts);
            tracks.write(tr);
        }
        tracks.close();

        if (auto it = gt_by_video.find(v.id); it != gt_by_video.end()) {
            vr["ground_truth"] = (rel / "ground_truth.jsonl").generic_string();
            JsonlWriter gt(out_dir / rel / "ground_truth.jsonl");
            ordered_json g;
            g["record"] = "ground_truth";
            g["frame_index"] = it->second->frame_index;
            g["box"] = box_json(it->second->box);
            g["class_label"] = it->second->class_label;
            gt.write(g);
            gt.close();
        }
        manifest.write(vr);
    }
    manifest.close();
}

std::vector<int> key_frames(int length, int stride) {
    if (stride < 1) throw ValidationError("key-frame stride must be >= 1");
    std::vector<int> out;
    out.push_back(0);
    for (int t = stride; t < length; t += stride) out.push_back(t);
    return out;
}

std::vector<int> key_frames(const Video& video, int stride) { return key_frames(video.length, stride); }

void validate_key_frames(const Collection& collection, int stride) {
    for (const Video& v : collection.videos) {
        for (int t : key_frames(v, stride)) {
            const Frame* f = v.find_frame(t);
            if (f == nullptr) {
                throw ValidationError("video '" + v.id + "': key frame " + std::to_string(t) +
                                      " has no frame record");
            }
            if (f->proposals.empty()) {
                throw ValidationError("video '" + v.id + "': key frame " + std::to_string(t) +
                                      " has no proposals");
            }
        }
    }
}

Box interpolate_tube_at(const Tube& tube, int frame_index) {
    if (tube.regions.empty()) throw ValidationError("tube of video '" + tube.video_id + "' has no regions");
    const auto& regions = tube.regions;
    if (frame_index <= regions.front().frame_index) return regions.front().box;
    if (frame_index >= regions.back().frame_index) return regions.back().box;
    auto hi = std::lower_bound(regions.begin(), regions.end(), frame_index,
                               [](const TubeRegion& r, int t) { return r.frame_index < t; });
    if (hi->frame_index == frame_index) return hi->box;
    auto lo = hi - 1;
    const double w = static_cast<double>(frame_index - lo->frame_index) /
                     static_cast<double>(hi->frame_index - lo->frame_index);
    auto lerp = [w](double a, double b) { return a + (b - a) * w; };
    return Box{lerp(lo->box.x_min, hi->box.x_min), lerp(lo->box.y_min, hi->box.y_min),
               lerp(lo->box.width, hi->box.width), lerp(lo->box.height, hi->box.height)};
}

std::map<int, Box> interpolate_tube(const Tube& tube, int video_length) {
    std::map<int, Box> out;
    for (int t = 0; t < video_length; ++t) out.emplace(t, interpolate_tube_at(tube, t));
    return out;
}

void save_tubes(const TubeSet& tubes, const fs::path& path) {
    std::size_t count = 0;
    for (const auto& [id, list] : tubes) count += list.size();

    JsonlWriter out(path);
    ordered_json head;
    head["record"] = "tubes";
    head["version"] = kFormatVersion;
    head["count"] = count;
    out.write(head);
    for (const auto& [id, list] : tubes) {
        for (std::size_t rank = 0; rank < list.size(); ++rank) {
            const Tube& tube = list[rank];
            for (const TubeRegion& r : tube.regions) {
                ordered_json rec;
                rec["record"] = "tube_region";
                rec["video_id"] = id;
                rec["rank"] = rank;
                rec["frame_index"] = r.frame_index;
                rec["proposal_id"] = r.proposal_id;
                rec["box"] = box_json(r.box);
                rec["score"] = tube.score;
                out.write(rec);
            }
        }
    }
    out.close();
}

TubeSet load_tubes(const fs::path& path) {
    JsonlReader reader(path);
    ordered_json rec;
    if (!reader.next(rec) || reader.record_type(rec) != "tubes") {
        throw ValidationError(path.string() + ": missing 'tubes' header record");
    }
    const auto declared = reader.get<std::size_t>(rec, "count");
    TubeSet out;
    while (reader.next(rec)) {
        if (reader.record_type(rec) != "tube_region") reader.fail("expected a tube_region record");
        const auto id = reader.get<std::string>(rec, "video_id");
        const auto rank = reader.get<std::size_t>(rec, "rank");
        auto& list = out[id];
        if (rank > list.size()) reader.fail("tube ranks must be contiguous");
        if (rank == list.size()) {
            list.emplace_back();
            list.back().video_id = id;
            list.back().score = reader.get<double>(rec, "score");
        }
        Tube& tube = list[rank];
        TubeRegion r;
        r.frame_index = reader.get<int>(rec, "frame_index");
        r.proposal_id = reader.get<int>(rec, "proposal_id");
        r.box = parse_box(reader, rec, "box");
        if (!tube.regions.empty() && tube.regions.back().frame_index >= r.frame_index) {
            reader.fail("tube regions must be in ascending frame order");
        }
        tube.regions.push_back(r);
    }
    std::size_t count = 0;
    for (const auto& [id, list] : out) count += list.size();
    if (count != declared) {
        throw ValidationError(path.string() + ": header declares " + std::to_string(declared) +
                              " tubes, found " + std::to_string(count));
    }
    return out;
}

void save_graph(const NeighborGraph& graph, std::span<const std::string> ids, const fs::path& path) {
    auto name = [&](std::size_t v) -> const std::string& {
        if (v >= ids.size()) throw ValidationError("graph refers to unknown video index " + std::to_string(v));
        return ids[v];
    };
    JsonlWriter out(path);
    ordered_json head;
    head["record"] = "neighbor_graph";
    head["version"] = kFormatVersion;
    head["count"] = graph.neighbors.size();
    out.write(head);
    for (const auto& [query, list] : graph.neighbors) {
        ordered_json rec;
        rec["record"] = "neighbors";
        rec["video_id"] = name(query.video);
        rec["frame_index"] = query.frame_index;
        ordered_json arr = ordered_json::array();
        for (const Neighbor& n : list) {
            ordered_json e;
            e["video_id"] = name(n.frame.video);
            e["frame_index"] = n.frame.frame_index;
            e["similarity"] = n.similarity;
            arr.push_back(std::move(e));
        }
        rec["neighbors"] = std::move(arr);
        out.write(rec);
    }
    out.close();
}

NeighborGraph load_graph(const fs::path& path, std::span<const std::string> ids) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

    JsonlReader reader(path);
    ordered_json rec;
    if (!reader.next(rec) || reader.record_type(rec) != "neighbor_graph") {
        throw ValidationError(path.string() + ": missing 'neighbor_graph' header record");
    }
    const auto declared = reader.get<std::size_t>(rec, "count");
    auto lookup = [&](const std::string& id) {
        auto it = index.find(id);
        if (it == index.end()) reader.fail("unknown video id '" + id + "'");
        return it->second;
    };
    NeighborGraph g;
    while (reader.next(rec)) {
        if (reader.record_type(rec) != "neighbors") reader.fail("expected a neighbors record");
        FrameRef q{lookup(reader.get<std::string>(rec, "video_id")), reader.get<int>(rec, "frame_index")};
        std::vector<Neighbor> list;
        auto arr = rec.find("neighbors");
        if (arr == rec.end() || !arr->is_array()) reader.fail("field 'neighbors' must be an array");
        for (const auto& e : *arr) {
            if (!e.is_object()) reader.fail("neighbor entries must be objects");
            Neighbor n;
            n.frame = FrameRef{lookup(reader.get<std::string>(e, "video_id")), reader.get<int>(e, "frame_index")};
            n.similarity = reader.get<double>(e, "similarity");
            if (n.frame.video == q.video) reader.fail("neighbor from the query's own video");
            list.push_back(n);
        }
        if (!g.neighbors.emplace(q, std::move(list)).second) reader.fail("duplicate query frame");
    }
    if (g.neighbors.size() != declared) {
        throw ValidationError(path.string() + ": header declares " + std::to_string(declared) +
                              " entries, found " + std::to_string(g.neighbors.size()));
    }
    return g;
}

void save_results(const TubeSet& tubes, const NeighborGraph& graph, std::span<const std::string> ids,
                  const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    save_tubes(tubes, out_dir / "tubes.jsonl");
    save_graph(graph, ids, out_dir / "graph.jsonl");
}

std::vector<std::string> video_ids(const Collection& collection) {
    std::vector<std::string> ids;
    ids.reserve(collection.videos.size());
    for (const auto& v : collection.videos) ids.push_back(v.id);
    return ids;
}

std::string pretty_print_artifact(const fs::path& path) {
    const bool whole_json = path.extension() == ".json";
    std::ostringstream os;
    if (whole_json) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        try {
            os << ordered_json::parse(in).dump(2) << '\n';
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(path.string() + ": " + e.what());
        }
        return os.str();
    }
    JsonlReader reader(path);
    ordered_json rec;
    std::size_t n = 0;
    while (reader.next(rec)) {
        os << "# " << reader.where() << '\n' << rec.dump(2) << '\n';
        ++n;
    }
    os << "# " << n << " record(s)\n";
    return os.str();
}

}  // namespace tubeloc
