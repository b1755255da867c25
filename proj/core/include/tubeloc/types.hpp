#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tubeloc {

/// Axis-aligned box in pixel coordinates, stored as corner + size so that
/// linear interpolation between key frames is exact.
struct Box {
    double x_min = 0.0;
    double y_min = 0.0;
    double width = 0.0;
    double height = 0.0;

    double x_max() const { return x_min + width; }
    double y_max() const { return y_min + height; }
    double area() const { return width * height; }
    double center_x() const { return x_min + 0.5 * width; }
    double center_y() const { return y_min + 0.5 * height; }

    /// Inclusive point test.
    bool contains(double x, double y) const {
        return x >= x_min && x <= x_max() && y >= y_min && y <= y_max();
    }

    bool valid() const;

    friend bool operator==(const Box&, const Box&) = default;
};

double intersection_area(const Box& a, const Box& b);

/// Fraction of `inner`'s area that lies inside `outer`.
double coverage(const Box& inner, const Box& outer);

/// Opaque appearance vector. Ingestion normalizes to unit L2 norm.
class Descriptor {
public:
    Descriptor() = default;
    explicit Descriptor(std::vector<double> values) : values_(std::move(values)) {}

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double norm() const;

    /// Divides by the L2 norm unless the vector is already unit length to
    /// within 1e-12 (so that reloaded descriptors stay bit-identical).
    /// Returns false for a zero or non-finite vector.
    bool normalize();

    friend bool operator==(const Descriptor&, const Descriptor&) = default;

private:
    std::vector<double> values_;
};

double squared_distance(const Descriptor& a, const Descriptor& b);

struct Proposal {
    int id = 0;
    Box box;
    Descriptor descriptor;

    friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct Frame {
    int frame_index = 0;
    double width = 0.0;
    double height = 0.0;
    std::vector<Proposal> proposals;
    Descriptor signature;

    Box bounds() const { return Box{0.0, 0.0, width, height}; }
    const Proposal* find_proposal(int id) const;

    friend bool operator==(const Frame&, const Frame&) = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Long-term point track. Points cover frames [start_frame, start_frame + points.size()).
struct Track {
    int id = 0;
    int cluster_label = 0;
    int start_frame = 0;
    std::vector<Point2> points;

    int end_frame() const { return start_frame + static_cast<int>(points.size()); }
    bool alive_at(int frame_index) const {
        return frame_index >= start_frame && frame_index < end_frame();
    }
    const Point2& at(int frame_index) const {
        return points[static_cast<std::size_t>(frame_index - start_frame)];
    }

    friend bool operator==(const Track&, const Track&) = default;
};

struct GroundTruth {
    std::string video_id;
    int frame_index = 0;
    Box box;
    std::string class_label;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Video {
    std::string id;
    int length = 0;
    /// Sorted by frame_index. Only frames that carry records are present;
    /// key frames must be among them.
    std::vector<Frame> frames;
    std::vector<Track> tracks;

    const Frame* find_frame(int frame_index) const;
    const Frame& frame(int frame_index) const;

    friend bool operator==(const Video&, const Video&) = default;
};

/// Immutable after load. Videos are sorted by id.
struct Collection {
    std::size_t descriptor_dim = 0;
    std::size_t signature_dim = 0;
    std::vector<Video> videos;
    /// Evaluation-only annotations; the discovery pipeline never reads them.
    std::vector<GroundTruth> ground_truth;

    std::optional<std::size_t> video_index(const std::string& id) const;

    friend bool operator==(const Collection&, const Collection&) = default;
};

/// Proposal id used by tubes that select the whole frame rather than a
/// proposal (the initial state of discovery).
inline constexpr int kWholeFrame = -1;

struct TubeRegion {
    int frame_index = 0;
    int proposal_id = kWholeFrame;
    Box box;

    friend bool operator==(const TubeRegion&, const TubeRegion&) = default;
};

/// One region per key frame of one video, plus its objective value.
struct Tube {
    std::string video_id;
    std::vector<TubeRegion> regions;  // ascending frame_index
    double score = 0.0;

    const TubeRegion* region_at(int frame_index) const;

    friend bool operator==(const Tube&, const Tube&) = default;
};

struct FrameRef {
    std::size_t video = 0;  // index into Collection::videos
    int frame_index = 0;

    friend auto operator<=>(const FrameRef&, const FrameRef&) = default;
};

struct Neighbor {
    FrameRef frame;
    double similarity = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Per key frame: up to k neighbor frames from other videos, by similarity
/// descending.
struct NeighborGraph {
    std::map<FrameRef, std::vector<Neighbor>> neighbors;

    const std::vector<Neighbor>& of(const FrameRef& query) const;

    friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;
};

}  // namespace tubeloc
