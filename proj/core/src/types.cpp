#include "tubeloc/types.hpp"

#include "tubeloc/error.hpp"

#include <algorithm>
#include <cmath>

namespace tubeloc {

bool Box::valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(width) &&
           std::isfinite(height) && width > 0.0 && height > 0.0;
}

double intersection_area(const Box& a, const Box& b) {
    const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min, b.x_min);
    const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min, b.y_min);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

double coverage(const Box& inner, const Box& outer) {
    const double area = inner.area();
    if (area <= 0.0) return 0.0;
    return intersection_area(inner, outer) / area;
}

double Descriptor::norm() const {
    double sum = 0.0;
    for (double v : values_) sum += v * v;
    return std::sqrt(sum);
}

bool Descriptor::normalize() {
    if (values_.empty()) return false;
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) return false;
    if (std::abs(n - 1.0) <= 1e-12) return true;
    for (double& v : values_) v /= n;
    return true;
}

double squared_distance(const Descriptor& a, const Descriptor& b) {
    if (a.size() != b.size()) {
        throw ValidationError("descriptor dimension mismatch: " + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

const Proposal* Frame::find_proposal(int id) const {
    for (const auto& p : proposals) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

const Frame* Video::find_frame(int frame_index) const {
    auto it = std::lower_bound(frames.begin(), frames.end(), frame_index,
                               [](const Frame& f, int idx) { return f.frame_index < idx; });
    if (it == frames.end() || it->frame_index != frame_index) return nullptr;
    return &*it;
}

const Frame& Video::frame(int frame_index) const {
    const Frame* f = find_frame(frame_index);
    if (f == nullptr) {
        throw ValidationError("video '" + id + "' has no record for frame " +
                              std::to_string(frame_index));
    }
    return *f;
}

std::optional<std::size_t> Collection::video_index(const std::string& id) const {
    auto it = std::lower_bound(videos.begin(), videos.end(), id,
                               [](const Video& v, const std::string& key) { return v.id < key; });
    if (it == videos.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - videos.begin());
}

const TubeRegion* Tube::region_at(int frame_index) const {
    for (const auto& r : regions) {
        if (r.frame_index == frame_index) return &r;
    }
    return nullptr;
}

const std::vector<Neighbor>& NeighborGraph::of(const FrameRef& query) const {
    static const std::vector<Neighbor> kEmpty;
    auto it = neighbors.find(query);
    return it == neighbors.end() ? kEmpty : it->second;
}

}  // namespace tubeloc
