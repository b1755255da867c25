#include "tubeloc/consistency.hpp"

#include "tubeloc/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace tubeloc {

UnitSquarePoint tau(const Point2& point, const Box& box) {
    return UnitSquarePoint{(point.x - box.x_min) / box.width, (point.y - box.y_min) / box.height};
}

double psi_appearance_raw(const Descriptor& a, const Descriptor& b) {
    return -std::sqrt(squared_distance(a, b));
}

std::vector<double> psi_appearance(std::span<const double> raw) { return rescale_unit(raw); }

namespace {

bool spans_both(const Track& t, int frame_from, int frame_to) {
    return t.alive_at(frame_from) && t.alive_at(frame_to);
}

double mean_half_l1(const Box& box_from, int frame_from, const Box& box_to, int frame_to,
                    std::span<const Track* const> shared) {
    long double sum = 0.0L;
    for (const Track* t : shared) {
        const UnitSquarePoint a = tau(t->at(frame_from), box_from);
        const UnitSquarePoint b = tau(t->at(frame_to), box_to);
        sum += std::abs(a.u - b.u) + std::abs(a.v - b.v);
    }
    return -static_cast<double>(sum / (2.0L * static_cast<long double>(shared.size())));
}

}  // namespace

std::vector<const Track*> shared_tracks(std::span<const Track> tracks, const Box& box_from, int frame_from,
                                        const Box& box_to, int frame_to) {
    std::vector<const Track*> out;
    for (const Track& t : tracks) {
        if (!spans_both(t, frame_from, frame_to)) continue;
        const Point2& a = t.at(frame_from);
        const Point2& b = t.at(frame_to);
        if (box_from.contains(a.x, a.y) && box_to.contains(b.x, b.y)) out.push_back(&t);
    }
    return out;
}

double psi_motion(const Box& box_from, int frame_from, const Box& box_to, int frame_to,
                  std::span<const Track* const> shared, double theta) {
    if (shared.empty()) return theta;
    return mean_half_l1(box_from, frame_from, box_to, frame_to, shared);
}

double psi_motion(const Box& box_from, int frame_from, const Box& box_to, int frame_to,
                  std::span<const Track> tracks, double theta) {
    const auto shared = shared_tracks(tracks, box_from, frame_from, box_to, frame_to);
    return psi_motion(box_from, frame_from, box_to, frame_to, shared, theta);
}

TransitionScores transition_scores(std::span<const Proposal* const> from, int frame_from,
                                   std::span<const Proposal* const> to, int frame_to,
                                   std::span<const Track> tracks, double theta) {
    TransitionScores out;
    out.rows = from.size();
    out.cols = to.size();
    const std::size_t n = out.rows * out.cols;

    std::vector<double> raw(n);
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (std::size_t j = 0; j < out.cols; ++j) {
            raw[i * out.cols + j] = psi_appearance_raw(from[i]->descriptor, to[j]->descriptor);
        }
    }
    out.psi_a = psi_appearance(raw);

    // Tracks alive at both key frames, and for each box the (ascending)
    // positions of those tracks whose point it contains.
    std::vector<const Track*> live;
    for (const Track& t : tracks) {
        if (spans_both(t, frame_from, frame_to)) live.push_back(&t);
    }
    auto members = [&](const Box& box, int frame) {
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < live.size(); ++k) {
            const Point2& p = live[k]->at(frame);
            if (box.contains(p.x, p.y)) idx.push_back(k);
        }
        return idx;
    };
    std::vector<std::vector<std::size_t>> in_from(out.rows);
    std::vector<std::vector<std::size_t>> in_to(out.cols);
    for (std::size_t i = 0; i < out.rows; ++i) in_from[i] = members(from[i]->box, frame_from);
    for (std::size_t j = 0; j < out.cols; ++j) in_to[j] = members(to[j]->box, frame_to);

    out.psi_m.resize(n);
    out.total.resize(n);
    std::vector<std::size_t> common;
    std::vector<const Track*> shared;
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (std::size_t j = 0; j < out.cols; ++j) {
            common.clear();
            std::set_intersection(in_from[i].begin(), in_from[i].end(), in_to[j].begin(), in_to[j].end(),
                                  std::back_inserter(common));
            shared.clear();
            for (std::size_t k : common) shared.push_back(live[k]);
            const std::size_t at = i * out.cols + j;
            out.psi_m[at] = psi_motion(from[i]->box, frame_from, to[j]->box, frame_to, shared, theta);
            out.total[at] = psi_total(out.psi_a[at], out.psi_m[at]);
        }
    }
    return out;
}

}  // namespace tubeloc
