#include "tubeloc/appearance.hpp"

#include "tubeloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace tubeloc {

Location location_of(const Box& box, double frame_width, double frame_height) {
    return Location{box.center_x() / frame_width, box.center_y() / frame_height,
                    0.5 * std::log(box.area() / (frame_width * frame_height))};
}

Offset offset_between(const Location& a, const Location& b) {
    return Offset{a.u - b.u, a.v - b.v, a.s - b.s};
}

RegionSet region_set(const Frame& frame) {
    return RegionSet{frame.width, frame.height, frame.proposals};
}

RegionSet region_set(const Frame& frame, std::span<const std::size_t> subset) {
    RegionSet out{frame.width, frame.height, {}};
    out.proposals.reserve(subset.size());
    for (std::size_t i : subset) out.proposals.push_back(frame.proposals.at(i));
    return out;
}

double appearance_affinity(const Descriptor& a, const Descriptor& b, double gamma) {
    return std::exp(-gamma * squared_distance(a, b));
}

double geometry_likelihood(const Offset& offset, const Offset& center, const HoughParams& params) {
    const double su = params.bandwidth_scale * params.translation_bin_width();
    const double ss = params.bandwidth_scale * params.scale_bin_width();
    const double du = (offset.du - center.du) / su;
    const double dv = (offset.dv - center.dv) / su;
    const double ds = (offset.ds - center.ds) / ss;
    return std::exp(-0.5 * (du * du + dv * dv + ds * ds));
}

HoughGrid::HoughGrid(const HoughParams& params)
    : params_(params),
      votes_(static_cast<std::size_t>(params.translation_bins) *
                 static_cast<std::size_t>(params.translation_bins) *
                 static_cast<std::size_t>(params.scale_bins),
             0.0) {}

double HoughGrid::translation_center(int i) const {
    return -params_.translation_range + (i + 0.5) * params_.translation_bin_width();
}

double HoughGrid::scale_center(int i) const {
    return -params_.scale_range + (i + 0.5) * params_.scale_bin_width();
}

Offset HoughGrid::center(int iu, int iv, int is) const {
    return Offset{translation_center(iu), translation_center(iv), scale_center(is)};
}

void HoughGrid::dump(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# hough_grid translation_bins=" << params_.translation_bins
        << " scale_bins=" << params_.scale_bins << '\n';
    char line[160];
    for (int iu = 0; iu < params_.translation_bins; ++iu) {
        for (int iv = 0; iv < params_.translation_bins; ++iv) {
            for (int is = 0; is < params_.scale_bins; ++is) {
                const Offset c = center(iu, iv, is);
                std::snprintf(line, sizeof(line), "%d %d %d %.9g %.9g %.9g %.17g\n", iu, iv, is, c.du,
                              c.dv, c.ds, at(iu, iv, is));
                out << line;
            }
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

double MatchScoreTable::row_max(std::size_t r) const {
    double best = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) best = std::max(best, (*this)(r, c));
    return best;
}

namespace {

/// Per-axis Gaussian factors of one match offset against every bin center.
struct AxisFactors {
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> s;

    AxisFactors(const HoughGrid& grid, const Offset& o) {
        const HoughParams& p = grid.params();
        const double su = p.bandwidth_scale * p.translation_bin_width();
        const double ss = p.bandwidth_scale * p.scale_bin_width();
        u.resize(static_cast<std::size_t>(p.translation_bins));
        v.resize(u.size());
        s.resize(static_cast<std::size_t>(p.scale_bins));
        for (int i = 0; i < p.translation_bins; ++i) {
            const double c = grid.translation_center(i);
            const double zu = (o.du - c) / su;
            const double zv = (o.dv - c) / su;
            u[static_cast<std::size_t>(i)] = std::exp(-0.5 * zu * zu);
            v[static_cast<std::size_t>(i)] = std::exp(-0.5 * zv * zv);
        }
        for (int i = 0; i < p.scale_bins; ++i) {
            const double z = (o.ds - grid.scale_center(i)) / ss;
            s[static_cast<std::size_t>(i)] = std::exp(-0.5 * z * z);
        }
    }
};

Offset match_offset(const RegionSet& a, const Proposal& pa, const RegionSet& b, const Proposal& pb) {
    return offset_between(location_of(pa.box, a.frame_width, a.frame_height),
                          location_of(pb.box, b.frame_width, b.frame_height));
}

}  // namespace

HoughGrid hough_vote(const RegionSet& query, const RegionSet& candidate, const Config& config) {
    if (query.proposals.empty() || candidate.proposals.empty()) {
        throw ValidationError("hough_vote: empty proposal set");
    }
    HoughGrid grid(config.hough);
    auto votes = grid.mutable_votes();
    const std::size_t nv = static_cast<std::size_t>(grid.translation_bins());
    const std::size_t ns = static_cast<std::size_t>(grid.scale_bins());
    for (const Proposal& pt : query.proposals) {
        for (const Proposal& pu : candidate.proposals) {
            const double a = appearance_affinity(pt.descriptor, pu.descriptor, config.affinity_gamma);
            if (a == 0.0) continue;
            const AxisFactors f(grid, match_offset(query, pt, candidate, pu));
            std::size_t idx = 0;
            for (double fu : f.u) {
                const double au = a * fu;
                for (std::size_t iv = 0; iv < nv; ++iv) {
                    const double auv = au * f.v[iv];
                    for (std::size_t is = 0; is < ns; ++is, ++idx) votes[idx] += auv * f.s[is];
                }
            }
        }
    }
    return grid;
}

MatchScoreTable match_confidence(const RegionSet& query, const RegionSet& candidate,
                                 const HoughGrid& grid, const Config& config) {
    MatchScoreTable table(query.proposals.size(), candidate.proposals.size());
    const auto votes = grid.votes();
    const std::size_t nv = static_cast<std::size_t>(grid.translation_bins());
    const std::size_t ns = static_cast<std::size_t>(grid.scale_bins());
    for (std::size_t r = 0; r < query.proposals.size(); ++r) {
        const Proposal& pt = query.proposals[r];
        for (std::size_t c = 0; c < candidate.proposals.size(); ++c) {
            const Proposal& pu = candidate.proposals[c];
            const double a = appearance_affinity(pt.descriptor, pu.descriptor, config.affinity_gamma);
            if (a == 0.0) continue;
            const AxisFactors f(grid, match_offset(query, pt, candidate, pu));
            double total = 0.0;
            std::size_t idx = 0;
            for (double fu : f.u) {
                double over_v = 0.0;
                for (std::size_t iv = 0; iv < nv; ++iv) {
                    double over_s = 0.0;
                    for (std::size_t is = 0; is < ns; ++is, ++idx) over_s += f.s[is] * votes[idx];
                    over_v += f.v[iv] * over_s;
                }
                total += fu * over_v;
            }
            table(r, c) = a * total;
        }
    }
    return table;
}

MatchScoreTable phm_match(const RegionSet& query, const RegionSet& candidate, const Config& config) {
    return match_confidence(query, candidate, hough_vote(query, candidate, config), config);
}

std::vector<double> region_saliency(std::span<const MatchScoreTable> tables) {
    if (tables.empty()) throw ValidationError("region_saliency: empty neighbor list");
    std::vector<double> g(tables.front().rows(), 0.0);
    for (const MatchScoreTable& t : tables) {
        if (t.rows() != g.size()) throw ValidationError("region_saliency: inconsistent table sizes");
        if (t.cols() == 0) throw ValidationError("region_saliency: empty neighbor proposal subset");
        for (std::size_t r = 0; r < g.size(); ++r) g[r] += t.row_max(r);
    }
    return g;
}

bool strictly_contains(const Box& outer, const Box& inner) {
    return coverage(inner, outer) >= 0.99 && outer.area() > inner.area() * 1.01;
}

std::vector<double> standout_scores(std::span<const Box> boxes, std::span<const double> saliency) {
    if (boxes.size() != saliency.size()) throw ValidationError("standout_scores: size mismatch");
    std::vector<double> s(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        double background = 0.0;
        bool any = false;
        for (std::size_t j = 0; j < boxes.size(); ++j) {
            if (j == i || !strictly_contains(boxes[j], boxes[i])) continue;
            background = any ? std::max(background, saliency[j]) : saliency[j];
            any = true;
        }
        s[i] = saliency[i] - background;
    }
    return s;
}

std::vector<double> rescale_unit(std::span<const double> values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
    return out;
}

std::vector<double> standout_phi_a(const Frame& frame, std::span<const MatchScoreTable> tables) {
    if (tables.empty()) return std::vector<double>(frame.proposals.size(), 0.0);
    const std::vector<double> g = region_saliency(tables);
    std::vector<Box> boxes;
    boxes.reserve(frame.proposals.size());
    for (const auto& p : frame.proposals) boxes.push_back(p.box);
    return rescale_unit(standout_scores(boxes, g));
}

}  // namespace tubeloc
