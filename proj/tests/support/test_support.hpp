#pragma once

#include "tubeloc/appearance.hpp"
#include "tubeloc/tube_solver.hpp"
#include "tubeloc/types.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace tubeloc::testing {

inline Descriptor unit(std::size_t dim, std::size_t axis) {
    std::vector<double> v(dim, 0.0);
    v[axis] = 1.0;
    return Descriptor(std::move(v));
}

inline Descriptor random_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(dim);
    double s = 0.0;
    for (double& x : v) {
        x = n(rng);
        s += x * x;
    }
    for (double& x : v) x /= std::sqrt(s);
    return Descriptor(std::move(v));
}

inline Box random_box(std::mt19937_64& rng, double width, double height) {
    std::uniform_real_distribution<double> frac(0.05, 0.6);
    const double w = frac(rng) * width;
    const double h = frac(rng) * height;
    std::uniform_real_distribution<double> x(0.0, width - w);
    std::uniform_real_distribution<double> y(0.0, height - h);
    return Box{x(rng), y(rng), w, h};
}

inline RegionSet random_region_set(std::mt19937_64& rng, std::size_t count, std::size_t dim) {
    RegionSet set{320.0, 240.0, {}};
    for (std::size_t i = 0; i < count; ++i) {
        set.proposals.push_back(Proposal{static_cast<int>(i), random_box(rng, 320.0, 240.0), random_unit(rng, dim)});
    }
    return set;
}

/// Random chain instance: T frames, up to `max_candidates` per frame,
/// phi in [0,1], psi in [-2,1].
inline Trellis random_trellis(std::mt19937_64& rng, int max_frames, int max_candidates) {
    std::uniform_int_distribution<int> frames(1, max_frames);
    std::uniform_int_distribution<int> cands(1, max_candidates);
    std::uniform_real_distribution<double> phi(0.0, 1.0);
    std::uniform_real_distribution<double> psi(-2.0, 1.0);
    const int T = frames(rng);
    std::vector<int> indices;
    std::vector<std::vector<Candidate>> candidates;
    for (int t = 0; t < T; ++t) {
        indices.push_back(20 * t);
        std::vector<int> ids(static_cast<std::size_t>(2 * max_candidates));
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
        std::shuffle(ids.begin(), ids.end(), rng);
        std::vector<Candidate> list;
        const int n = cands(rng);
        for (int i = 0; i < n; ++i) list.push_back(Candidate{ids[static_cast<std::size_t>(i)], phi(rng)});
        candidates.push_back(std::move(list));
    }
    std::vector<std::vector<double>> pairwise;
    for (int t = 0; t + 1 < T; ++t) {
        std::vector<double> m(candidates[static_cast<std::size_t>(t)].size() *
                              candidates[static_cast<std::size_t>(t + 1)].size());
        for (double& x : m) x = psi(rng);
        pairwise.push_back(std::move(m));
    }
    return Trellis(std::move(indices), std::move(candidates), std::move(pairwise));
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("tubeloc-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace tubeloc::testing
