#include "tubeloc/tube_solver.hpp"

#include "tubeloc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace tubeloc {

namespace {

// Values within this distance count as ties and fall through to the
// proposal-id comparison.
constexpr long double kTieEps = 1e-12L;

bool better(long double value, int id, long double best_value, int best_id) {
    if (value > best_value + kTieEps) return true;
    if (value < best_value - kTieEps) return false;
    return id < best_id;
}

}  // namespace

Trellis::Trellis(std::vector<int> frame_indices, std::vector<std::vector<Candidate>> candidates,
                 std::vector<std::vector<double>> pairwise)
    : frame_indices_(std::move(frame_indices)),
      candidates_(std::move(candidates)),
      pairwise_(std::move(pairwise)) {
    if (frame_indices_.size() != candidates_.size()) {
        throw ValidationError("trellis: frame index count does not match candidate lists");
    }
    const std::size_t transitions = candidates_.empty() ? 0 : candidates_.size() - 1;
    if (pairwise_.size() != transitions) throw ValidationError("trellis: wrong number of transitions");
    for (std::size_t t = 0; t < transitions; ++t) {
        if (pairwise_[t].size() != candidates_[t].size() * candidates_[t + 1].size()) {
            throw ValidationError("trellis: pairwise matrix " + std::to_string(t) + " has wrong size");
        }
    }
}

bool Trellis::any_frame_empty() const {
    return std::any_of(candidates_.begin(), candidates_.end(), [](const auto& c) { return c.empty(); });
}

std::size_t Trellis::find(std::size_t t, int proposal_id) const {
    const auto& c = candidates_[t];
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i].proposal_id == proposal_id) return i;
    }
    return static_cast<std::size_t>(-1);
}

Trellis Trellis::without(std::span<const int> proposal_ids) const {
    if (proposal_ids.size() != candidates_.size()) {
        throw ValidationError("trellis: removal needs one proposal id per frame");
    }
    const std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> removed(candidates_.size());
    std::vector<std::vector<Candidate>> cands(candidates_.size());
    for (std::size_t t = 0; t < candidates_.size(); ++t) {
        removed[t] = find(t, proposal_ids[t]);
        for (std::size_t i = 0; i < candidates_[t].size(); ++i) {
            if (i != removed[t]) cands[t].push_back(candidates_[t][i]);
        }
    }
    std::vector<std::vector<double>> pairs(pairwise_.size());
    for (std::size_t t = 0; t < pairwise_.size(); ++t) {
        const std::size_t rows = candidates_[t].size();
        const std::size_t cols = candidates_[t + 1].size();
        pairs[t].reserve(cands[t].size() * cands[t + 1].size());
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == removed[t] && removed[t] != npos) continue;
            for (std::size_t j = 0; j < cols; ++j) {
                if (j == removed[t + 1] && removed[t + 1] != npos) continue;
                pairs[t].push_back(pairwise_[t][i * cols + j]);
            }
        }
    }
    return Trellis(frame_indices_, std::move(cands), std::move(pairs));
}

double Trellis::objective(std::span<const int> proposal_ids, double lambda) const {
    if (proposal_ids.size() != candidates_.size()) {
        throw ValidationError("trellis: sequence length does not match frame count");
    }
    const std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> idx(proposal_ids.size());
    long double unary = 0.0L;
    for (std::size_t t = 0; t < idx.size(); ++t) {
        idx[t] = find(t, proposal_ids[t]);
        if (idx[t] == npos) {
            throw ValidationError("trellis: proposal " + std::to_string(proposal_ids[t]) +
                                  " is not a candidate of frame " + std::to_string(frame_indices_[t]));
        }
        unary += candidates_[t][idx[t]].phi;
    }
    long double pairwise = 0.0L;
    for (std::size_t t = 0; t + 1 < idx.size(); ++t) pairwise += psi(t, idx[t], idx[t + 1]);
    return static_cast<double>(unary + static_cast<long double>(lambda) * pairwise);
}

void Trellis::dump(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t t = 0; t < candidates_.size(); ++t) {
        nlohmann::ordered_json rec;
        rec["record"] = "trellis_frame";
        rec["frame_index"] = frame_indices_[t];
        auto arr = nlohmann::ordered_json::array();
        for (const Candidate& c : candidates_[t]) {
            arr.push_back(nlohmann::ordered_json{{"proposal_id", c.proposal_id}, {"phi", c.phi}});
        }
        rec["candidates"] = std::move(arr);
        if (t + 1 < candidates_.size()) rec["psi"] = pairwise_[t];
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Trellis build_trellis(std::vector<int> frame_indices, std::vector<std::vector<Candidate>> unary,
                      int top_candidates, const PairwiseScorer& pairwise) {
    if (top_candidates < 1) throw ValidationError("build_trellis: top_candidates must be >= 1");
    for (std::size_t t = 0; t < unary.size(); ++t) {
        auto& c = unary[t];
        if (c.empty()) {
            throw ValidationError("build_trellis: frame " + std::to_string(frame_indices.at(t)) +
                                  " has no proposals");
        }
        std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
            if (a.phi != b.phi) return a.phi > b.phi;
            return a.proposal_id < b.proposal_id;
        });
        if (c.size() > static_cast<std::size_t>(top_candidates)) c.resize(static_cast<std::size_t>(top_candidates));
    }
    std::vector<std::vector<double>> pairs;
    for (std::size_t t = 0; t + 1 < unary.size(); ++t) pairs.push_back(pairwise(t, unary[t], unary[t + 1]));
    return Trellis(std::move(frame_indices), std::move(unary), std::move(pairs));
}

TubeSolution solve_best_tube(const Trellis& trellis, double lambda) {
    const std::size_t T = trellis.frame_count();
    TubeSolution sol;
    sol.frame_indices = trellis.frame_indices();
    if (T == 0) return sol;
    if (trellis.any_frame_empty()) throw ValidationError("solve_best_tube: a frame has no candidates");

    const long double lam = lambda;
    // suffix[t][i]: best objective of frames t..T-1 starting at candidate i.
    std::vector<std::vector<long double>> suffix(T);
    {
        const auto last = trellis.candidates(T - 1);
        suffix[T - 1].resize(last.size());
        for (std::size_t i = 0; i < last.size(); ++i) suffix[T - 1][i] = last[i].phi;
    }
    for (std::size_t t = T - 1; t-- > 0;) {
        const auto here = trellis.candidates(t);
        const auto next = trellis.candidates(t + 1);
        suffix[t].resize(here.size());
        for (std::size_t i = 0; i < here.size(); ++i) {
            long double best = -std::numeric_limits<long double>::infinity();
            for (std::size_t j = 0; j < next.size(); ++j) {
                best = std::max(best, lam * trellis.psi(t, i, j) + suffix[t + 1][j]);
            }
            suffix[t][i] = here[i].phi + best;
        }
    }

    // Forward pass: smallest proposal id among (near-)optimal continuations.
    std::size_t cur = 0;
    {
        const auto first = trellis.candidates(0);
        for (std::size_t i = 1; i < first.size(); ++i) {
            if (better(suffix[0][i], first[i].proposal_id, suffix[0][cur], first[cur].proposal_id)) cur = i;
        }
    }
    sol.objective = static_cast<double>(suffix[0][cur]);
    sol.proposal_ids.push_back(trellis.candidates(0)[cur].proposal_id);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const auto next = trellis.candidates(t + 1);
        std::size_t pick = 0;
        long double pick_value = lam * trellis.psi(t, cur, 0) + suffix[t + 1][0];
        for (std::size_t j = 1; j < next.size(); ++j) {
            const long double v = lam * trellis.psi(t, cur, j) + suffix[t + 1][j];
            if (better(v, next[j].proposal_id, pick_value, next[pick].proposal_id)) {
                pick = j;
                pick_value = v;
            }
        }
        cur = pick;
        sol.proposal_ids.push_back(next[cur].proposal_id);
    }
    return sol;
}

std::vector<TubeSolution> solve_p_best(const Trellis& trellis, int p, double lambda) {
    if (p < 1) throw ValidationError("solve_p_best: p must be >= 1");
    std::vector<TubeSolution> out;
    Trellis residual = trellis;
    for (int round = 0; round < p; ++round) {
        if (residual.frame_count() == 0 || residual.any_frame_empty()) break;
        TubeSolution sol = solve_best_tube(residual, lambda);
        residual = residual.without(sol.proposal_ids);
        out.push_back(std::move(sol));
    }
    return out;
}

Tube to_tube(const TubeSolution& solution, const Video& video) {
    Tube tube;
    tube.video_id = video.id;
    tube.score = solution.objective;
    for (std::size_t t = 0; t < solution.frame_indices.size(); ++t) {
        const Frame& f = video.frame(solution.frame_indices[t]);
        const Proposal* p = f.find_proposal(solution.proposal_ids[t]);
        if (p == nullptr) {
            throw ValidationError("video '" + video.id + "': proposal " + std::to_string(solution.proposal_ids[t]) +
                                  " not in frame " + std::to_string(f.frame_index));
        }
        tube.regions.push_back(TubeRegion{f.frame_index, p->id, p->box});
    }
    return tube;
}

}  // namespace tubeloc
