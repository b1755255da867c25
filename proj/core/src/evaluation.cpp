#include "tubeloc/evaluation.hpp"

#include "tubeloc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace tubeloc {

namespace {

ClassScores finish(const std::map<std::string, std::pair<double, int>>& sums) {
    ClassScores out;
    double total = 0.0;
    for (const auto& [label, acc] : sums) {
        const double v = acc.second == 0 ? 0.0 : acc.first / acc.second;
        out.per_class[label] = v;
        total += v;
    }
    out.average = out.per_class.empty() ? 0.0 : total / static_cast<double>(out.per_class.size());
    return out;
}

const std::optional<std::string>& label_of(const VideoLabels& labels, std::size_t video) {
    static const std::optional<std::string> kNone;
    return video < labels.size() ? labels[video] : kNone;
}

constexpr const char* kUnlabeled = "?";

}  // namespace

double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (!(uni > 0.0)) return 0.0;
    return inter / uni;
}

ClassScores corloc(const TubeSet& tubes, std::span<const GroundTruth> ground_truth) {
    std::map<std::string, std::pair<double, int>> sums;
    for (const GroundTruth& gt : ground_truth) {
        auto it = tubes.find(gt.video_id);
        if (it == tubes.end() || it->second.empty()) {
            throw ValidationError("annotated video '" + gt.video_id + "' has no predicted tube");
        }
        const Box predicted = interpolate_tube_at(it->second.front(), gt.frame_index);
        auto& acc = sums[gt.class_label];
        acc.first += iou(predicted, gt.box) > 0.5 ? 100.0 : 0.0;
        acc.second += 1;
    }
    return finish(sums);
}

VideoLabels video_labels(const Collection& collection) {
    VideoLabels labels(collection.videos.size());
    for (const GroundTruth& gt : collection.ground_truth) {
        if (auto v = collection.video_index(gt.video_id)) labels[*v] = gt.class_label;
    }
    return labels;
}

ClassScores corret(const NeighborGraph& graph, const VideoLabels& labels) {
    std::map<std::string, std::pair<double, int>> sums;
    for (const auto& [query, list] : graph.neighbors) {
        const auto& ql = label_of(labels, query.video);
        if (!ql || list.empty()) continue;
        int same = 0;
        for (const Neighbor& n : list) {
            const auto& nl = label_of(labels, n.frame.video);
            if (nl && *nl == *ql) ++same;
        }
        auto& acc = sums[*ql];
        acc.first += 100.0 * same / static_cast<double>(list.size());
        acc.second += 1;
    }
    return finish(sums);
}

ClassScores topk_error(const NeighborGraph& graph, const VideoLabels& labels, int k_labels) {
    struct Tally {
        int count = 0;
        double similarity = 0.0;
    };
    std::map<std::size_t, std::map<std::string, Tally>> per_video;
    std::set<std::size_t> queried;
    for (const auto& [query, list] : graph.neighbors) {
        if (!label_of(labels, query.video)) continue;
        queried.insert(query.video);
        auto& tallies = per_video[query.video];
        for (const Neighbor& n : list) {
            const auto& nl = label_of(labels, n.frame.video);
            Tally& t = tallies[nl ? *nl : kUnlabeled];
            ++t.count;
            t.similarity += n.similarity;
        }
    }
    std::map<std::string, std::pair<double, int>> sums;
    for (std::size_t v : queried) {
        const std::string& truth = *label_of(labels, v);
        std::vector<std::pair<std::string, Tally>> ranked(per_video[v].begin(), per_video[v].end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second.count != b.second.count) return a.second.count > b.second.count;
            if (a.second.similarity != b.second.similarity) return a.second.similarity > b.second.similarity;
            return a.first < b.first;
        });
        bool hit = false;
        for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(std::max(k_labels, 0)); ++i) {
            hit = hit || ranked[i].first == truth;
        }
        auto& acc = sums[truth];
        acc.first += hit ? 0.0 : 100.0;
        acc.second += 1;
    }
    return finish(sums);
}

ConfusionMatrix confusion_matrix(const NeighborGraph& graph, const VideoLabels& labels) {
    std::set<std::string> rows;
    std::set<std::string> cols;
    bool unlabeled = false;
    for (const auto& l : labels) {
        if (l) cols.insert(*l);
    }
    for (const auto& [query, list] : graph.neighbors) {
        const auto& ql = label_of(labels, query.video);
        if (!ql || list.empty()) continue;
        rows.insert(*ql);
        for (const Neighbor& n : list) unlabeled = unlabeled || !label_of(labels, n.frame.video);
    }
    ConfusionMatrix m;
    m.row_labels.assign(rows.begin(), rows.end());
    m.col_labels.assign(cols.begin(), cols.end());
    if (unlabeled) m.col_labels.push_back(kUnlabeled);
    auto col_index = [&](const std::string& l) {
        return static_cast<std::size_t>(std::find(m.col_labels.begin(), m.col_labels.end(), l) - m.col_labels.begin());
    };
    auto row_index = [&](const std::string& l) {
        return static_cast<std::size_t>(std::find(m.row_labels.begin(), m.row_labels.end(), l) - m.row_labels.begin());
    };
    m.values.assign(m.row_labels.size(), std::vector<double>(m.col_labels.size(), 0.0));
    std::vector<int> frames(m.row_labels.size(), 0);
    for (const auto& [query, list] : graph.neighbors) {
        const auto& ql = label_of(labels, query.video);
        if (!ql || list.empty()) continue;
        const std::size_t r = row_index(*ql);
        ++frames[r];
        const double share = 100.0 / static_cast<double>(list.size());
        for (const Neighbor& n : list) {
            const auto& nl = label_of(labels, n.frame.video);
            m.values[r][col_index(nl ? *nl : kUnlabeled)] += share;
        }
    }
    for (std::size_t r = 0; r < m.values.size(); ++r) {
        for (double& v : m.values[r]) v /= frames[r];
    }
    return m;
}

EvalReport evaluate(const Collection& collection, const TubeSet& tubes, const NeighborGraph* graph) {
    EvalReport report;
    report.corloc = corloc(tubes, collection.ground_truth);
    if (graph != nullptr) {
        const VideoLabels labels = video_labels(collection);
        report.corret = corret(*graph, labels);
        report.top1_error = topk_error(*graph, labels, 1);
        report.top2_error = topk_error(*graph, labels, 2);
        report.confusion = confusion_matrix(*graph, labels);
    }
    return report;
}

std::string report_to_jsonl(const EvalReport& report) {
    using nlohmann::ordered_json;
    std::ostringstream os;
    auto emit = [&](const char* name, const ClassScores& s) {
        ordered_json rec;
        rec["record"] = name;
        rec["per_class"] = s.per_class;
        rec["average"] = s.average;
        os << rec.dump() << '\n';
    };
    emit("corloc", report.corloc);
    if (report.corret) emit("corret", *report.corret);
    if (report.top1_error) emit("top1_error", *report.top1_error);
    if (report.top2_error) emit("top2_error", *report.top2_error);
    if (report.confusion) {
        ordered_json rec;
        rec["record"] = "confusion";
        rec["rows"] = report.confusion->row_labels;
        rec["cols"] = report.confusion->col_labels;
        rec["values"] = report.confusion->values;
        os << rec.dump() << '\n';
    }
    return os.str();
}

std::string report_to_table(const EvalReport& report) {
    std::set<std::string> classes;
    for (const auto& [l, v] : report.corloc.per_class) classes.insert(l);
    if (report.corret) {
        for (const auto& [l, v] : report.corret->per_class) classes.insert(l);
    }

    std::size_t width = 8;
    for (const auto& c : classes) width = std::max(width, c.size() + 2);
    std::ostringstream os;
    char buf[64];
    auto cell = [&](const std::string& s) {
        os << std::string(width > s.size() ? width - s.size() : 1, ' ') << s;
    };
    auto header = [&] {
        os << std::string(12, ' ');
        for (const auto& c : classes) cell(c);
        cell("Avg.");
        os << '\n';
    };
    auto row = [&](const char* name, const ClassScores& s) {
        std::snprintf(buf, sizeof(buf), "%-12s", name);
        os << buf;
        for (const auto& c : classes) {
            auto it = s.per_class.find(c);
            if (it == s.per_class.end()) {
                cell("-");
            } else {
                std::snprintf(buf, sizeof(buf), "%.1f", it->second);
                cell(buf);
            }
        }
        std::snprintf(buf, sizeof(buf), "%.1f", s.average);
        cell(buf);
        os << '\n';
    };
    header();
    row("CorLoc", report.corloc);
    if (report.corret) row("CorRet", *report.corret);
    if (report.top1_error) row("Top-1 err", *report.top1_error);
    if (report.top2_error) row("Top-2 err", *report.top2_error);
    if (report.confusion && !report.confusion->row_labels.empty()) {
        const ConfusionMatrix& m = *report.confusion;
        os << "\nConfusion (query class x retrieved class, %)\n" << std::string(12, ' ');
        for (const auto& c : m.col_labels) cell(c);
        os << '\n';
        for (std::size_t r = 0; r < m.row_labels.size(); ++r) {
            std::snprintf(buf, sizeof(buf), "%-12s", m.row_labels[r].c_str());
            os << buf;
            for (double v : m.values[r]) {
                std::snprintf(buf, sizeof(buf), "%.1f", v);
                cell(buf);
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace tubeloc
