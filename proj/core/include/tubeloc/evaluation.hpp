#pragma once

#include "tubeloc/model_io.hpp"
#include "tubeloc/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tubeloc {

double iou(const Box& a, const Box& b);

/// Percentages per class plus their unweighted mean.
struct ClassScores {
    std::map<std::string, double> per_class;
    double average = 0.0;

    friend bool operator==(const ClassScores&, const ClassScores&) = default;
};

/// Fraction of annotated videos whose predicted box at the annotated frame
/// has IoU > 0.5 with the ground truth. `tubes` maps video id to ranked
/// tubes; the first is used. Throws ValidationError when an annotated video
/// has no tube.
ClassScores corloc(const TubeSet& tubes, std::span<const GroundTruth> ground_truth);

/// Label per video index; nullopt for videos without a label.
using VideoLabels = std::vector<std::optional<std::string>>;

VideoLabels video_labels(const Collection& collection);

/// Per key frame, share of neighbors from the query's class; averaged over
/// frames of a class, then over classes.
ClassScores corret(const NeighborGraph& graph, const VideoLabels& labels);

/// Percentage of videos whose label is not among the `k_labels` most
/// frequent neighbor labels over all of the video's key frames (count ties
/// broken by summed similarity, then label).
ClassScores topk_error(const NeighborGraph& graph, const VideoLabels& labels, int k_labels);

/// Rows: query class; columns: retrieved class; row-normalized percentages
/// averaged per frame. Neighbors from unlabeled videos fall in column "?".
struct ConfusionMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<double>> values;
};

ConfusionMatrix confusion_matrix(const NeighborGraph& graph, const VideoLabels& labels);

struct EvalReport {
    ClassScores corloc;
    std::optional<ClassScores> corret;
    std::optional<ClassScores> top1_error;
    std::optional<ClassScores> top2_error;
    std::optional<ConfusionMatrix> confusion;
};

/// CorLoc always; retrieval metrics when a graph is given.
EvalReport evaluate(const Collection& collection, const TubeSet& tubes, const NeighborGraph* graph);

/// JSON Lines: one record per metric.
std::string report_to_jsonl(const EvalReport& report);

/// Aligned table with one column per class plus "Avg.".
std::string report_to_table(const EvalReport& report);

}  // namespace tubeloc
