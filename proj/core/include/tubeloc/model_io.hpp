#pragma once

// File layout (all files are UTF-8 JSON Lines, one record per line):
//
//   manifest.jsonl
//     {"record":"collection","version":1,"descriptor_dim":D,"signature_dim":S}
//     {"record":"video","id":"...","length":N,"frames":"rel/path",
//      "tracks":"rel/path","ground_truth":"rel/path"}      (tracks, ground_truth optional)
//   frames file
//     {"record":"frame","frame_index":t,"width":W,"height":H,"signature":[...]}
//     {"record":"proposal","frame_index":t,"id":i,"box":[x,y,w,h],"descriptor":[...]}
//   tracks file
//     {"record":"track","id":i,"cluster":l,"start_frame":t,"points":[[x,y],...]}
//   ground-truth file
//     {"record":"ground_truth","frame_index":t,"box":[x,y,w,h],"class_label":"..."}
//
// Result files written by save_results():
//   tubes.jsonl   header {"record":"tubes","version":1,"count":n} then one
//                 {"record":"tube_region","video_id","rank","frame_index",
//                  "proposal_id","box","score"} per tube per key frame
//   graph.jsonl   header {"record":"neighbor_graph","version":1,"count":n} then
//                 {"record":"neighbors","video_id","frame_index",
//                  "neighbors":[{"video_id","frame_index","similarity"},...]}
//
// Reals are written in shortest round-trip form, so reloading is bit-exact.
// Paths inside the manifest are relative to the manifest's directory.

#include "tubeloc/types.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tubeloc {

/// Loads and validates a collection. Throws IoError for unreadable files and
/// ValidationError (message prefixed with "file:line:") for any invariant
/// violation; never returns a partially built collection.
Collection load_collection(const std::filesystem::path& manifest_path);

/// Writes `collection` in the layout above: manifest.jsonl plus
/// videos/<id>/{frames,tracks,ground_truth}.jsonl under `out_dir`.
void save_collection(const Collection& collection, const std::filesystem::path& out_dir);

/// Key-frame indices 0, stride, 2*stride, ... below `length`.
std::vector<int> key_frames(int length, int stride);
std::vector<int> key_frames(const Video& video, int stride);

/// Checks that every key frame has a frame record with at least one proposal.
void validate_key_frames(const Collection& collection, int stride);

/// Dense per-frame boxes for the whole video: linear interpolation of the
/// four box components between key frames; frames after the last key frame
/// copy its box, frames before the first copy the first.
std::map<int, Box> interpolate_tube(const Tube& tube, int video_length);
Box interpolate_tube_at(const Tube& tube, int frame_index);

/// Tubes grouped by video; within a video, index = rank (0 is best).
using TubeSet = std::map<std::string, std::vector<Tube>>;

void save_tubes(const TubeSet& tubes, const std::filesystem::path& path);
TubeSet load_tubes(const std::filesystem::path& path);

/// Graph files refer to videos by id; `video_ids[i]` names FrameRef::video == i.
void save_graph(const NeighborGraph& graph, std::span<const std::string> video_ids,
                const std::filesystem::path& path);
NeighborGraph load_graph(const std::filesystem::path& path,
                         std::span<const std::string> video_ids);

/// Writes tubes.jsonl and graph.jsonl into `out_dir` (created if missing).
void save_results(const TubeSet& tubes, const NeighborGraph& graph,
                  std::span<const std::string> video_ids,
                  const std::filesystem::path& out_dir);

std::vector<std::string> video_ids(const Collection& collection);

/// Reads every record of a JSON Lines artifact and re-emits it indented,
/// one record per block. Used by `tubeloc inspect`.
std::string pretty_print_artifact(const std::filesystem::path& path);

}  // namespace tubeloc
