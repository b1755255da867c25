// tubeloc: synth | run | eval | inspect
//
// Exit codes: 0 success, 1 validation or input error, 2 runtime failure.
// All human-readable text goes to stderr.

#include "tubeloc/config.hpp"
#include "tubeloc/discovery.hpp"
#include "tubeloc/error.hpp"
#include "tubeloc/evaluation.hpp"
#include "tubeloc/model_io.hpp"
#include "tubeloc/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef TUBELOC_VERSION
#define TUBELOC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

fs::path default_out_dir() {
    if (const char* env = std::getenv("TUBELOC_OUT"); env != nullptr && *env != '\0') return fs::path(env);
    return fs::path("tubeloc_out");
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// FNV-1a 64 over every regular file below `root`, in sorted relative-path
/// order, mixing in each path.
std::string hash_tree(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 1099511628211ULL;
    };
    for (const fs::path& rel : files) {
        for (char c : rel.generic_string()) mix(static_cast<unsigned char>(c));
        mix(0);
        std::ifstream in(root / rel, std::ios::binary);
        char buf[1 << 14];
        while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
            for (std::streamsize i = 0; i < in.gcount(); ++i) mix(static_cast<unsigned char>(buf[i]));
        }
    }
    char out[32];
    std::snprintf(out, sizeof(out), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw tubeloc::IoError("cannot write " + path.string());
    out << text;
    if (!out) throw tubeloc::IoError("write failed: " + path.string());
}

/// Config flags. Values are applied only when the flag was given, so a
/// config file supplies the rest.
struct ConfigFlags {
    std::string config_file;
    tubeloc::Config values;
    std::vector<std::pair<CLI::Option*, std::function<void(tubeloc::Config&)>>> setters;

    template <typename T>
    void add(CLI::App& app, const std::string& names, T tubeloc::Config::*field, const std::string& help) {
        CLI::Option* opt = app.add_option(names, values.*field, help);
        setters.emplace_back(opt, [this, field](tubeloc::Config& c) { c.*field = values.*field; });
    }
    template <typename T>
    void add_hough(CLI::App& app, const std::string& names, T tubeloc::HoughParams::*field, const std::string& help) {
        CLI::Option* opt = app.add_option(names, values.hough.*field, help);
        setters.emplace_back(opt, [this, field](tubeloc::Config& c) { c.hough.*field = values.hough.*field; });
    }

    void attach(CLI::App& app) {
        app.add_option("--config", config_file, "JSON config file; flags override its values");
        add(app, "--alpha", &tubeloc::Config::alpha, "weight of motion coherence");
        add(app, "--lambda", &tubeloc::Config::lambda, "weight of temporal consistency");
        add(app, "--theta", &tubeloc::Config::theta, "motion consistency without shared tracks");
        add(app, "--k,--k-neighbors", &tubeloc::Config::k_neighbors, "neighbors per key frame");
        add(app, "--p,--p-tubes", &tubeloc::Config::p_tubes, "tubes kept per video");
        add(app, "--iterations", &tubeloc::Config::iterations, "discovery/tracking iterations");
        add(app, "--keyframe-stride", &tubeloc::Config::keyframe_stride, "key frame stride");
        add(app, "--top-candidates", &tubeloc::Config::top_candidates, "candidates per key frame in the DP");
        add(app, "--retrieval-proposals", &tubeloc::Config::retrieval_proposals, "proposals per frame in retrieval");
        add(app, "--affinity-gamma", &tubeloc::Config::affinity_gamma, "appearance affinity bandwidth");
        add(app, "--retrieval-shortlist", &tubeloc::Config::retrieval_shortlist,
            "signature shortlist size for retrieval (0 = all)");
        add(app, "--rng-seed", &tubeloc::Config::rng_seed, "seed recorded in the manifest");
        add(app, "--threads", &tubeloc::Config::threads, "worker threads (0 = hardware concurrency)");
        add_hough(app, "--hough-translation-bins", &tubeloc::HoughParams::translation_bins, "Hough bins per translation axis");
        add_hough(app, "--hough-scale-bins", &tubeloc::HoughParams::scale_bins, "Hough bins on the scale axis");
        add_hough(app, "--hough-translation-range", &tubeloc::HoughParams::translation_range, "translation half range");
        add_hough(app, "--hough-scale-range", &tubeloc::HoughParams::scale_range, "log-scale half range");
        add_hough(app, "--hough-bandwidth-scale", &tubeloc::HoughParams::bandwidth_scale, "Gaussian width in bins");
    }

    tubeloc::Config resolve() const {
        tubeloc::Config c = config_file.empty() ? tubeloc::Config{} : tubeloc::load_config(config_file);
        for (const auto& [opt, set] : setters) {
            if (opt->count() > 0) set(c);
        }
        c.validate();
        return c;
    }
};

// --- synth -----------------------------------------------------------------

struct SynthArgs {
    std::string spec;
    std::optional<std::uint64_t> seed;
    std::optional<double> descriptor_noise;
    std::string out;
};

int cmd_synth(const SynthArgs& args) {
    tubeloc::SynthSpec spec = args.spec.empty() ? tubeloc::SynthSpec{} : tubeloc::load_synth_spec(args.spec);
    if (args.seed) spec.seed = *args.seed;
    if (args.descriptor_noise) spec.descriptor_noise = *args.descriptor_noise;
    spec.validate();
    const fs::path out = args.out.empty() ? default_out_dir() : fs::path(args.out);
    const tubeloc::SynthCollection synth = tubeloc::generate_collection(spec);
    tubeloc::save_collection(synth.collection, out);
    synth.planted.save(out / "planted.jsonl");
    write_text(out / "synth_spec.json", tubeloc::synth_spec_to_json_text(spec) + "\n");
    std::cerr << "wrote " << synth.collection.videos.size() << " videos to " << out.string() << "\n";
    return kExitOk;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
    std::string collection;
    std::string out;
    ConfigFlags flags;
};

int cmd_run(const RunArgs& args) {
    const tubeloc::Config config = args.flags.resolve();
    const fs::path manifest = args.collection;
    const std::string started = utc_now();
    const tubeloc::Collection collection = tubeloc::load_collection(manifest);
    tubeloc::validate_key_frames(collection, config.keyframe_stride);
    const std::string input_hash = hash_tree(manifest.parent_path().empty() ? fs::path(".") : manifest.parent_path());

    const fs::path out = args.out.empty() ? default_out_dir() : fs::path(args.out);
    fs::create_directories(out);
    const auto ids = tubeloc::video_ids(collection);

    const tubeloc::DiscoveryResult result = tubeloc::run_discovery(collection, config, [&](const tubeloc::IterationState& s) {
        std::cerr << "iteration " << s.iteration << "/" << config.iterations << " done\n";
    });

    tubeloc::save_results(result.tubes, result.graph, ids, out);
    const fs::path snap_root = out / "snapshots";
    fs::remove_all(snap_root);
    for (const tubeloc::Snapshot& snap : result.snapshots) {
        char name[32];
        std::snprintf(name, sizeof(name), "iter_%03d", snap.iteration);
        tubeloc::save_results(snap.tubes, snap.graph, ids, snap_root / name);
    }

    ordered_json m;
    m["record"] = "run_manifest";
    m["tool_version"] = TUBELOC_VERSION;
    m["collection"] = fs::absolute(manifest).lexically_normal().generic_string();
    m["input_hash"] = input_hash;
    m["config"] = ordered_json::parse(tubeloc::config_to_json_text(config));
    m["iterations_completed"] = result.snapshots.size();
    m["started_at"] = started;
    m["finished_at"] = utc_now();
    write_text(out / "run_manifest.json", m.dump(2) + "\n");
    std::cerr << "wrote results for " << collection.videos.size() << " videos to " << out.string() << "\n";
    return kExitOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
    std::string results;
    std::string collection;
    bool per_iteration = false;
};

int cmd_eval(const EvalArgs& args) {
    const tubeloc::Collection collection = tubeloc::load_collection(args.collection);
    const auto ids = tubeloc::video_ids(collection);
    const fs::path dir = args.results.empty() ? default_out_dir() : fs::path(args.results);

    auto evaluate_dir = [&](const fs::path& d) {
        const tubeloc::TubeSet tubes = tubeloc::load_tubes(d / "tubes.jsonl");
        for (const auto& [video_id, list] : tubes) {
            if (!collection.video_index(video_id)) {
                throw tubeloc::ValidationError("results name unknown video '" + video_id + "'");
            }
        }
        std::optional<tubeloc::NeighborGraph> graph;
        if (fs::exists(d / "graph.jsonl")) graph = tubeloc::load_graph(d / "graph.jsonl", ids);
        return tubeloc::evaluate(collection, tubes, graph ? &*graph : nullptr);
    };

    const tubeloc::EvalReport report = evaluate_dir(dir);
    write_text(dir / "eval_report.jsonl", tubeloc::report_to_jsonl(report));
    std::cerr << tubeloc::report_to_table(report);

    if (args.per_iteration) {
        std::vector<fs::path> snaps;
        if (fs::is_directory(dir / "snapshots")) {
            for (const auto& e : fs::directory_iterator(dir / "snapshots")) {
                if (e.is_directory()) snaps.push_back(e.path());
            }
        }
        std::sort(snaps.begin(), snaps.end());
        if (snaps.empty()) throw tubeloc::ValidationError("no snapshots under " + (dir / "snapshots").string());
        std::string lines;
        std::cerr << "\nIteration      CorLoc      CorRet\n";
        for (const fs::path& s : snaps) {
            const int iteration = std::stoi(s.filename().string().substr(5));
            const tubeloc::EvalReport r = evaluate_dir(s);
            char buf[96];
            if (r.corret) {
                std::snprintf(buf, sizeof(buf), "%9d %11.1f %11.1f\n", iteration, r.corloc.average, r.corret->average);
            } else {
                std::snprintf(buf, sizeof(buf), "%9d %11.1f %11s\n", iteration, r.corloc.average, "-");
            }
            std::cerr << buf;
            ordered_json rec;
            rec["record"] = "iteration";
            rec["iteration"] = iteration;
            rec["corloc"] = r.corloc.average;
            rec["corret"] = r.corret ? ordered_json(r.corret->average) : ordered_json(nullptr);
            lines += rec.dump() + "\n";
        }
        write_text(dir / "eval_iterations.jsonl", lines);
    }
    return kExitOk;
}

// --- inspect ---------------------------------------------------------------

int cmd_inspect(const std::string& path) {
    std::cerr << tubeloc::pretty_print_artifact(path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tubeloc: unsupervised object discovery and tracking in video collections"};
    app.set_version_flag("--version", TUBELOC_VERSION);
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic collection with planted objects");
    synth->add_option("--spec", synth_args.spec, "JSON generator spec");
    synth->add_option("--seed", synth_args.seed, "override the spec seed");
    synth->add_option("--descriptor-noise", synth_args.descriptor_noise, "override the descriptor noise");
    synth->add_option("--out", synth_args.out, "output directory (default $TUBELOC_OUT or ./tubeloc_out)");

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "discover and track objects");
    run->add_option("--collection", run_args.collection, "collection manifest.jsonl")->required();
    run->add_option("--out", run_args.out, "output directory (default $TUBELOC_OUT or ./tubeloc_out)");
    run_args.flags.attach(*run);

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "score results against ground truth");
    eval->add_option("--results", eval_args.results, "run output directory (default $TUBELOC_OUT or ./tubeloc_out)");
    eval->add_option("--collection", eval_args.collection, "collection manifest.jsonl")->required();
    eval->add_flag("--per-iteration", eval_args.per_iteration, "also score every snapshot");

    std::string inspect_path;
    CLI::App* inspect = app.add_subcommand("inspect", "pretty-print an artifact file");
    inspect->add_option("path", inspect_path, "JSON Lines artifact")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cerr << app.help();
        if (app.get_subcommands().size() == 1) std::cerr << app.get_subcommands().front()->help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        std::cerr << TUBELOC_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        if (*synth) return cmd_synth(synth_args);
        if (*run) return cmd_run(run_args);
        if (*eval) return cmd_eval(eval_args);
        if (*inspect) return cmd_inspect(inspect_path);
    } catch (const tubeloc::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const tubeloc::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}
