#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srnkit/anchors.hpp"
#include "srnkit/augment.hpp"
#include "srnkit/backbone.hpp"
#include "srnkit/config.hpp"
#include "srnkit/eval.hpp"
#include "srnkit/image.hpp"
#include "srnkit/matching.hpp"
#include "srnkit/parallel.hpp"
#include "srnkit/pipeline.hpp"
#include "srnkit/rng.hpp"
#include "srnkit/synth.hpp"
#include "srnkit/wider_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace srnkit;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

const char* kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::Conv: return "conv";
        case LayerKind::MaxPool: return "maxpool";
        case LayerKind::ResidualBasicBlock: return "block";
    }
    return "?";
}

std::vector<Box> face_boxes(const GtEntry& entry) {
    std::vector<Box> boxes;
    boxes.reserve(entry.faces.size());
    for (const GroundTruthFace& f : entry.faces)
        if (!f.zero_size()) boxes.push_back(f.box());
    return boxes;
}

fs::path with_extension(const std::string& image_path, const char* ext) {
    fs::path p(image_path);
    p.replace_extension(ext);
    return p;
}

void run_anchors(const RunConfig& cfg) {
    const AnchorStats stats = anchor_count_stats(cfg.pyramid);
    std::cout << "level\tstride\tgrid_w\tgrid_h\tscales\tanchors\n";
    for (std::size_t level = 0; level < cfg.pyramid.num_levels(); ++level) {
        const int stride = cfg.pyramid.strides[level];
        const long cols = (cfg.pyramid.input_width + stride - 1) / stride;
        const long rows = (cfg.pyramid.input_height + stride - 1) / stride;
        std::string scales;
        for (std::size_t m = 0; m < cfg.pyramid.scale_multipliers.size(); ++m) {
            if (m > 0) scales += ',';
            scales += format_double(cfg.pyramid.scale_multipliers[m] * stride);
        }
        std::cout << (level + 1) << '\t' << stride << '\t' << cols << '\t' << rows << '\t'
                  << scales << '\t' << stats.per_level[level] << '\n';
    }
    std::cout << "total\t\t\t\t\t" << stats.total << '\n';
}

void run_shapes(const RunConfig& cfg, const std::string& variant) {
    const StemVariant stem = build_stem(variant);
    const auto rows = trace_shapes(stem, cfg.pyramid.input_height, cfg.pyramid.input_width);
    std::cout << "layer\tkind\tkernel\tstride\tin_ch\tout_ch\tout_h\tout_w\tcum_stride\tparams\n";
    std::int64_t total = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ShapeTraceRow& r = rows[i];
        const std::int64_t params = param_count(r.layer);
        total += params;
        std::cout << (i + 1) << '\t' << kind_name(r.layer.kind) << '\t' << r.layer.kernel << '\t'
                  << r.layer.stride << '\t' << r.layer.in_channels << '\t' << r.layer.out_channels
                  << '\t' << r.out_height << '\t' << r.out_width << '\t' << r.cumulative_stride
                  << '\t' << params << '\n';
    }
    std::cout << "total\t\t\t\t\t\t\t\t\t" << total << '\n';
}

void run_match_stats(const RunConfig& cfg, const std::string& gt_path, int step, int jobs) {
    const AnchorSet anchors = generate_pyramid_anchors(cfg.pyramid);
    const std::vector<GtEntry> entries = parse_gt_file(gt_path);
    const MatchThresholds thresholds = step == 1 ? cfg.step1 : cfg.step2;

    std::vector<BalanceStats> stats(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        const std::vector<Box> boxes = face_boxes(entries[i]);
        stats[i] = class_balance_stats(match_anchors(anchors.boxes, boxes, thresholds));
    });

    std::cout << "image\tpositive\tnegative\tignored\tpos_to_neg\n";
    std::size_t tp = 0, tn = 0, ti = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const BalanceStats& s = stats[i];
        std::cout << entries[i].path << '\t' << s.num_positive << '\t' << s.num_negative << '\t'
                  << s.num_ignored << '\t' << format_double(s.pos_to_neg_ratio) << '\n';
        tp += s.num_positive;
        tn += s.num_negative;
        ti += s.num_ignored;
    }
    const double agg_ratio = tn == 0 ? std::numeric_limits<double>::infinity()
                                     : static_cast<double>(tp) / static_cast<double>(tn);
    std::cout << "total\t" << tp << '\t' << tn << '\t' << ti << '\t' << format_double(agg_ratio)
              << '\n';
}

void run_simulate(const RunConfig& cfg, const std::string& gt_path, const std::string& out_dir,
                  const std::string& scores_dir, double sigma, bool oracle, bool no_cap,
                  int jobs) {
    const AnchorSet anchors = generate_pyramid_anchors(cfg.pyramid);
    const std::vector<GtEntry> entries = parse_gt_file(gt_path);

    SceneSpec spec;
    spec.image_width = cfg.pyramid.input_width;
    spec.image_height = cfg.pyramid.input_height;
    spec.delta_sigma = sigma;
    spec.oracle_scores = oracle;
    spec.seed = cfg.seed;

    std::vector<std::vector<Detection>> results(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) {
        const std::vector<Box> faces = face_boxes(entries[i]);
        StepScores scores;
        if (!scores_dir.empty()) {
            const fs::path file = fs::path(scores_dir) / with_extension(entries[i].path, ".score");
            scores = parse_scores_file(file);
            if (scores.size() != anchors.size())
                throw std::runtime_error(file.string() + ": holds " +
                                         std::to_string(scores.size()) + " anchors, pyramid has " +
                                         std::to_string(anchors.size()));
        } else {
            Rng rng = Rng::derive(cfg.seed, i);
            scores = synth_scores(faces, anchors, spec, rng);
        }
        results[i] = run_inference(anchors, scores, cfg.inference, cfg.pyramid.input_width,
                                   cfg.pyramid.input_height);
    });

    std::map<std::string, std::vector<Detection>> per_image;
    for (std::size_t i = 0; i < entries.size(); ++i)
        per_image[entries[i].path] = std::move(results[i]);
    write_detections_dir(out_dir, per_image, no_cap);
}

void run_augment(const RunConfig& cfg, const std::string& image_path, const std::string& gt_path,
                 const std::string& key, const std::string& out_image,
                 const std::string& out_gt) {
    const ImageBuffer img = read_ppm(image_path);
    std::vector<Box> boxes;
    std::string entry_path = key;
    if (!gt_path.empty()) {
        const std::vector<GtEntry> entries = parse_gt_file(gt_path);
        const GtEntry* entry = nullptr;
        if (key.empty()) {
            if (entries.empty()) throw std::runtime_error(gt_path + ": no entries");
            entry = &entries.front();
        } else {
            for (const GtEntry& e : entries)
                if (e.path == key) entry = &e;
            if (entry == nullptr)
                throw std::runtime_error(gt_path + ": no entry for '" + key + "'");
        }
        entry_path = entry->path;
        boxes = face_boxes(*entry);
    }

    Rng rng(cfg.seed);
    const AugmentResult result = augment_pipeline(img, boxes, rng, cfg.augment);
    write_ppm(result.image, out_image);

    if (!out_gt.empty()) {
        GtEntry out_entry;
        out_entry.path = entry_path.empty() ? fs::path(out_image).filename().string() : entry_path;
        for (const Box& b : result.boxes) {
            GroundTruthFace f;
            f.x = b.x1;
            f.y = b.y1;
            f.w = b.width();
            f.h = b.height();
            out_entry.faces.push_back(f);
        }
        write_gt_file(out_gt, {out_entry});
    }
    std::cout << "boxes\t" << result.boxes.size() << "\tused_das\t" << (result.used_das ? 1 : 0)
              << '\n';
}

void run_nms(const RunConfig& cfg, const std::string& in_file, const std::string& out_file,
             bool no_cap) {
    DetectionFile df = parse_detections_file(in_file);
    std::vector<Detection> kept = nms(df.detections, cfg.inference.nms_iou);
    if (kept.size() > cfg.inference.cap) kept.resize(cfg.inference.cap);
    if (out_file.empty()) {
        write_detections(std::cout, df.image_path, kept, no_cap);
    } else {
        std::ofstream out(out_file);
        if (!out) throw std::runtime_error("cannot open for writing: " + out_file);
        write_detections(out, df.image_path, kept, no_cap);
    }
}

void run_eval(const RunConfig& cfg, const std::string& gt_path, const std::string& dets_dir,
              const std::string& subset_dir, const std::string& out_csv, double iou_threshold) {
    (void)cfg;
    const std::vector<GtEntry> gt = parse_gt_file(gt_path);
    const auto dets = parse_detections_dir(dets_dir);
    SubsetLists lists;
    const SubsetLists* lists_ptr = nullptr;
    if (!subset_dir.empty()) {
        lists = load_subset_lists(subset_dir);
        lists_ptr = &lists;
    }
    const auto curves = evaluate(gt, dets, {}, lists_ptr, iou_threshold);

    std::cout << "AP easy=" << format_fixed(curves.at("easy").ap, 4)
              << " medium=" << format_fixed(curves.at("medium").ap, 4)
              << " hard=" << format_fixed(curves.at("hard").ap, 4) << '\n';

    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        if (!out) throw std::runtime_error("cannot open for writing: " + out_csv);
        out << "subset,threshold,precision,recall\n";
        for (const char* name : {"easy", "medium", "hard"}) {
            const EvalCurve& c = curves.at(name);
            for (int k = 0; k < kCurvePoints; ++k)
                out << name << ',' << format_double(c.thresholds[k]) << ','
                    << format_double(c.precision[k]) << ',' << format_double(c.recall[k]) << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + out_csv);
    }
}

void run_synth(const RunConfig& cfg, int faces, double min_scale, double max_scale, double sigma,
               bool oracle, const std::string& name, const std::string& out_gt,
               const std::string& out_scores, bool text_scores) {
    const AnchorSet anchors = generate_pyramid_anchors(cfg.pyramid);
    SceneSpec spec;
    spec.image_width = cfg.pyramid.input_width;
    spec.image_height = cfg.pyramid.input_height;
    spec.face_count = faces;
    spec.min_scale = min_scale;
    spec.max_scale = max_scale;
    spec.delta_sigma = sigma;
    spec.oracle_scores = oracle;
    spec.seed = cfg.seed;
    const SynthScene scene = synth_scene(spec, anchors);

    GtEntry entry;
    entry.path = name;
    for (const Box& b : scene.faces) {
        GroundTruthFace f;
        f.x = b.x1;
        f.y = b.y1;
        f.w = b.width();
        f.h = b.height();
        entry.faces.push_back(f);
    }
    write_gt_file(out_gt, {entry});
    if (!out_scores.empty()) write_scores_file(out_scores, scene.scores, !text_scores);

    std::size_t matched = 0;
    for (int a : scene.anchor_face)
        if (a >= 0) ++matched;
    std::cout << "faces\t" << scene.faces.size() << "\tmatched_anchors\t" << matched << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detection-pipeline toolkit: anchors, matching, losses, augmentation, "
                 "post-processing, and WIDER-protocol evaluation"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path;
    bool print_cfg = false;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    app.add_option("--config", config_path, "key = value config file");
    app.add_flag("--print-config", print_cfg, "echo the fully resolved config");
    app.add_option("--seed", seed, "global random seed");
    app.add_option("--jobs", jobs, "worker threads for per-image work")
        ->check(CLI::PositiveNumber);

    std::optional<int> input_size;
    app.add_option("--input", input_size, "square input size fed to the pyramid");

    auto* sub_anchors = app.add_subcommand("anchors", "per-level anchor census and scale table");

    auto* sub_shapes = app.add_subcommand("shapes", "layer-by-layer stem shape trace");
    std::string variant = "new_resnet";
    sub_shapes->add_option("--variant", variant,
                           "resnet_original | root_resnet | new_resnet");

    auto* sub_match = app.add_subcommand("match-stats", "anchor assignment counts per image");
    std::string match_gt;
    int match_step = 1;
    sub_match->add_option("--gt", match_gt, "ground-truth file")->required();
    sub_match->add_option("--step", match_step, "threshold pair: 1 or 2")
        ->check(CLI::Range(1, 2));

    auto* sub_sim = app.add_subcommand(
        "simulate", "run the post-processing chain on stored or synthetic scores");
    std::string sim_gt, sim_out, sim_scores;
    double sim_sigma = 0.0;
    bool sim_oracle = false, sim_no_cap = false;
    sub_sim->add_option("--gt", sim_gt, "ground-truth file")->required();
    sub_sim->add_option("--out", sim_out, "output detection directory")->required();
    sub_sim->add_option("--scores-dir", sim_scores,
                        "per-image .score files; default synthesizes scores from the ground truth");
    sub_sim->add_option("--sigma", sim_sigma, "delta noise for synthesized scores");
    sub_sim->add_flag("--oracle", sim_oracle, "synthesize 1/0 scores instead of Beta draws");
    sub_sim->add_flag("--no-cap", sim_no_cap, "allow writing more than 750 detections");

    auto* sub_aug = app.add_subcommand("augment", "augment one PPM image and its boxes");
    std::string aug_image, aug_gt, aug_key, aug_out, aug_out_gt;
    std::optional<double> aug_das_prob;
    std::optional<int> aug_out_size;
    sub_aug->add_option("--image", aug_image, "input PPM (binary P6)")->required();
    sub_aug->add_option("--gt", aug_gt, "ground-truth file with this image's boxes");
    sub_aug->add_option("--key", aug_key, "image path inside the ground-truth file");
    sub_aug->add_option("--out", aug_out, "output PPM path")->required();
    sub_aug->add_option("--out-gt", aug_out_gt, "write transformed boxes here");
    sub_aug->add_option("--das-prob", aug_das_prob, "data-anchor-sampling probability");
    sub_aug->add_option("--out-size", aug_out_size, "output square side");

    auto* sub_nms = app.add_subcommand("nms", "suppress a detection file");
    std::string nms_in, nms_out;
    std::optional<double> nms_iou;
    std::optional<std::uint64_t> nms_cap;
    bool nms_no_cap = false;
    sub_nms->add_option("--in", nms_in, "detection file")->required();
    sub_nms->add_option("--out", nms_out, "output file; standard output when omitted");
    sub_nms->add_option("--iou", nms_iou, "suppression overlap threshold");
    sub_nms->add_option("--cap", nms_cap, "max detections kept");
    sub_nms->add_flag("--no-cap", nms_no_cap, "allow writing more than 750 detections");

    auto* sub_eval = app.add_subcommand("eval", "WIDER-protocol evaluation");
    std::string eval_gt, eval_dets, eval_subsets, eval_csv;
    double eval_iou = 0.5;
    sub_eval->add_option("--gt", eval_gt, "ground-truth file")->required();
    sub_eval->add_option("--dets", eval_dets, "detection directory")->required();
    sub_eval->add_option("--subset-lists", eval_subsets,
                         "directory with easy.txt/medium.txt/hard.txt index lists");
    sub_eval->add_option("--out", eval_csv, "curve CSV output path");
    sub_eval->add_option("--iou", eval_iou, "matching overlap threshold");

    auto* sub_synth = app.add_subcommand("synth", "generate a synthetic scene");
    int synth_faces = 10;
    double synth_min = 8.0, synth_max = 362.0, synth_sigma = 0.0;
    bool synth_oracle = false, synth_text = false;
    std::string synth_name = "synthetic/scene_0.jpg";
    std::string synth_gt, synth_scores_path;
    sub_synth->add_option("--faces", synth_faces, "number of faces")->check(CLI::NonNegativeNumber);
    sub_synth->add_option("--min-scale", synth_min, "smallest face scale");
    sub_synth->add_option("--max-scale", synth_max, "largest face scale");
    sub_synth->add_option("--sigma", synth_sigma, "delta noise");
    sub_synth->add_flag("--oracle", synth_oracle, "1/0 scores instead of Beta draws");
    sub_synth->add_option("--name", synth_name, "image path recorded in the ground truth");
    sub_synth->add_option("--out-gt", synth_gt, "ground-truth output file")->required();
    sub_synth->add_option("--out-scores", synth_scores_path, "score file output path");
    sub_synth->add_flag("--text-scores", synth_text, "write the text score format");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        assert_locale_safe();

        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
        if (seed) cfg.seed = *seed;
        if (input_size) {
            cfg.pyramid.input_width = *input_size;
            cfg.pyramid.input_height = *input_size;
        }
        if (aug_das_prob) cfg.augment.das_probability = *aug_das_prob;
        if (aug_out_size) cfg.augment.output_size = *aug_out_size;
        if (nms_iou) cfg.inference.nms_iou = *nms_iou;
        if (nms_cap) cfg.inference.cap = static_cast<std::size_t>(*nms_cap);
        cfg.validate();

        if (print_cfg) std::cout << print_config(cfg);

        if (sub_anchors->parsed()) {
            run_anchors(cfg);
        } else if (sub_shapes->parsed()) {
            run_shapes(cfg, variant);
        } else if (sub_match->parsed()) {
            run_match_stats(cfg, match_gt, match_step, jobs);
        } else if (sub_sim->parsed()) {
            run_simulate(cfg, sim_gt, sim_out, sim_scores, sim_sigma, sim_oracle, sim_no_cap, jobs);
        } else if (sub_aug->parsed()) {
            run_augment(cfg, aug_image, aug_gt, aug_key, aug_out, aug_out_gt);
        } else if (sub_nms->parsed()) {
            run_nms(cfg, nms_in, nms_out, nms_no_cap);
        } else if (sub_eval->parsed()) {
            run_eval(cfg, eval_gt, eval_dets, eval_subsets, eval_csv, eval_iou);
        } else if (sub_synth->parsed()) {
            run_synth(cfg, synth_faces, synth_min, synth_max, synth_sigma, synth_oracle,
                      synth_name, synth_gt, synth_scores_path, synth_text);
        } else if (!print_cfg) {
            std::cerr << app.help() << std::flush;
            return kExitUsage;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}
