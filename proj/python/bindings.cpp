// Python bindings for the core operations. Boxes travel as (N,4) float64
// arrays in corner form, detections as (N,5) rows [x1 y1 x2 y2 score].

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <stdexcept>

#include "srnkit/anchors.hpp"
#include "srnkit/backbone.hpp"
#include "srnkit/eval.hpp"
#include "srnkit/losses.hpp"
#include "srnkit/matching.hpp"
#include "srnkit/pipeline.hpp"
#include "srnkit/rng.hpp"
#include "srnkit/synth.hpp"
#include "srnkit/wider_io.hpp"

namespace py = pybind11;
using namespace srnkit;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Box> to_boxes(const DoubleArray& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 4)
        throw std::invalid_argument("expected an (N, 4) box array");
    const auto view = arr.unchecked<2>();
    std::vector<Box> boxes(static_cast<std::size_t>(view.shape(0)));
    for (py::ssize_t i = 0; i < view.shape(0); ++i)
        boxes[i] = Box{view(i, 0), view(i, 1), view(i, 2), view(i, 3)};
    return boxes;
}

py::array_t<double> from_boxes(const std::vector<Box>& boxes) {
    py::array_t<double> out({static_cast<py::ssize_t>(boxes.size()), py::ssize_t{4}});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        view(i, 0) = boxes[i].x1;
        view(i, 1) = boxes[i].y1;
        view(i, 2) = boxes[i].x2;
        view(i, 3) = boxes[i].y2;
    }
    return out;
}

std::vector<BoxDelta> to_deltas(const DoubleArray& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 4)
        throw std::invalid_argument("expected an (N, 4) delta array");
    const auto view = arr.unchecked<2>();
    std::vector<BoxDelta> deltas(static_cast<std::size_t>(view.shape(0)));
    for (py::ssize_t i = 0; i < view.shape(0); ++i)
        deltas[i] = BoxDelta{view(i, 0), view(i, 1), view(i, 2), view(i, 3)};
    return deltas;
}

py::array_t<double> from_deltas(const std::vector<BoxDelta>& deltas) {
    py::array_t<double> out({static_cast<py::ssize_t>(deltas.size()), py::ssize_t{4}});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        view(i, 0) = deltas[i].dx;
        view(i, 1) = deltas[i].dy;
        view(i, 2) = deltas[i].dw;
        view(i, 3) = deltas[i].dh;
    }
    return out;
}

std::vector<double> to_scalars(const DoubleArray& arr) {
    if (arr.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
    const auto view = arr.unchecked<1>();
    return {view.data(0), view.data(0) + view.shape(0)};
}

py::array_t<double> from_scalars(const std::vector<double>& values) {
    py::array_t<double> out(static_cast<py::ssize_t>(values.size()));
    std::memcpy(out.mutable_data(), values.data(), values.size() * sizeof(double));
    return out;
}

std::vector<Detection> to_detections(const DoubleArray& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 5)
        throw std::invalid_argument("expected an (N, 5) detection array");
    const auto view = arr.unchecked<2>();
    std::vector<Detection> dets(static_cast<std::size_t>(view.shape(0)));
    for (py::ssize_t i = 0; i < view.shape(0); ++i)
        dets[i] = Detection{Box{view(i, 0), view(i, 1), view(i, 2), view(i, 3)}, view(i, 4)};
    return dets;
}

py::array_t<double> from_detections(const std::vector<Detection>& dets) {
    py::array_t<double> out({static_cast<py::ssize_t>(dets.size()), py::ssize_t{5}});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < dets.size(); ++i) {
        view(i, 0) = dets[i].box.x1;
        view(i, 1) = dets[i].box.y1;
        view(i, 2) = dets[i].box.x2;
        view(i, 3) = dets[i].box.y2;
        view(i, 4) = dets[i].score;
    }
    return out;
}

StepScores to_step_scores(const DoubleArray& s1, const DoubleArray& d1, const DoubleArray& s2,
                          const DoubleArray& d2) {
    StepScores scores;
    scores.first.scores = to_scalars(s1);
    scores.first.deltas = to_deltas(d1);
    scores.second.scores = to_scalars(s2);
    scores.second.deltas = to_deltas(d2);
    return scores;
}

py::dict layer_to_dict(const LayerSpec& layer) {
    py::dict d;
    switch (layer.kind) {
        case LayerKind::Conv: d["kind"] = "conv"; break;
        case LayerKind::MaxPool: d["kind"] = "max_pool"; break;
        case LayerKind::ResidualBasicBlock: d["kind"] = "residual_block"; break;
    }
    d["kernel"] = layer.kernel;
    d["stride"] = layer.stride;
    d["in_channels"] = layer.in_channels;
    d["out_channels"] = layer.out_channels;
    d["params"] = param_count(layer);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Detection pipeline toolkit: anchors, matching, losses, post-processing.";

    py::class_<PyramidConfig>(m, "PyramidConfig")
        .def(py::init<>())
        .def_readwrite("input_width", &PyramidConfig::input_width)
        .def_readwrite("input_height", &PyramidConfig::input_height)
        .def_readwrite("strides", &PyramidConfig::strides)
        .def_readwrite("scale_multipliers", &PyramidConfig::scale_multipliers)
        .def_readwrite("aspect_ratio", &PyramidConfig::aspect_ratio)
        .def_readwrite("low_level_count", &PyramidConfig::low_level_count)
        .def("validate", &PyramidConfig::validate);

    py::class_<AnchorSet>(m, "AnchorSet")
        .def_property_readonly("boxes", [](const AnchorSet& s) { return from_boxes(s.boxes); })
        .def_property_readonly("levels",
                               [](const AnchorSet& s) {
                                   py::array_t<int> out(static_cast<py::ssize_t>(s.levels.size()));
                                   std::memcpy(out.mutable_data(), s.levels.data(),
                                               s.levels.size() * sizeof(int));
                                   return out;
                               })
        .def_property_readonly("level_offsets",
                               [](const AnchorSet& s) { return s.level_offsets; })
        .def_readonly("config", &AnchorSet::config)
        .def("level_count", &AnchorSet::level_count)
        .def("is_low_level", &AnchorSet::is_low_level)
        .def("__len__", &AnchorSet::size);

    m.def("generate_anchors", &generate_pyramid_anchors, py::arg("config") = PyramidConfig{});

    m.def(
        "anchor_stats",
        [](const PyramidConfig& config) {
            const AnchorStats stats = anchor_count_stats(config);
            py::dict d;
            d["per_level"] = stats.per_level;
            d["total"] = stats.total;
            d["low_level_fraction"] = stats.low_level_fraction;
            return d;
        },
        py::arg("config") = PyramidConfig{});

    m.def(
        "iou",
        [](const DoubleArray& a, const DoubleArray& b) {
            if (a.ndim() != 1 || a.shape(0) != 4 || b.ndim() != 1 || b.shape(0) != 4)
                throw std::invalid_argument("expected two length-4 boxes");
            const auto av = a.unchecked<1>(), bv = b.unchecked<1>();
            return iou(Box{av(0), av(1), av(2), av(3)}, Box{bv(0), bv(1), bv(2), bv(3)});
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "match",
        [](const DoubleArray& anchors, const DoubleArray& gts, double theta_p, double theta_n) {
            const MatchResult r =
                match_anchors(to_boxes(anchors), to_boxes(gts), MatchThresholds{theta_p, theta_n});
            py::array_t<int> gt_index(static_cast<py::ssize_t>(r.size()));
            std::memcpy(gt_index.mutable_data(), r.gt_index.data(), r.size() * sizeof(int));
            return py::make_tuple(gt_index, from_scalars(r.max_iou));
        },
        py::arg("anchors"), py::arg("gts"), py::arg("theta_p") = 0.7, py::arg("theta_n") = 0.3,
        "Per-anchor matched gt index (-1 negative, -2 ignored) and best IoU.");

    m.def(
        "encode",
        [](const DoubleArray& gts, const DoubleArray& anchors) {
            const auto g = to_boxes(gts), a = to_boxes(anchors);
            if (g.size() != a.size()) throw std::invalid_argument("box counts differ");
            std::vector<BoxDelta> out(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) out[i] = encode(g[i], a[i]);
            return from_deltas(out);
        },
        py::arg("gts"), py::arg("anchors"));

    m.def(
        "decode",
        [](const DoubleArray& anchors, const DoubleArray& deltas) {
            const auto a = to_boxes(anchors);
            const auto d = to_deltas(deltas);
            if (a.size() != d.size()) throw std::invalid_argument("row counts differ");
            std::vector<Box> out(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = decode(a[i], d[i]);
            return from_boxes(out);
        },
        py::arg("anchors"), py::arg("deltas"));

    m.def(
        "focal_loss",
        [](double p, bool positive, double alpha, double gamma) {
            LossConfig cfg;
            cfg.focal_alpha = alpha;
            cfg.focal_gamma = gamma;
            return focal_loss(p, positive, cfg);
        },
        py::arg("p"), py::arg("positive"), py::arg("alpha") = 0.25, py::arg("gamma") = 2.0);

    m.def(
        "smooth_l1",
        [](const DoubleArray& predicted, const DoubleArray& target, double beta) {
            const auto p = to_deltas(predicted), t = to_deltas(target);
            if (p.size() != t.size()) throw std::invalid_argument("row counts differ");
            std::vector<double> out(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) out[i] = smooth_l1(p[i], t[i], beta);
            return from_scalars(out);
        },
        py::arg("predicted"), py::arg("target"), py::arg("beta") = 1.0,
        "Per-row smooth-L1 summed over the four delta components.");

    m.def(
        "nms",
        [](const DoubleArray& detections, double iou_threshold) {
            return from_detections(nms(to_detections(detections), iou_threshold));
        },
        py::arg("detections"), py::arg("iou_threshold") = 0.4);

    m.def(
        "run_inference",
        [](const AnchorSet& anchors, const DoubleArray& s1, const DoubleArray& d1,
           const DoubleArray& s2, const DoubleArray& d2, double width, double height,
           double stc_threshold, std::size_t top_k, double nms_iou, std::size_t cap) {
            const InferenceParams params{stc_threshold, top_k, nms_iou, cap};
            return from_detections(
                run_inference(anchors, to_step_scores(s1, d1, s2, d2), params, width, height));
        },
        py::arg("anchors"), py::arg("first_scores"), py::arg("first_deltas"),
        py::arg("second_scores"), py::arg("second_deltas"), py::arg("width"), py::arg("height"),
        py::arg("stc_threshold") = 0.01, py::arg("top_k") = 2000, py::arg("nms_iou") = 0.4,
        py::arg("cap") = 750);

    m.def(
        "synth_scene",
        [](const AnchorSet& anchors, int face_count, double min_scale, double max_scale,
           double delta_sigma, bool oracle_scores, std::uint64_t seed) {
            SceneSpec spec;
            spec.image_width = anchors.config.input_width;
            spec.image_height = anchors.config.input_height;
            spec.face_count = face_count;
            spec.min_scale = min_scale;
            spec.max_scale = max_scale;
            spec.delta_sigma = delta_sigma;
            spec.oracle_scores = oracle_scores;
            spec.seed = seed;
            const SynthScene scene = synth_scene(spec, anchors);
            py::dict d;
            d["faces"] = from_boxes(scene.faces);
            py::array_t<int> anchor_face(static_cast<py::ssize_t>(scene.anchor_face.size()));
            std::memcpy(anchor_face.mutable_data(), scene.anchor_face.data(),
                        scene.anchor_face.size() * sizeof(int));
            d["anchor_face"] = anchor_face;
            d["first_scores"] = from_scalars(scene.scores.first.scores);
            d["first_deltas"] = from_deltas(scene.scores.first.deltas);
            d["second_scores"] = from_scalars(scene.scores.second.scores);
            d["second_deltas"] = from_deltas(scene.scores.second.deltas);
            return d;
        },
        py::arg("anchors"), py::arg("face_count") = 10, py::arg("min_scale") = 8.0,
        py::arg("max_scale") = 362.0, py::arg("delta_sigma") = 0.0,
        py::arg("oracle_scores") = false, py::arg("seed") = 0,
        "Random non-overlapping faces plus two-step scores over the anchor set.");

    m.def(
        "evaluate",
        [](const std::vector<std::pair<std::string, DoubleArray>>& ground_truth,
           const std::map<std::string, DoubleArray>& detections, double easy_min_height,
           double medium_min_height, double iou_threshold) {
            std::vector<GtEntry> gt;
            gt.reserve(ground_truth.size());
            for (const auto& [path, faces] : ground_truth) {
                if (faces.ndim() != 2 || (faces.shape(0) > 0 && faces.shape(1) != 10))
                    throw std::invalid_argument("expected (F, 10) face rows for " + path);
                GtEntry entry;
                entry.path = path;
                const auto view = faces.unchecked<2>();
                for (py::ssize_t i = 0; i < view.shape(0); ++i)
                    entry.faces.push_back(GroundTruthFace{
                        view(i, 0), view(i, 1), view(i, 2), view(i, 3),
                        static_cast<int>(view(i, 4)), static_cast<int>(view(i, 5)),
                        static_cast<int>(view(i, 6)), static_cast<int>(view(i, 7)),
                        static_cast<int>(view(i, 8)), static_cast<int>(view(i, 9))});
                gt.push_back(std::move(entry));
            }
            std::map<std::string, std::vector<Detection>> dets;
            for (const auto& [path, arr] : detections) dets[path] = to_detections(arr);
            const SubsetBands bands{easy_min_height, medium_min_height};
            const auto curves = evaluate(gt, dets, bands, nullptr, iou_threshold);
            py::dict out;
            for (const auto& [subset, curve] : curves) {
                py::dict c;
                c["ap"] = curve.ap;
                c["thresholds"] = from_scalars(curve.thresholds);
                c["precision"] = from_scalars(curve.precision);
                c["recall"] = from_scalars(curve.recall);
                out[subset.c_str()] = c;
            }
            return out;
        },
        py::arg("ground_truth"), py::arg("detections"), py::arg("easy_min_height") = 50.0,
        py::arg("medium_min_height") = 30.0, py::arg("iou_threshold") = 0.5,
        "Per-subset precision/recall curves and average precision. ground_truth "
        "is a list of (image_path, (F, 10) face rows); detections maps image "
        "paths to (N, 5) arrays.");

    m.def(
        "stem_summary",
        [](const std::string& name, int input_height, int input_width) {
            const StemVariant stem = build_stem(name);
            const auto rows = trace_shapes(stem, input_height, input_width);
            py::list trace;
            for (const auto& row : rows) {
                py::dict r = layer_to_dict(row.layer);
                r["out_height"] = row.out_height;
                r["out_width"] = row.out_width;
                r["out_channels"] = row.out_channels;
                r["cumulative_stride"] = row.cumulative_stride;
                trace.append(r);
            }
            py::dict d;
            d["name"] = stem.name;
            d["trace"] = trace;
            d["params"] = param_count(stem);
            return d;
        },
        py::arg("name"), py::arg("input_height") = 1024, py::arg("input_width") = 1024,
        "Layer-by-layer output shapes and weight count for a stem variant.");
}
