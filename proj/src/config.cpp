#include "srnkit/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "srnkit/wider_io.hpp"

namespace srnkit {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value) {
    throw std::invalid_argument("config: bad value '" + std::string(value) + "' for key '" + key +
                                "'");
}

double to_double(const std::string& key, std::string_view v) {
    double out;
    const auto last = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), last, out);
    if (ec != std::errc() || p != last) bad_value(key, v);
    return out;
}

long long to_int(const std::string& key, std::string_view v) {
    long long out;
    const auto last = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), last, out);
    if (ec != std::errc() || p != last) bad_value(key, v);
    return out;
}

std::uint64_t to_u64(const std::string& key, std::string_view v) {
    std::uint64_t out;
    const auto last = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), last, out);
    if (ec != std::errc() || p != last) bad_value(key, v);
    return out;
}

bool to_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, v);
}

template <typename T, typename Parse>
std::vector<T> to_list(const std::string& key, std::string_view v, Parse parse) {
    std::vector<T> out;
    while (!v.empty()) {
        const std::size_t comma = v.find(',');
        const std::string_view item = trim(v.substr(0, comma));
        if (item.empty()) bad_value(key, v);
        out.push_back(parse(key, item));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    if (out.empty()) bad_value(key, v);
    return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        if constexpr (std::is_same_v<T, double>)
            out += format_double(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

struct Field {
    const char* key;
    std::function<void(RunConfig&, const std::string&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"pyramid.input_width",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.pyramid.input_width = static_cast<int>(to_int(k, v));
         },
         [](const RunConfig& c) { return std::to_string(c.pyramid.input_width); }},
        {"pyramid.input_height",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.pyramid.input_height = static_cast<int>(to_int(k, v));
         },
         [](const RunConfig& c) { return std::to_string(c.pyramid.input_height); }},
        {"pyramid.strides",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.pyramid.strides = to_list<int>(k, v, [](const std::string& kk, std::string_view vv) {
                 return static_cast<int>(to_int(kk, vv));
             });
         },
         [](const RunConfig& c) { return join(c.pyramid.strides); }},
        {"pyramid.scale_multipliers",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.pyramid.scale_multipliers = to_list<double>(k, v, to_double);
         },
         [](const RunConfig& c) { return join(c.pyramid.scale_multipliers); }},
        {"pyramid.aspect_ratio",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.pyramid.aspect_ratio = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.pyramid.aspect_ratio); }},
        {"pyramid.low_level_count",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.pyramid.low_level_count = static_cast<int>(to_int(k, v));
         },
         [](const RunConfig& c) { return std::to_string(c.pyramid.low_level_count); }},

        {"loss.focal_alpha",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.loss.focal_alpha = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.loss.focal_alpha); }},
        {"loss.focal_gamma",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.loss.focal_gamma = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.loss.focal_gamma); }},
        {"loss.smooth_l1_beta",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.loss.smooth_l1_beta = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.loss.smooth_l1_beta); }},
        {"loss.probability_epsilon",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.loss.probability_epsilon = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.loss.probability_epsilon); }},

        {"augment.output_size",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.output_size = static_cast<int>(to_int(k, v));
         },
         [](const RunConfig& c) { return std::to_string(c.augment.output_size); }},
        {"augment.das_probability",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.das_probability = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.das_probability); }},
        {"augment.anchor_scale_set",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.anchor_scale_set = to_list<double>(k, v, to_double);
         },
         [](const RunConfig& c) { return join(c.augment.anchor_scale_set); }},
        {"augment.das_jitter_lo",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.das_jitter_lo = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.das_jitter_lo); }},
        {"augment.das_jitter_hi",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.das_jitter_hi = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.das_jitter_hi); }},
        {"augment.expand_max_ratio",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.expand_max_ratio = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.expand_max_ratio); }},
        {"augment.crop_min_fraction",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.crop_min_fraction = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.crop_min_fraction); }},
        {"augment.crop_retries",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.crop_retries = static_cast<int>(to_int(k, v));
         },
         [](const RunConfig& c) { return std::to_string(c.augment.crop_retries); }},
        {"augment.allow_faceless_crop",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.allow_faceless_crop = to_bool(k, v);
         },
         [](const RunConfig& c) { return c.augment.allow_faceless_crop ? "true" : "false"; }},
        {"augment.brightness_delta",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.brightness_delta = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.brightness_delta); }},
        {"augment.contrast_lo",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.contrast_lo = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.contrast_lo); }},
        {"augment.contrast_hi",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.contrast_hi = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.contrast_hi); }},
        {"augment.saturation_lo",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.saturation_lo = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.saturation_lo); }},
        {"augment.saturation_hi",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.saturation_hi = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.saturation_hi); }},
        {"augment.hue_delta_deg",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.augment.hue_delta_deg = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.augment.hue_delta_deg); }},

        {"inference.stc_threshold",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.inference.stc_threshold = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.inference.stc_threshold); }},
        {"inference.top_k",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.inference.top_k = static_cast<std::size_t>(to_u64(k, v));
         },
         [](const RunConfig& c) { return std::to_string(c.inference.top_k); }},
        {"inference.nms_iou",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.inference.nms_iou = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.inference.nms_iou); }},
        {"inference.cap",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.inference.cap = static_cast<std::size_t>(to_u64(k, v));
         },
         [](const RunConfig& c) { return std::to_string(c.inference.cap); }},

        {"match.step1_theta_p",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.step1.theta_p = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.step1.theta_p); }},
        {"match.step1_theta_n",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.step1.theta_n = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.step1.theta_n); }},
        {"match.step2_theta_p",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.step2.theta_p = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.step2.theta_p); }},
        {"match.step2_theta_n",
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.step2.theta_n = to_double(k, v);
         },
         [](const RunConfig& c) { return format_double(c.step2.theta_n); }},

        {"seed",
         [](RunConfig& c, const std::string& k, std::string_view v) { c.seed = to_u64(k, v); },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
    };
    return table;
}

void check_thresholds(const char* step, const MatchThresholds& t) {
    if (!(t.theta_n >= 0.0 && t.theta_n <= t.theta_p && t.theta_p <= 1.0))
        throw std::invalid_argument(std::string("RunConfig: ") + step +
                                    " thresholds need 0 <= theta_n <= theta_p <= 1");
}

}  // namespace

void RunConfig::validate() const {
    pyramid.validate();
    augment.validate();
    if (!(loss.focal_alpha > 0.0 && loss.focal_alpha < 1.0))
        throw std::invalid_argument("RunConfig: loss.focal_alpha must lie in (0, 1)");
    if (!(loss.focal_gamma >= 0.0))
        throw std::invalid_argument("RunConfig: loss.focal_gamma must be >= 0");
    if (!(loss.smooth_l1_beta > 0.0))
        throw std::invalid_argument("RunConfig: loss.smooth_l1_beta must be positive");
    if (!(loss.probability_epsilon > 0.0 && loss.probability_epsilon < 0.5))
        throw std::invalid_argument("RunConfig: loss.probability_epsilon must lie in (0, 0.5)");
    if (!(inference.stc_threshold >= 0.0 && inference.stc_threshold <= 1.0))
        throw std::invalid_argument("RunConfig: inference.stc_threshold must lie in [0, 1]");
    if (!(inference.nms_iou >= 0.0 && inference.nms_iou < 1.0))
        throw std::invalid_argument("RunConfig: inference.nms_iou must lie in [0, 1)");
    if (inference.cap == 0) throw std::invalid_argument("RunConfig: inference.cap must be >= 1");
    check_thresholds("step1", step1);
    check_thresholds("step2", step2);
}

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
    for (const Field& f : fields()) {
        if (key == f.key) {
            f.set(config, key, trim(value));
            return;
        }
    }
    throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& in, const RunConfig& base, const std::string& source) {
    RunConfig config = base;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument(source + ":" + std::to_string(line_number) +
                                        ": expected 'key = value'");
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        try {
            apply_config_entry(config, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(source + ":" + std::to_string(line_number) + ": " +
                                        e.what());
        }
    }
    config.validate();
    return config;
}

RunConfig load_config_file(const std::filesystem::path& path, const RunConfig& base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    return parse_config(in, base, path.string());
}

std::string print_config(const RunConfig& config) {
    std::string out;
    for (const Field& f : fields()) {
        out += f.key;
        out += " = ";
        out += f.get(config);
        out += '\n';
    }
    return out;
}

}  // namespace srnkit
