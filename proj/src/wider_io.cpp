#include "srnkit/wider_io.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <charconv>
#include <clocale>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace srnkit {
namespace {

namespace fs = std::filesystem;

// Incremental line reader that keeps a 1-based line counter and tolerates
// CRLF endings.
struct LineReader {
    std::istream& in;
    const std::string& source;
    std::size_t line_number = 0;
    std::string pending;
    bool has_pending = false;

    bool next(std::string& out) {
        if (has_pending) {
            out = std::move(pending);
            has_pending = false;
            ++line_number;
            return true;
        }
        if (!std::getline(in, out)) return false;
        if (!out.empty() && out.back() == '\r') out.pop_back();
        ++line_number;
        return true;
    }

    void push_back(std::string line) {
        pending = std::move(line);
        has_pending = true;
        --line_number;
    }
};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool is_blank(std::string_view line) { return split_ws(line).empty(); }

int parse_flag(std::string_view token, int max_value, const char* name,
               const std::string& source, std::size_t line) {
    const long v = parse_long(token, source, line);
    if (v < 0 || v > max_value)
        throw parse_error(source, line,
                          std::string(name) + " flag out of range: " + std::string(token));
    return static_cast<int>(v);
}

GroundTruthFace parse_face_line(std::string_view line, const std::string& source,
                                std::size_t line_number) {
    const auto tokens = split_ws(line);
    if (tokens.size() != 10)
        throw parse_error(source, line_number,
                          "expected 10 fields on annotation line, got " +
                              std::to_string(tokens.size()));
    GroundTruthFace f;
    f.x = parse_double(tokens[0], source, line_number);
    f.y = parse_double(tokens[1], source, line_number);
    f.w = parse_double(tokens[2], source, line_number);
    f.h = parse_double(tokens[3], source, line_number);
    if (f.w < 0.0 || f.h < 0.0)
        throw parse_error(source, line_number, "negative face width or height");
    f.blur = parse_flag(tokens[4], 2, "blur", source, line_number);
    f.expression = parse_flag(tokens[5], 1, "expression", source, line_number);
    f.illumination = parse_flag(tokens[6], 1, "illumination", source, line_number);
    f.invalid = parse_flag(tokens[7], 1, "invalid", source, line_number);
    f.occlusion = parse_flag(tokens[8], 2, "occlusion", source, line_number);
    f.pose = parse_flag(tokens[9], 1, "pose", source, line_number);
    return f;
}

bool all_numeric(const std::vector<std::string_view>& tokens) {
    for (auto t : tokens) {
        double v;
        const auto last = t.data() + t.size();
        auto [p, ec] = std::from_chars(t.data(), last, v);
        if (ec != std::errc() || p != last) return false;
    }
    return true;
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

void write_f32_le(std::ostream& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes, 4);
}

std::uint64_t read_u64_le(std::istream& in, const std::string& source) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8))
        throw parse_error(source, 0, "truncated score file header");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

float read_f32_le(std::istream& in, const std::string& source, std::size_t index) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4))
        throw parse_error(source, 0,
                          "truncated score payload at anchor " + std::to_string(index));
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    return std::bit_cast<float>(bits);
}

constexpr char kScoreMagic[8] = {'S', 'R', 'N', 'S', 'C', 'O', 'R', 'E'};

void check_score_value(double v, const char* what, const std::string& source,
                       std::size_t index) {
    if (!(v >= 0.0 && v <= 1.0))
        throw parse_error(source, 0,
                          std::string(what) + " out of [0,1] at anchor " + std::to_string(index));
}

void check_delta_value(double v, const std::string& source, std::size_t index) {
    if (!std::isfinite(v))
        throw parse_error(source, 0, "non-finite delta at anchor " + std::to_string(index));
}

StepScores make_scores(std::size_t count) {
    StepScores s;
    s.first.scores.resize(count);
    s.first.deltas.resize(count);
    s.second.scores.resize(count);
    s.second.deltas.resize(count);
    return s;
}

void append_anchor_values(std::string& out, const StepScores& s, std::size_t i) {
    const auto put = [&out](double v) {
        out += ' ';
        out += format_double(static_cast<double>(static_cast<float>(v)));
    };
    out += format_double(static_cast<double>(static_cast<float>(s.first.scores[i])));
    put(s.first.deltas[i].dx);
    put(s.first.deltas[i].dy);
    put(s.first.deltas[i].dw);
    put(s.first.deltas[i].dh);
    put(s.second.scores[i]);
    put(s.second.deltas[i].dx);
    put(s.second.deltas[i].dy);
    put(s.second.deltas[i].dw);
    put(s.second.deltas[i].dh);
}

std::ofstream open_out(const fs::path& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path, bool binary) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

}  // namespace

parse_error::parse_error(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(line == 0 ? source + ": " + message
                                   : source + ":" + std::to_string(line) + ": " + message),
      line_(line) {}

std::string format_double(double value) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, p);
}

std::string format_fixed(double value, int decimals) {
    char buf[512];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, decimals);
    if (ec != std::errc()) throw std::runtime_error("format_fixed: conversion failed");
    return std::string(buf, p);
}

std::string format_coord(double value) {
    if (std::floor(value) == value && std::abs(value) < 1e15) {
        char buf[32];
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<long long>(value));
        if (ec != std::errc()) throw std::runtime_error("format_coord: conversion failed");
        return std::string(buf, p);
    }
    return format_double(value);
}

double parse_double(std::string_view token, const std::string& source, std::size_t line) {
    double v;
    const auto last = token.data() + token.size();
    auto [p, ec] = std::from_chars(token.data(), last, v);
    if (ec != std::errc() || p != last)
        throw parse_error(source, line, "not a number: '" + std::string(token) + "'");
    if (!std::isfinite(v))
        throw parse_error(source, line, "non-finite number: '" + std::string(token) + "'");
    return v;
}

long parse_long(std::string_view token, const std::string& source, std::size_t line) {
    long v;
    const auto last = token.data() + token.size();
    auto [p, ec] = std::from_chars(token.data(), last, v);
    if (ec != std::errc() || p != last)
        throw parse_error(source, line, "not an integer: '" + std::string(token) + "'");
    return v;
}

std::vector<GtEntry> parse_gt(std::istream& in, const std::string& source) {
    LineReader reader{in, source};
    std::vector<GtEntry> entries;
    std::string line;
    while (reader.next(line)) {
        if (is_blank(line) && entries.empty()) continue;  // leading blank lines only
        if (is_blank(line)) {
            // Blank lines inside or after the data are trailing garbage
            // unless the stream ends here.
            std::string rest;
            while (reader.next(rest))
                if (!is_blank(rest))
                    throw parse_error(source, reader.line_number, "trailing garbage after last block");
            break;
        }

        GtEntry entry;
        entry.path = line;
        const std::size_t path_line = reader.line_number;

        std::string count_line;
        if (!reader.next(count_line))
            throw parse_error(source, path_line, "missing count line after image path");
        const auto count_tokens = split_ws(count_line);
        if (count_tokens.size() != 1)
            throw parse_error(source, reader.line_number, "count line must hold a single integer");
        const long count = parse_long(count_tokens[0], source, reader.line_number);
        if (count < 0) throw parse_error(source, reader.line_number, "negative face count");

        if (count == 0) {
            // Official zero-count blocks carry an all-zero placeholder line;
            // files without it are accepted too.
            std::string placeholder;
            if (reader.next(placeholder)) {
                const auto tokens = split_ws(placeholder);
                if (tokens.size() == 10 && all_numeric(tokens)) {
                    for (auto t : tokens)
                        if (parse_double(t, source, reader.line_number) != 0.0)
                            throw parse_error(source, reader.line_number,
                                              "nonzero annotation after zero count");
                } else {
                    reader.push_back(std::move(placeholder));
                }
            }
        } else {
            entry.faces.reserve(static_cast<std::size_t>(count));
            for (long i = 0; i < count; ++i) {
                std::string face_line;
                if (!reader.next(face_line))
                    throw parse_error(source, reader.line_number,
                                      "expected " + std::to_string(count) + " annotation lines, got " +
                                          std::to_string(i));
                entry.faces.push_back(parse_face_line(face_line, source, reader.line_number));
            }
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<GtEntry> parse_gt_file(const fs::path& path) {
    auto in = open_in(path, false);
    return parse_gt(in, path.string());
}

void write_gt(std::ostream& out, const std::vector<GtEntry>& entries) {
    for (const GtEntry& entry : entries) {
        out << entry.path << '\n' << entry.faces.size() << '\n';
        if (entry.faces.empty()) {
            out << "0 0 0 0 0 0 0 0 0 0\n";
            continue;
        }
        for (const GroundTruthFace& f : entry.faces) {
            out << format_coord(f.x) << ' ' << format_coord(f.y) << ' ' << format_coord(f.w) << ' '
                << format_coord(f.h) << ' ' << f.blur << ' ' << f.expression << ' '
                << f.illumination << ' ' << f.invalid << ' ' << f.occlusion << ' ' << f.pose
                << '\n';
        }
    }
}

void write_gt_file(const fs::path& path, const std::vector<GtEntry>& entries) {
    auto out = open_out(path, false);
    write_gt(out, entries);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_detections(std::ostream& out, const std::string& image_path,
                      const std::vector<Detection>& detections, bool allow_over_cap) {
    if (detections.size() > kDetectionCap && !allow_over_cap)
        throw std::invalid_argument("write_detections: " + std::to_string(detections.size()) +
                                    " detections exceed the cap of " +
                                    std::to_string(kDetectionCap) +
                                    "; pass the no-cap override to write anyway");
    out << image_path << '\n' << detections.size() << '\n';
    for (const Detection& d : detections) {
        out << format_fixed(d.box.x1, 6) << ' ' << format_fixed(d.box.y1, 6) << ' '
            << format_fixed(d.box.width(), 6) << ' ' << format_fixed(d.box.height(), 6) << ' '
            << format_fixed(d.score, 6) << '\n';
    }
}

DetectionFile parse_detections(std::istream& in, const std::string& source) {
    LineReader reader{in, source};
    DetectionFile file;
    std::string line;
    if (!reader.next(line)) throw parse_error(source, 1, "empty detection file");
    if (is_blank(line)) throw parse_error(source, reader.line_number, "missing image path line");
    file.image_path = line;

    std::string count_line;
    if (!reader.next(count_line))
        throw parse_error(source, reader.line_number, "missing detection count line");
    const auto count_tokens = split_ws(count_line);
    if (count_tokens.size() != 1)
        throw parse_error(source, reader.line_number, "count line must hold a single integer");
    const long count = parse_long(count_tokens[0], source, reader.line_number);
    if (count < 0) throw parse_error(source, reader.line_number, "negative detection count");

    file.detections.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        if (!reader.next(line))
            throw parse_error(source, reader.line_number,
                              "expected " + std::to_string(count) + " detection lines, got " +
                                  std::to_string(i));
        const auto tokens = split_ws(line);
        if (tokens.size() != 5)
            throw parse_error(source, reader.line_number,
                              "expected 5 fields on detection line, got " +
                                  std::to_string(tokens.size()));
        const double x = parse_double(tokens[0], source, reader.line_number);
        const double y = parse_double(tokens[1], source, reader.line_number);
        const double w = parse_double(tokens[2], source, reader.line_number);
        const double h = parse_double(tokens[3], source, reader.line_number);
        const double score = parse_double(tokens[4], source, reader.line_number);
        if (w < 0.0 || h < 0.0)
            throw parse_error(source, reader.line_number, "negative detection size");
        if (!(score >= 0.0 && score <= 1.0))
            throw parse_error(source, reader.line_number, "detection score outside [0, 1]");
        file.detections.push_back({Box{x, y, x + w, y + h}, score});
    }
    while (reader.next(line))
        if (!is_blank(line))
            throw parse_error(source, reader.line_number, "trailing garbage after detections");
    return file;
}

DetectionFile parse_detections_file(const fs::path& path) {
    auto in = open_in(path, false);
    return parse_detections(in, path.string());
}

void write_detections_dir(const fs::path& dir,
                          const std::map<std::string, std::vector<Detection>>& per_image,
                          bool allow_over_cap) {
    for (const auto& [image_path, dets] : per_image) {
        fs::path rel(image_path);
        rel.replace_extension(".txt");
        const fs::path target = dir / rel;
        fs::create_directories(target.parent_path());
        auto out = open_out(target, false);
        write_detections(out, image_path, dets, allow_over_cap);
        if (!out) throw std::runtime_error("write failed: " + target.string());
    }
}

std::map<std::string, std::vector<Detection>> parse_detections_dir(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw std::runtime_error("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::map<std::string, std::vector<Detection>> out;
    for (const fs::path& file : files) {
        DetectionFile parsed = parse_detections_file(file);
        if (!out.emplace(parsed.image_path, std::move(parsed.detections)).second)
            throw std::runtime_error("duplicate detection entry for image '" + parsed.image_path +
                                     "' in " + file.string());
    }
    return out;
}

void write_scores_binary(std::ostream& out, const StepScores& scores) {
    out.write(kScoreMagic, 8);
    write_u64_le(out, scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        write_f32_le(out, static_cast<float>(scores.first.scores[i]));
        write_f32_le(out, static_cast<float>(scores.first.deltas[i].dx));
        write_f32_le(out, static_cast<float>(scores.first.deltas[i].dy));
        write_f32_le(out, static_cast<float>(scores.first.deltas[i].dw));
        write_f32_le(out, static_cast<float>(scores.first.deltas[i].dh));
        write_f32_le(out, static_cast<float>(scores.second.scores[i]));
        write_f32_le(out, static_cast<float>(scores.second.deltas[i].dx));
        write_f32_le(out, static_cast<float>(scores.second.deltas[i].dy));
        write_f32_le(out, static_cast<float>(scores.second.deltas[i].dw));
        write_f32_le(out, static_cast<float>(scores.second.deltas[i].dh));
    }
}

StepScores parse_scores_binary(std::istream& in, const std::string& source) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kScoreMagic, 8) != 0)
        throw parse_error(source, 0, "bad score file magic");
    const std::uint64_t count = read_u64_le(in, source);
    StepScores s = make_scores(count);
    for (std::size_t i = 0; i < count; ++i) {
        s.first.scores[i] = read_f32_le(in, source, i);
        s.first.deltas[i].dx = read_f32_le(in, source, i);
        s.first.deltas[i].dy = read_f32_le(in, source, i);
        s.first.deltas[i].dw = read_f32_le(in, source, i);
        s.first.deltas[i].dh = read_f32_le(in, source, i);
        s.second.scores[i] = read_f32_le(in, source, i);
        s.second.deltas[i].dx = read_f32_le(in, source, i);
        s.second.deltas[i].dy = read_f32_le(in, source, i);
        s.second.deltas[i].dw = read_f32_le(in, source, i);
        s.second.deltas[i].dh = read_f32_le(in, source, i);
        check_score_value(s.first.scores[i], "first-step score", source, i);
        check_score_value(s.second.scores[i], "second-step score", source, i);
        for (double d : {s.first.deltas[i].dx, s.first.deltas[i].dy, s.first.deltas[i].dw,
                         s.first.deltas[i].dh, s.second.deltas[i].dx, s.second.deltas[i].dy,
                         s.second.deltas[i].dw, s.second.deltas[i].dh})
            check_delta_value(d, source, i);
    }
    if (in.get() != std::istream::traits_type::eof())
        throw parse_error(source, 0, "trailing bytes after score payload");
    return s;
}

void write_scores_text(std::ostream& out, const StepScores& scores) {
    out << "srnscore " << scores.size() << '\n';
    std::string line;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        line.clear();
        append_anchor_values(line, scores, i);
        out << line << '\n';
    }
}

StepScores parse_scores_text(std::istream& in, const std::string& source) {
    LineReader reader{in, source};
    std::string line;
    if (!reader.next(line)) throw parse_error(source, 1, "empty score file");
    const auto header = split_ws(line);
    if (header.size() != 2 || header[0] != "srnscore")
        throw parse_error(source, reader.line_number, "expected 'srnscore <count>' header");
    const long count = parse_long(header[1], source, reader.line_number);
    if (count < 0) throw parse_error(source, reader.line_number, "negative anchor count");

    StepScores s = make_scores(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        if (!reader.next(line))
            throw parse_error(source, reader.line_number,
                              "expected " + std::to_string(count) + " anchor lines, got " +
                                  std::to_string(i));
        const auto tokens = split_ws(line);
        if (tokens.size() != 10)
            throw parse_error(source, reader.line_number,
                              "expected 10 values per anchor line, got " +
                                  std::to_string(tokens.size()));
        double v[10];
        for (int k = 0; k < 10; ++k) v[k] = parse_double(tokens[k], source, reader.line_number);
        const std::size_t idx = static_cast<std::size_t>(i);
        s.first.scores[idx] = v[0];
        s.first.deltas[idx] = {v[1], v[2], v[3], v[4]};
        s.second.scores[idx] = v[5];
        s.second.deltas[idx] = {v[6], v[7], v[8], v[9]};
        check_score_value(v[0], "first-step score", source, idx);
        check_score_value(v[5], "second-step score", source, idx);
    }
    while (reader.next(line))
        if (!is_blank(line))
            throw parse_error(source, reader.line_number, "trailing garbage after score lines");
    return s;
}

void write_scores_file(const fs::path& path, const StepScores& scores, bool binary) {
    auto out = open_out(path, binary);
    if (binary)
        write_scores_binary(out, scores);
    else
        write_scores_text(out, scores);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

StepScores parse_scores_file(const fs::path& path) {
    auto in = open_in(path, true);
    char magic[8] = {};
    in.read(magic, 8);
    const bool binary = in.gcount() == 8 && std::memcmp(magic, kScoreMagic, 8) == 0;
    in.clear();
    in.seekg(0);
    if (binary) return parse_scores_binary(in, path.string());
    return parse_scores_text(in, path.string());
}

void assert_locale_safe() {
    const char* guard = std::getenv("SRNKIT_LOCALE_GUARD");
    if (guard == nullptr || std::string_view(guard) != "1") return;
    const lconv* lc = std::localeconv();
    if (lc == nullptr || lc->decimal_point == nullptr ||
        std::string_view(lc->decimal_point) != ".")
        throw std::runtime_error(
            "SRNKIT_LOCALE_GUARD: global C locale does not use '.' as decimal separator");
    char probe[32];
    std::snprintf(probe, sizeof(probe), "%.1f", 0.5);
    if (std::string_view(probe) != "0.5")
        throw std::runtime_error("SRNKIT_LOCALE_GUARD: stdio formatting is locale-poisoned");
}

}  // namespace srnkit
