#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "srnkit/box.hpp"
#include "srnkit/pipeline.hpp"

namespace srnkit {

// One annotated face, stored in the file's x/y/w/h convention. Attribute
// codes: blur 0..2, expression 0..1, illumination 0..1, invalid 0..1,
// occlusion 0..2, pose 0..1.
struct GroundTruthFace {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    int blur = 0;
    int expression = 0;
    int illumination = 0;
    int invalid = 0;
    int occlusion = 0;
    int pose = 0;

    Box box() const { return {x, y, x + w, y + h}; }
    bool zero_size() const { return w <= 0.0 || h <= 0.0; }

    friend bool operator==(const GroundTruthFace&, const GroundTruthFace&) = default;
};

struct GtEntry {
    std::string path;
    std::vector<GroundTruthFace> faces;

    friend bool operator==(const GtEntry&, const GtEntry&) = default;
};

class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& source, std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Ground-truth files: repeated blocks of path line, count line, then count
// annotation lines of "x y w h blur expression illumination invalid
// occlusion pose". A zero count may be followed by one all-zero placeholder
// line; the writer always emits it. Anything after the last block is an
// error.
std::vector<GtEntry> parse_gt(std::istream& in, const std::string& source = "<stream>");
std::vector<GtEntry> parse_gt_file(const std::filesystem::path& path);
void write_gt(std::ostream& out, const std::vector<GtEntry>& entries);
void write_gt_file(const std::filesystem::path& path, const std::vector<GtEntry>& entries);

inline constexpr std::size_t kDetectionCap = 750;

// Per-image detection files: path line, count line, then "x y w h score"
// lines, all fields fixed at six decimals. Writing more than kDetectionCap
// detections requires allow_over_cap.
void write_detections(std::ostream& out, const std::string& image_path,
                      const std::vector<Detection>& detections, bool allow_over_cap = false);
struct DetectionFile {
    std::string image_path;
    std::vector<Detection> detections;
};
DetectionFile parse_detections(std::istream& in, const std::string& source = "<stream>");
DetectionFile parse_detections_file(const std::filesystem::path& path);

// Directory layout mirrors WIDER submissions: one <image stem>.txt per
// image, nested per event directory when the image path has one.
void write_detections_dir(const std::filesystem::path& dir,
                          const std::map<std::string, std::vector<Detection>>& per_image,
                          bool allow_over_cap = false);
std::map<std::string, std::vector<Detection>> parse_detections_dir(
    const std::filesystem::path& dir);

// Score files carry the two-step per-anchor predictions: ten values per
// anchor in the order score1, d1x, d1y, d1w, d1h, score2, d2x, d2y, d2w,
// d2h. Binary form: 8-byte magic "SRNSCORE", anchor count as a little-
// endian uint64, then the values as little-endian 32-bit floats. Text
// form: header line "srnscore <count>", then one ten-value line per
// anchor. Values are stored at 32-bit precision in both forms.
void write_scores_binary(std::ostream& out, const StepScores& scores);
StepScores parse_scores_binary(std::istream& in, const std::string& source = "<stream>");
void write_scores_text(std::ostream& out, const StepScores& scores);
StepScores parse_scores_text(std::istream& in, const std::string& source = "<stream>");
void write_scores_file(const std::filesystem::path& path, const StepScores& scores,
                       bool binary = true);
// Sniffs the magic to pick the binary or text reader.
StepScores parse_scores_file(const std::filesystem::path& path);

// Locale-independent number text used by every writer: shortest text that
// parses back to the same value.
std::string format_double(double value);
// Fixed-point with the given number of decimals.
std::string format_fixed(double value, int decimals);
// Integral values come out as plain integers, everything else as
// format_double. Matches the hand-written style of the annotation files.
std::string format_coord(double value);
double parse_double(std::string_view token, const std::string& source, std::size_t line);
long parse_long(std::string_view token, const std::string& source, std::size_t line);

// When SRNKIT_LOCALE_GUARD=1 is set, throws unless the global C locale uses
// "." as the decimal separator. The file writers are locale-independent
// either way; the guard catches embedding code that flips the locale and
// would corrupt other text paths.
void assert_locale_safe();

}  // namespace srnkit
