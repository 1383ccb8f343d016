#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "srnkit/anchors.hpp"
#include "srnkit/augment.hpp"
#include "srnkit/losses.hpp"
#include "srnkit/matching.hpp"
#include "srnkit/pipeline.hpp"

namespace srnkit {

// Everything the CLI can tune, merged into one view. Defaults are the
// working configuration; file and flags override in that order.
struct RunConfig {
    PyramidConfig pyramid;
    LossConfig loss;
    AugmentConfig augment;
    InferenceParams inference;
    MatchThresholds step1 = MatchThresholds::step1();
    MatchThresholds step2 = MatchThresholds::step2();
    std::uint64_t seed = 0;

    void validate() const;
};

// Applies one "key = value" assignment. Unknown keys and malformed values
// raise std::invalid_argument naming the key.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

// Text config: one assignment per line, '#' starts a comment, blank lines
// ignored. Later lines override earlier ones. The result is validated.
RunConfig parse_config(std::istream& in, const RunConfig& base = {},
                       const std::string& source = "<config>");
RunConfig load_config_file(const std::filesystem::path& path, const RunConfig& base = {});

// Full key = value dump, parseable back into an identical RunConfig.
std::string print_config(const RunConfig& config);

}  // namespace srnkit
