#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "multmean/constructions.hpp"
#include "multmean/experiments.hpp"
#include "multmean/halasz.hpp"

namespace multmean::cli {

using nlohmann::ordered_json;

ordered_json to_json(const SignReport& r);
ordered_json to_json(const DensityReport& r);
ordered_json to_json(const ScalingCheck& r);
ordered_json to_json(const Lemma10Report& r);
ordered_json to_json(const WirsingReport& r);
ordered_json to_json(const SweepReport& r);
ordered_json to_json(const ExceptionalDetection& r);
ordered_json to_json(const LambdaReport& r);
ordered_json to_json(const Theorem2Report& r);
ordered_json to_json(const BracketingScan& r);
ordered_json to_json(const LambdaGrowth& r);
ordered_json to_json(const IntervalAssignment& r);

/// Writes to a sibling temp file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace multmean::cli
