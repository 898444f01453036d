#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "atcn/blob_file.hpp"
#include "atcn/model.hpp"

namespace atcn {

using ModelFormatError = io::FormatError;
using ModelFormatErrorKind = io::FormatErrorKind;

/// Model <-> container. Blobs are the named parameters followed, for every conv
/// layer, by "<layer>.norm.running_mean" and "<layer>.norm.running_var".
io::Container modelToContainer(const AtcnModel& model);
AtcnModel modelFromContainer(const io::Container& container);

std::string modelToBytes(const AtcnModel& model);
AtcnModel modelFromBytes(std::string_view bytes);

void saveModel(const AtcnModel& model, const std::filesystem::path& path);
/// Throws ModelFormatError; kind() tells corrupt magic, version, truncation and size errors apart.
AtcnModel loadModel(const std::filesystem::path& path);

/// Config as a JSON object string (stable key order), used in model headers and reports.
std::string configToJson(const AtcnConfig& config);
AtcnConfig configFromJson(std::string_view json);

}  // namespace atcn
