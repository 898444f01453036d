#include "atcn/serialize.hpp"

#include "atcn/utf8.hpp"
#include "json.hpp"

namespace atcn {

namespace {

using nlohmann::json;
using io::FormatError;
using io::FormatErrorKind;

constexpr const char* kModelFormat = "atcn-model";

json configObject(const AtcnConfig& c) {
  return json{{"embedding_dim", c.embeddingDim},
              {"channels", c.channels},
              {"dilations", c.dilations},
              {"convs_per_block", c.convsPerBlock},
              {"kernel_size", c.kernelSize},
              {"dropout_rate", c.dropoutRate},
              {"max_sequence_length", c.maxSequenceLength},
              {"upsampler", std::string(toString(c.upsampler))},
              {"batch_norm_momentum", c.batchNormMomentum},
              {"batch_norm_epsilon", c.batchNormEpsilon}};
}

AtcnConfig configFromObject(const json& j) {
  AtcnConfig c;
  c.embeddingDim = j.at("embedding_dim").get<std::size_t>();
  c.channels = j.at("channels").get<std::size_t>();
  c.dilations = j.at("dilations").get<std::vector<std::size_t>>();
  c.convsPerBlock = j.at("convs_per_block").get<std::size_t>();
  c.kernelSize = j.at("kernel_size").get<std::size_t>();
  c.dropoutRate = j.at("dropout_rate").get<double>();
  c.maxSequenceLength = j.at("max_sequence_length").get<std::size_t>();
  c.upsampler = upsamplerFromString(j.at("upsampler").get<std::string>());
  if (j.contains("batch_norm_momentum")) c.batchNormMomentum = j.at("batch_norm_momentum").get<double>();
  if (j.contains("batch_norm_epsilon")) c.batchNormEpsilon = j.at("batch_norm_epsilon").get<double>();
  c.validate();
  return c;
}

std::string layerPrefix(const AtcnConfig& config, std::size_t l) {
  return "block" + std::to_string(l / config.convsPerBlock) + ".conv" + std::to_string(l % config.convsPerBlock);
}

void copyInto(const io::Container& c, const std::string& name, std::span<float> dst, const nn::Shape& expected) {
  const io::Blob& b = c.blob(name);
  if (b.shape != expected) {
    throw FormatError(FormatErrorKind::SizeMismatch,
                      "blob '" + name + "' has shape " + nn::shapeToString(b.shape) + ", model expects " +
                          nn::shapeToString(expected),
                      name);
  }
  std::copy(b.data.begin(), b.data.end(), dst.begin());
}

}  // namespace

std::string configToJson(const AtcnConfig& config) { return configObject(config).dump(); }

AtcnConfig configFromJson(std::string_view text) { return configFromObject(json::parse(text)); }

io::Container modelToContainer(const AtcnModel& model) {
  json meta;
  meta["format"] = kModelFormat;
  meta["language"] = model.language();
  meta["config"] = configObject(model.config());
  json chars = json::array();
  for (char32_t c : model.vocab().chars()) chars.push_back(utf8::encode(c));
  meta["vocab"] = std::move(chars);

  io::Container out;
  out.metadata = meta.dump();
  for (const auto& [name, tensor] : model.namedParameters()) {
    out.blobs.push_back({name, tensor->shape(), tensor->values()});
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& norm = model.layers[l].norm;
    const std::string prefix = layerPrefix(model.config(), l) + ".norm.";
    out.blobs.push_back({prefix + "running_mean", {norm.runningMean.size()}, norm.runningMean});
    out.blobs.push_back({prefix + "running_var", {norm.runningVar.size()}, norm.runningVar});
  }
  return out;
}

AtcnModel modelFromContainer(const io::Container& container) {
  AtcnConfig config;
  std::u32string chars;
  std::string language;
  try {
    const json meta = json::parse(container.metadata);
    if (meta.value("format", std::string()) != kModelFormat) {
      throw FormatError(FormatErrorKind::MalformedHeader, "header is not an atcn model header");
    }
    config = configFromObject(meta.at("config"));
    language = meta.at("language").get<std::string>();
    for (const json& c : meta.at("vocab")) {
      const std::u32string decoded = utf8::decode(c.get<std::string>());
      if (decoded.size() != 1) throw FormatError(FormatErrorKind::MalformedHeader, "vocab entry is not one character");
      chars.push_back(decoded[0]);
    }
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(FormatErrorKind::MalformedHeader, e.what());
  }

  CharVocab vocab;
  try {
    vocab = CharVocab(chars);
  } catch (const std::exception& e) {
    throw FormatError(FormatErrorKind::MalformedHeader, std::string("bad vocab: ") + e.what());
  }
  if (vocab.chars() != chars) throw FormatError(FormatErrorKind::MalformedHeader, "vocab is not in codepoint order");

  AtcnModel model(config, std::move(vocab), std::move(language));
  std::size_t expectedBlobs = 0;
  for (auto& [name, tensor] : model.namedParameters()) {
    copyInto(container, name, tensor->data(), tensor->shape());
    ++expectedBlobs;
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& norm = model.layers[l].norm;
    const std::string prefix = layerPrefix(config, l) + ".norm.";
    copyInto(container, prefix + "running_mean", norm.runningMean, {norm.runningMean.size()});
    copyInto(container, prefix + "running_var", norm.runningVar, {norm.runningVar.size()});
    expectedBlobs += 2;
  }
  if (container.blobs.size() != expectedBlobs) {
    throw FormatError(FormatErrorKind::MalformedHeader, "file holds " + std::to_string(container.blobs.size()) +
                                                            " blobs, model expects " + std::to_string(expectedBlobs));
  }
  return model;
}

std::string modelToBytes(const AtcnModel& model) { return io::serialize(modelToContainer(model)); }

AtcnModel modelFromBytes(std::string_view bytes) { return modelFromContainer(io::deserialize(bytes)); }

void saveModel(const AtcnModel& model, const std::filesystem::path& path) {
  io::writeBytes(path, modelToBytes(model));
}

AtcnModel loadModel(const std::filesystem::path& path) { return modelFromBytes(io::readBytes(path)); }

}  // namespace atcn
