#pragma once

// Container shared by model files and optimizer checkpoints:
//
//   "ATCN" | version u32 LE | header length u32 LE | header (UTF-8 JSON) | blobs
//
// The header is a JSON object holding caller metadata plus a "blobs" manifest of
// {name, shape, offset, length}; offsets are relative to the start of the blob
// section. Every blob is a row-major float32 little-endian array.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "atcn/nn/tensor.hpp"

namespace atcn::io {

inline constexpr char kMagic[4] = {'A', 'T', 'C', 'N'};
inline constexpr std::uint32_t kFormatVersion = 1;

enum class FormatErrorKind {
  BadMagic,
  VersionMismatch,
  Truncated,
  SizeMismatch,
  MalformedHeader,
  Io,
};

std::string_view toString(FormatErrorKind kind);

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, std::string detail, std::string blob = {});
  FormatErrorKind kind() const noexcept { return kind_; }
  /// Name of the offending blob, when the error concerns one.
  const std::string& blob() const noexcept { return blob_; }

 private:
  FormatErrorKind kind_;
  std::string blob_;
};

struct Blob {
  std::string name;
  nn::Shape shape;
  std::vector<float> data;
};

struct Container {
  /// JSON object text with the caller's metadata; must not contain a "blobs" key.
  std::string metadata = "{}";
  std::vector<Blob> blobs;

  const Blob& blob(std::string_view name) const;
  const Blob* find(std::string_view name) const;
};

std::string serialize(const Container& container);
Container deserialize(std::string_view bytes);

void writeFile(const std::filesystem::path& path, const Container& container);
Container readFile(const std::filesystem::path& path);

std::string readBytes(const std::filesystem::path& path);
void writeBytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace atcn::io
