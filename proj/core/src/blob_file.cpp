#include "atcn/blob_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "json.hpp"

namespace atcn::io {

static_assert(std::endian::native == std::endian::little, "blob files are written in host order");

namespace {

using nlohmann::json;

void putU32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t getU32(std::string_view bytes, std::size_t at) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + at, 4);
  return v;
}

}  // namespace

std::string_view toString(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::BadMagic: return "bad magic";
    case FormatErrorKind::VersionMismatch: return "version mismatch";
    case FormatErrorKind::Truncated: return "truncated";
    case FormatErrorKind::SizeMismatch: return "size mismatch";
    case FormatErrorKind::MalformedHeader: return "malformed header";
    case FormatErrorKind::Io: return "i/o error";
  }
  return "unknown";
}

FormatError::FormatError(FormatErrorKind kind, std::string detail, std::string blob)
    : std::runtime_error(std::string(toString(kind)) + ": " + detail), kind_(kind), blob_(std::move(blob)) {}

const Blob* Container::find(std::string_view name) const {
  for (const Blob& b : blobs) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const Blob& Container::blob(std::string_view name) const {
  if (const Blob* b = find(name)) return *b;
  throw FormatError(FormatErrorKind::MalformedHeader, "missing blob '" + std::string(name) + "'",
                    std::string(name));
}

std::string serialize(const Container& container) {
  json header = json::parse(container.metadata);
  if (!header.is_object()) throw std::invalid_argument("container metadata must be a JSON object");
  if (header.contains("blobs")) throw std::invalid_argument("container metadata must not define 'blobs'");

  json manifest = json::array();
  std::uint64_t offset = 0;
  for (const Blob& b : container.blobs) {
    if (b.data.size() != nn::shapeSize(b.shape)) {
      throw std::invalid_argument("blob '" + b.name + "' data does not match its shape");
    }
    const std::uint64_t length = b.data.size() * sizeof(float);
    manifest.push_back({{"name", b.name}, {"shape", b.shape}, {"offset", offset}, {"length", length}});
    offset += length;
  }
  header["blobs"] = std::move(manifest);
  const std::string headerText = header.dump();

  std::string out;
  out.reserve(12 + headerText.size() + offset);
  out.append(kMagic, 4);
  putU32(out, kFormatVersion);
  putU32(out, static_cast<std::uint32_t>(headerText.size()));
  out += headerText;
  for (const Blob& b : container.blobs) {
    out.append(reinterpret_cast<const char*>(b.data.data()), b.data.size() * sizeof(float));
  }
  return out;
}

Container deserialize(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::BadMagic, "file does not start with \"ATCN\"");
  }
  if (bytes.size() < 12) throw FormatError(FormatErrorKind::Truncated, "file ends inside the preamble", "header");
  const std::uint32_t version = getU32(bytes, 4);
  if (version != kFormatVersion) {
    throw FormatError(FormatErrorKind::VersionMismatch,
                      "format version " + std::to_string(version) + ", expected " + std::to_string(kFormatVersion));
  }
  const std::uint32_t headerLength = getU32(bytes, 8);
  if (12 + static_cast<std::uint64_t>(headerLength) > bytes.size()) {
    throw FormatError(FormatErrorKind::Truncated, "file ends inside the header", "header");
  }

  json header;
  try {
    header = json::parse(bytes.substr(12, headerLength));
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::MalformedHeader, e.what());
  }
  if (!header.is_object() || !header.contains("blobs") || !header["blobs"].is_array()) {
    throw FormatError(FormatErrorKind::MalformedHeader, "header has no blob manifest");
  }

  const std::string_view section = bytes.substr(12 + headerLength);
  Container c;
  std::uint64_t declared = 0;
  try {
    for (const json& entry : header["blobs"]) {
      Blob b;
      b.name = entry.at("name").get<std::string>();
      b.shape = entry.at("shape").get<nn::Shape>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      const auto length = entry.at("length").get<std::uint64_t>();
      if (length != nn::shapeSize(b.shape) * sizeof(float)) {
        throw FormatError(FormatErrorKind::SizeMismatch,
                          "blob '" + b.name + "' declares " + std::to_string(length) + " bytes for shape " +
                              nn::shapeToString(b.shape),
                          b.name);
      }
      if (offset + length > section.size()) {
        throw FormatError(FormatErrorKind::Truncated,
                          "blob '" + b.name + "' needs bytes [" + std::to_string(offset) + ", " +
                              std::to_string(offset + length) + ") but only " + std::to_string(section.size()) +
                              " are present",
                          b.name);
      }
      b.data.resize(length / sizeof(float));
      std::memcpy(b.data.data(), section.data() + offset, length);
      declared += length;
      c.blobs.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::MalformedHeader, std::string("bad blob manifest entry: ") + e.what());
  }
  if (declared != section.size()) {
    throw FormatError(FormatErrorKind::SizeMismatch, "manifest declares " + std::to_string(declared) +
                                                         " blob bytes, file holds " + std::to_string(section.size()));
  }
  header.erase("blobs");
  c.metadata = header.dump();
  return c;
}

std::string readBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void writeBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatErrorKind::Io, "write failed for " + path.string());
}

void writeFile(const std::filesystem::path& path, const Container& container) {
  writeBytes(path, serialize(container));
}

Container readFile(const std::filesystem::path& path) { return deserialize(readBytes(path)); }

}  // namespace atcn::io
