#include "psaug/feature_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <system_error>

#include "psaug/errors.hpp"

namespace psaug {
namespace fs = std::filesystem;

namespace {

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string() + ": read failed");
  return bytes;
}

void atomic_write(const fs::path& path, const void* data, std::size_t size) {
  // Unique temp name so concurrent writers to distinct targets never collide.
  thread_local std::mt19937_64 salt{std::random_device{}()};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(salt());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open temporary file " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError(path.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError(path.string() + ": rename failed: " + ec.message());
  }
}

}  // namespace

std::vector<unsigned char> encode_features(const FeatureMatrix& m) {
  if (m.frames() > UINT32_MAX || m.bins() > UINT32_MAX) {
    throw StructuralError("feature matrix too large for the SPGM format");
  }
  std::vector<unsigned char> out;
  out.reserve(kSpgmHeaderSize + 4 * m.values().size());
  for (char c : std::string_view("SPGM")) out.push_back(static_cast<unsigned char>(c));
  put_u16(out, kSpgmVersion);
  put_u32(out, static_cast<std::uint32_t>(m.frames()));
  put_u32(out, static_cast<std::uint32_t>(m.bins()));
  for (float v : m.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureMatrix decode_features(std::span<const unsigned char> b, const std::string& source) {
  if (b.size() < 4 || std::memcmp(b.data(), "SPGM", 4) != 0) {
    throw FormatError(source, 0, "bad magic (expected \"SPGM\")");
  }
  if (b.size() < 6) throw FormatError(source, b.size(), "truncated header");
  const std::uint16_t version = static_cast<std::uint16_t>(b[4] | b[5] << 8);
  if (version != kSpgmVersion) {
    throw FormatError(source, 4, "unsupported version " + std::to_string(version));
  }
  if (b.size() < kSpgmHeaderSize) throw FormatError(source, b.size(), "truncated header");
  const std::uint32_t frames = get_u32(b, 6);
  const std::uint32_t bins = get_u32(b, 10);
  if (frames == 0) throw FormatError(source, 6, "frame count is zero");
  if (bins == 0) throw FormatError(source, 10, "bin count is zero");

  const std::uint64_t cells = static_cast<std::uint64_t>(frames) * bins;
  const std::uint64_t expected = kSpgmHeaderSize + 4 * cells;
  if (b.size() < expected) {
    throw FormatError(source, b.size(),
                      "truncated payload (expected " + std::to_string(expected) + " bytes)");
  }
  if (b.size() > expected) throw FormatError(source, expected, "trailing bytes after payload");

  std::vector<float> values(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const std::size_t at = kSpgmHeaderSize + 4 * i;
    values[i] = std::bit_cast<float>(get_u32(b, at));
    if (!std::isfinite(values[i])) throw FormatError(source, at, "non-finite value");
  }
  return FeatureMatrix(frames, bins, std::move(values));
}

FeatureMatrix read_features(const fs::path& path) {
  const auto bytes = slurp(path);
  return decode_features(bytes, path.string());
}

void write_features(const FeatureMatrix& matrix, const fs::path& path) {
  const auto bytes = encode_features(matrix);
  atomic_write(path, bytes.data(), bytes.size());
}

BatchManifest parse_manifest(const std::string& text, const std::string& source) {
  BatchManifest manifest;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string id, path, loss_text, extra;
    if (!(fields >> id) || id.front() == '#') continue;
    if (!(fields >> path >> loss_text)) {
      throw ValidationError(source, line_no, "expected 'sample_id feature_path loss'");
    }
    if (fields >> extra) throw ValidationError(source, line_no, "unexpected extra field '" + extra + "'");

    double loss = 0.0;
    const char* first = loss_text.data();
    const char* last = first + loss_text.size();
    const auto [ptr, ec] = std::from_chars(first, last, loss);
    if (ec != std::errc{} || ptr != last) {
      throw ValidationError(source, line_no, "loss '" + loss_text + "' is not a number");
    }
    if (!std::isfinite(loss) || loss < 0.0) {
      throw ValidationError(source, line_no, "loss '" + loss_text + "' must be finite and non-negative");
    }
    if (!seen.insert(id).second) {
      throw ValidationError(source, line_no, "duplicate sample_id '" + id + "'");
    }
    manifest.push_back({std::move(id), std::move(path), loss});
  }
  return manifest;
}

std::string format_manifest(const BatchManifest& manifest) {
  std::string out;
  char buf[64];
  for (const auto& r : manifest) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r.loss);
    out += r.sample_id;
    out += '\t';
    out += r.feature_path;
    out += '\t';
    out.append(buf, ptr);
    out += '\n';
  }
  return out;
}

BatchManifest read_manifest(const fs::path& path) {
  const auto bytes = slurp(path);
  return parse_manifest(std::string(bytes.begin(), bytes.end()), path.string());
}

void write_manifest(const BatchManifest& manifest, const fs::path& path) {
  // Reject anything the parser would not read back.
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest[i];
    auto bad_field = [](const std::string& s) {
      return s.empty() || s.front() == '#' || s.find_first_of(" \t\r\n") != std::string::npos;
    };
    if (bad_field(r.sample_id) || r.feature_path.empty() ||
        r.feature_path.find_first_of(" \t\r\n") != std::string::npos) {
      throw ValidationError(path.string(), i + 1, "field is empty or contains whitespace");
    }
    if (!std::isfinite(r.loss) || r.loss < 0.0) {
      throw ValidationError(path.string(), i + 1, "loss must be finite and non-negative");
    }
  }
  const std::string text = format_manifest(manifest);
  atomic_write(path, text.data(), text.size());
}

fs::path resolve_feature_path(const fs::path& manifest_path, const std::string& feature_path) {
  fs::path p(feature_path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace psaug
