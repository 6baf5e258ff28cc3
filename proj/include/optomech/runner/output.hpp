#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <system_error>

#include <openssl/evp.h>

#include "optomech/error.hpp"

namespace optomech::runner {

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

/// Writes `content` to dir/name through a temporary file and a rename, so
/// readers never observe a partially written file.
inline void write_atomic(const std::filesystem::path& dir, const std::string& name, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target = dir / name;
  const fs::path tmp = dir / ("." + name + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    f.write(content.data(), std::streamsize(content.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move result into place: " + target.string());
  }
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory " + dir.string());
  }
}

/// In-memory result set, flushed only once complete.
class OutputSet {
 public:
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  const std::map<std::string, std::string>& files() const { return files_; }

  void write_all(const std::filesystem::path& dir) const {
    ensure_directory(dir);
    for (const auto& [name, content] : files_) write_atomic(dir, name, content);
  }

 private:
  std::map<std::string, std::string> files_;  // sorted -> deterministic order
};

}  // namespace optomech::runner
