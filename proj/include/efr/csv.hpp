#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace efr {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form, locale-independent ('.' separator),
// identical across runs. NaN prints as empty (CSV convention for no value).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

// Write-to-temp-then-rename so readers never observe a partial file.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(const std::filesystem::path& target)
      : target_(target), temp_(target.string() + ".tmp") {
    stream_.open(temp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw io_error("cannot open " + temp_.string() + " for writing");
  }

  ~AtomicFileWriter() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      std::filesystem::remove(temp_, ec);
    }
  }

  std::ofstream& stream() { return stream_; }

  void commit() {
    stream_.flush();
    if (!stream_) throw io_error("write failed for " + temp_.string());
    stream_.close();
    std::filesystem::rename(temp_, target_);
    committed_ = true;
  }

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream stream_;
  bool committed_{false};
};

inline void write_text_file(const std::filesystem::path& target, const std::string& content) {
  AtomicFileWriter w(target);
  w.stream() << content;
  w.commit();
}

}  // namespace efr
