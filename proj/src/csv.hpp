#pragma once

// Minimal CSV reading/writing for the workload and report files. Fields never
// contain commas or quotes, so no quoting is supported.

#include <charconv>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "fairdispatch/core.hpp"

namespace fd::csv {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

class Reader {
 public:
  Reader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {
    if (!next_line()) throw DataError(name_ + ": empty file, expected a header");
    header_ = std::vector<std::string>(fields_.begin(), fields_.end());
    for (std::size_t i = 0; i < header_.size(); ++i) index_[header_[i]] = i;
  }

  const std::vector<std::string>& header() const { return header_; }
  bool has(const std::string& col) const { return index_.contains(col); }

  std::size_t require(const std::string& col) const {
    auto it = index_.find(col);
    if (it == index_.end()) throw DataError(name_ + ": missing required column '" + col + "'");
    return it->second;
  }

  /// Advances to the next non-empty record.
  bool next() {
    while (next_line()) {
      if (line_.empty()) continue;
      if (fields_.size() != header_.size()) {
        fail("expected " + std::to_string(header_.size()) + " fields, got " + std::to_string(fields_.size()));
      }
      return true;
    }
    return false;
  }

  std::string_view field(std::size_t col) const { return fields_[col]; }

  template <typename T>
  T get(std::size_t col) const {
    const auto sv = fields_[col];
    T value{};
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size()) {
      fail("cannot parse '" + std::string(sv) + "' in column '" + header_[col] + "'");
    }
    return value;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError(name_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

 private:
  bool next_line() {
    if (!std::getline(is_, line_)) return false;
    ++line_no_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    fields_ = split(line_);
    return true;
  }

  std::istream& is_;
  std::string name_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::vector<std::string_view> fields_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace fd::csv
