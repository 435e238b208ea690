#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nucleitrace/errors.hpp"

namespace nucleitrace::text {

// Shortest representation that parses back to the same double.
inline void append_number(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

inline void append_number(std::string& out, long long v) {
  char buf[24];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

/// A line of input with its 1-based number, for diagnostics.
struct Line {
  std::string_view text;
  int number = 0;
  std::vector<std::string_view> fields;
};

class LineReader {
 public:
  LineReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  /// Next line; false at end of input. Blank lines are skipped, and so are
  /// lines starting with '#' unless `keep_comments` is set.
  bool next(Line& line, bool keep_comments = false) {
    while (pos_ < text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
      std::string_view raw = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++number_;
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      const std::size_t first = raw.find_first_not_of(" \t");
      if (first == std::string_view::npos) continue;
      if (raw[first] == '#' && !keep_comments) continue;
      line.text = raw;
      line.number = number_;
      line.fields = split(raw);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const Line& line, const std::string& what) const {
    throw DataError(source_ + ":" + std::to_string(line.number) + ": " + what + " in '" + std::string(line.text) + "'");
  }

  template <typename T>
  T number(const Line& line, std::size_t field) const {
    if (field >= line.fields.size()) fail(line, "missing field " + std::to_string(field + 1));
    const std::string_view s = line.fields[field];
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(line, "bad number '" + std::string(s) + "'");
    return v;
  }

 private:
  static std::vector<std::string_view> split(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (true) {
      i = s.find_first_not_of(" \t", i);
      if (i == std::string_view::npos) break;
      const std::size_t j = std::min(s.find_first_of(" \t", i), s.size());
      out.push_back(s.substr(i, j - i));
      i = j;
    }
    return out;
  }

  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  int number_ = 0;
};

}  // namespace nucleitrace::text
