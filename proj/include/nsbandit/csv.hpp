#pragma once

// Tables with a `#`-prefixed metadata header. Numbers are written in the
// shortest form that round-trips, so equal inputs give equal bytes.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "nsbandit/error.hpp"

namespace nsb {

inline constexpr const char* kVersion = "1.0.0";

using Metadata = std::vector<std::pair<std::string, std::string>>;

inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // no "-0"
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string cell(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    return format_number(static_cast<double>(v));
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else {
    return std::string(v);
  }
}

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    require(!columns_.empty(), "table: at least one column");
  }

  template <class... T>
  void row(const T&... v) {
    require(sizeof...(T) == columns_.size(), "table: row width does not match the header");
    rows_.push_back({cell(v)...});
  }

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_csv(std::ostream& os, const Metadata& meta, const Table& t) {
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(t.columns());
  for (const auto& r : t.rows()) line(r);
}

inline void write_csv(const std::filesystem::path& path, const Metadata& meta, const Table& t) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  write_csv(os, meta, t);
}

}  // namespace nsb
