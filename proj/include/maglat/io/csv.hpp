#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace maglat {

/// Shortest-safe round-trip form: 17 significant digits.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// CSV table built in memory and written in one go.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    Row& operator<<(double v) { return cell(format_double(v)); }
    Row& operator<<(int v) { return cell(std::to_string(v)); }
    Row& operator<<(std::size_t v) { return cell(std::to_string(v)); }
    Row& operator<<(const std::string& v) { return cell(v); }

   private:
    friend class CsvTable;
    explicit Row(std::string& line) : line_(line) {}
    Row& cell(const std::string& s) {
      if (!first_) line_ += ',';
      line_ += s;
      first_ = false;
      return *this;
    }
    std::string& line_;
    bool first_ = true;
  };

  Row row() {
    rows_.emplace_back();
    return Row(rows_.back());
  }

  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
    out += '\n';
    for (const auto& r : rows_) out += r + '\n';
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

}  // namespace maglat
