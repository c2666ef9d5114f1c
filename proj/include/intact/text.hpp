#pragma once

// Locale-independent numeric text: shortest round-trip decimal output and
// strict parsing, plus small CSV and key=value helpers.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "intact/error.hpp"
#include "intact/model.hpp"

namespace intact::text {

inline std::string format(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return {buf, end};
}

template <typename Int>
  requires std::is_integral_v<Int>
std::string format(Int v) {
  return std::to_string(v);
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Parses the whole of s as T; `where` prefixes the error message.
template <typename T>
T parse(std::string_view s, const std::string& where) {
  s = trim(s);
  T v{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && s.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc{} || ptr != last)
    throw IoError(where + ": cannot parse '" + std::string(s) + "' as a number");
  return v;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(p.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(p.string() + ": cannot open file for writing");
  out << s;
  if (!out) throw IoError(p.string() + ": write failed");
}

/// Non-empty lines with their 1-based line numbers.
inline std::vector<std::pair<int, std::string_view>> lines(std::string_view s) {
  std::vector<std::pair<int, std::string_view>> out;
  int no = 0;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto pos = s.find('\n', start);
    if (pos == std::string_view::npos) pos = s.size();
    ++no;
    auto line = trim(s.substr(start, pos - start));
    if (!line.empty()) out.emplace_back(no, line);
    start = pos + 1;
  }
  return out;
}

/// `key = value` lines; '#' starts a comment line.
inline std::map<std::string, std::string> read_keyvalue(
    const std::filesystem::path& p) {
  std::map<std::string, std::string> kv;
  const std::string body = read_file(p);
  for (auto [no, line] : lines(body)) {
    if (line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw IoError(p.string() + ":" + std::to_string(no) +
                    ": expected 'key = value'");
    kv[std::string(trim(line.substr(0, eq)))] =
        std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

inline const std::string& require_key(
    const std::map<std::string, std::string>& kv, const std::string& key,
    const std::filesystem::path& p) {
  auto it = kv.find(key);
  if (it == kv.end())
    throw IoError(p.string() + ": missing key '" + key + "'");
  return it->second;
}

inline std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format(m(r, c));
    }
    out += '\n';
  }
  return out;
}

/// Reads a headerless numeric CSV. Throws on ragged rows, bad cells, or a
/// shape different from an expected one (pass -1 to accept any).
inline Matrix read_matrix_csv(const std::filesystem::path& p,
                              Index expect_rows = -1, Index expect_cols = -1,
                              const std::string& label = {}) {
  const std::string body = read_file(p);
  const auto rows = lines(body);
  const std::string who = label.empty() ? p.string() : label + " (" + p.string() + ")";
  if (expect_rows >= 0 && static_cast<Index>(rows.size()) != expect_rows)
    throw ShapeError(who + ": has " + std::to_string(rows.size()) +
                     " rows, expected " + std::to_string(expect_rows));
  Matrix m;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto [no, line] = rows[r];
    const auto cells = split(line, ',');
    const auto ncol = static_cast<Index>(cells.size());
    if (r == 0) {
      if (expect_cols >= 0 && ncol != expect_cols)
        throw ShapeError(who + ":" + std::to_string(no) + ": has " +
                         std::to_string(ncol) + " columns, expected " +
                         std::to_string(expect_cols));
      m.resize(static_cast<Index>(rows.size()), ncol);
    } else if (ncol != m.cols()) {
      throw ShapeError(who + ":" + std::to_string(no) + ": has " +
                       std::to_string(ncol) + " columns, expected " +
                       std::to_string(m.cols()));
    }
    for (Index c = 0; c < ncol; ++c)
      m(static_cast<Index>(r), c) = parse<double>(
          cells[static_cast<std::size_t>(c)],
          p.string() + ":" + std::to_string(no));
  }
  if (rows.empty() && expect_cols >= 0) m.resize(0, expect_cols);
  return m;
}

/// 64-bit FNV-1a of a byte string.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace intact::text
