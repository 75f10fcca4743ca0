#pragma once

// CSV matrices: one line per row, comma separated. Entries are decimal
// reals or complex literals written a+bi / a-bi / bi.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "detequiv/error.hpp"
#include "detequiv/numerics.hpp"

namespace detequiv {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses "1.5", "-2e-3", "1+2i", "0.5-1e-3i", "3i", "-i".
inline Complex parse_scalar(std::string_view text) {
  const std::string_view s = detail::trim(text);
  if (s.empty()) throw Error(Errc::InvalidEntry, "empty scalar literal");
  if (s.back() != 'i') {
    double re = 0.0;
    if (!detail::parse_double(s, re))
      throw Error(Errc::InvalidEntry, "bad scalar literal '" + std::string(s) + "'");
    return {re, 0.0};
  }
  const std::string_view body = s.substr(0, s.size() - 1);
  // split at the last sign that is not an exponent sign and not leading
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  const std::string_view re_part = split == std::string_view::npos ? std::string_view{} : body.substr(0, split);
  std::string_view im_part = split == std::string_view::npos ? body : body.substr(split);
  double re = 0.0;
  double im = 0.0;
  if (!re_part.empty() && !detail::parse_double(re_part, re))
    throw Error(Errc::InvalidEntry, "bad real part in '" + std::string(s) + "'");
  im_part = detail::trim(im_part);
  if (im_part.empty() || im_part == "+") {
    im = 1.0;
  } else if (im_part == "-") {
    im = -1.0;
  } else if (!detail::parse_double(im_part, im)) {
    throw Error(Errc::InvalidEntry, "bad imaginary part in '" + std::string(s) + "'");
  }
  return {re, im};
}

/// Shortest text that reads back to the same double.
inline std::string format_real(double x) {
  if (x == 0.0) x = 0.0;  // no "-0" in outputs
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

/// Real values print as plain decimals, others as a+bi.
inline std::string format_scalar(Complex z) {
  if (z.imag() == 0.0) return format_real(z.real());
  std::string im = format_real(z.imag());
  if (im.front() != '-') im.insert(im.begin(), '+');
  return format_real(z.real()) + im + "i";
}

inline CMatrix parse_matrix_csv(std::string_view text) {
  std::vector<std::vector<Complex>> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const std::string_view line =
        detail::trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    ++line_no;
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    if (line.empty() || line.front() == '#') continue;
    std::vector<Complex> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      try {
        row.push_back(parse_scalar(cell));
      } catch (const Error& e) {
        throw Error(Errc::InvalidEntry, "line " + std::to_string(line_no) + ": " + e.what());
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(Errc::DimensionMismatch, "ragged CSV row at line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::DimensionMismatch, "CSV matrix has no rows");
  CMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

inline CMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open matrix file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix_csv(buf.str());
}

inline std::string render_matrix_csv(const CMatrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_scalar(m(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace detequiv
