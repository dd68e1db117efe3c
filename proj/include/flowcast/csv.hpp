#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "flowcast/common.hpp"
#include "flowcast/io.hpp"

namespace flowcast::csv {

// RFC 4180 field quoting: quote when the field contains a comma, quote, CR or LF.
inline std::string escape_field(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_field(fields[i]);
  }
  return out;
}

// Streaming RFC 4180 parser. Handles quoted fields, embedded newlines, CRLF
// and bare-LF row terminators. Rows are returned as string vectors.
class Parser {
 public:
  explicit Parser(std::string content) : content_(std::move(content)) {}

  // Returns false at end of input. Empty trailing line yields no row.
  bool next_row(std::vector<std::string>& out) {
    out.clear();
    if (pos_ >= content_.size()) return false;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    while (pos_ <= content_.size()) {
      if (pos_ == content_.size()) {
        if (in_quotes) throw ParseError("unterminated quoted CSV field at end of input");
        out.push_back(std::move(field));
        ++pos_;
        return true;
      }
      char c = content_[pos_];
      if (in_quotes) {
        if (c == '"') {
          if (pos_ + 1 < content_.size() && content_[pos_ + 1] == '"') {
            field.push_back('"');
            pos_ += 2;
          } else {
            in_quotes = false;
            ++pos_;
          }
        } else {
          field.push_back(c);
          ++pos_;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty()) throw ParseError("quote inside unquoted CSV field near offset " + std::to_string(pos_));
          in_quotes = true;
          any = true;
          ++pos_;
          break;
        case ',':
          out.push_back(std::move(field));
          field.clear();
          any = true;
          ++pos_;
          break;
        case '\r':
          if (pos_ + 1 < content_.size() && content_[pos_ + 1] == '\n') ++pos_;
          [[fallthrough]];
        case '\n':
          ++pos_;
          if (!any && field.empty()) {
            // Blank line: skip rather than emitting a single empty field.
            return next_row(out);
          }
          out.push_back(std::move(field));
          return true;
        default:
          field.push_back(c);
          any = true;
          ++pos_;
          break;
      }
    }
    return false;
  }

 private:
  std::string content_;
  size_t pos_ = 0;
};

// A fully parsed CSV table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  size_t column(std::string_view name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw SchemaError("missing CSV column: " + std::string(name));
  }

  bool has_column(std::string_view name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
};

inline Table parse_table(std::string content, bool require_rect = true) {
  Parser p(std::move(content));
  Table t;
  if (!p.next_row(t.header)) throw SchemaError("empty CSV input: no header row");
  std::vector<std::string> row;
  size_t line = 1;
  while (p.next_row(row)) {
    ++line;
    if (require_rect && row.size() != t.header.size())
      throw SchemaError("CSV row " + std::to_string(line) + " has " + std::to_string(row.size()) +
                        " fields, expected " + std::to_string(t.header.size()));
    t.rows.push_back(row);
  }
  return t;
}

inline Table load_table(const std::string& path) { return parse_table(util::read_file(path)); }

// Writes a table with RFC 4180 quoting and "\n" row terminators.
inline void save_table(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::string out = join_row(header);
  out.push_back('\n');
  for (const auto& r : rows) {
    out += join_row(r);
    out.push_back('\n');
  }
  util::write_file(path, out);
}

}  // namespace flowcast::csv
