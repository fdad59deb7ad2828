#include "metrifract/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "metrifract/util.hpp"

namespace metrifract {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw validation_error("non-finite float in report");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string escape_json(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

Json Json::boolean(bool v) {
  Json j;
  j.kind_ = Kind::bool_kind;
  j.bool_v_ = v;
  return j;
}

Json Json::integer(long long v) {
  Json j;
  j.kind_ = Kind::int_kind;
  j.int_v_ = v;
  return j;
}

Json Json::real(double v) {
  if (!std::isfinite(v)) throw validation_error("non-finite float in report");
  Json j;
  j.kind_ = Kind::real_kind;
  j.real_v_ = v;
  return j;
}

Json Json::str(std::string v) {
  Json j;
  j.kind_ = Kind::str_kind;
  j.str_v_ = std::move(v);
  return j;
}

Json Json::array() {
  Json j;
  j.kind_ = Kind::arr_kind;
  return j;
}

Json Json::object() {
  Json j;
  j.kind_ = Kind::obj_kind;
  return j;
}

Json& Json::set(const std::string& key, Json v) {
  if (kind_ != Kind::obj_kind) throw validation_error("Json::set on non-object");
  for (auto& e : entries_)
    if (e.first == key) throw validation_error("duplicate report key: " + key);
  entries_.emplace_back(key, std::move(v));
  return *this;
}

Json& Json::push(Json v) {
  if (kind_ != Kind::arr_kind) throw validation_error("Json::push on non-array");
  items_.push_back(std::move(v));
  return *this;
}

std::vector<std::pair<std::string, Json>> Json::sorted_entries() const {
  auto out = entries_;
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void Json::emit(std::string& out, int indent, bool pretty) const {
  auto pad = [&](int n) {
    if (pretty) {
      out += '\n';
      out.append(static_cast<size_t>(n) * 2, ' ');
    }
  };
  switch (kind_) {
    case Kind::null_kind: out += "null"; break;
    case Kind::bool_kind: out += bool_v_ ? "true" : "false"; break;
    case Kind::int_kind: out += std::to_string(int_v_); break;
    case Kind::real_kind: out += format_double(real_v_); break;
    case Kind::str_kind:
      out += '"';
      out += escape_json(str_v_);
      out += '"';
      break;
    case Kind::arr_kind: {
      out += '[';
      for (size_t i = 0; i < items_.size(); ++i) {
        if (i) out += ',';
        pad(indent + 1);
        items_[i].emit(out, indent + 1, pretty);
      }
      if (!items_.empty()) pad(indent);
      out += ']';
      break;
    }
    case Kind::obj_kind: {
      out += '{';
      auto entries = sorted_entries();
      for (size_t i = 0; i < entries.size(); ++i) {
        if (i) out += ',';
        pad(indent + 1);
        out += '"';
        out += escape_json(entries[i].first);
        out += "\":";
        if (pretty) out += ' ';
        entries[i].second.emit(out, indent + 1, pretty);
      }
      if (!entries.empty()) pad(indent);
      out += '}';
      break;
    }
  }
}

std::string Json::dump() const {
  std::string out;
  emit(out, 0, false);
  return out;
}

std::string Json::dump_pretty() const {
  std::string out;
  emit(out, 0, true);
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw io_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string row;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<std::vector<std::string>> rows;
  for (const std::string& line : split(text, '\n')) {
    std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<std::string> cells;
    for (const std::string& cell : split(t, ',')) cells.push_back(trim(cell));
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace metrifract
