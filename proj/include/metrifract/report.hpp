#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace metrifract {

// Canonical report value: objects dump with sorted keys, floats as %.17g,
// non-finite floats rejected. Byte-stable across runs by construction.
class Json {
 public:
  enum class Kind { null_kind, bool_kind, int_kind, real_kind, str_kind, arr_kind, obj_kind };

  Json() : kind_(Kind::null_kind) {}
  static Json boolean(bool v);
  static Json integer(long long v);
  static Json real(double v);
  static Json str(std::string v);
  static Json array();
  static Json object();

  Json& set(const std::string& key, Json v);  // object only
  Json& push(Json v);                         // array only

  Kind kind() const { return kind_; }
  std::string dump() const;         // compact canonical form
  std::string dump_pretty() const;  // 2-space indent, same ordering

 private:
  void emit(std::string& out, int indent, bool pretty) const;
  std::vector<std::pair<std::string, Json>> sorted_entries() const;

  Kind kind_;
  bool bool_v_ = false;
  long long int_v_ = 0;
  double real_v_ = 0.0;
  std::string str_v_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> entries_;
};

// %.17g with NaN/Inf rejection.
std::string format_double(double v);

std::string escape_json(const std::string& s);

// ==== files ====

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// One row per inner vector; cells are written verbatim.
std::string csv_join(const std::vector<std::string>& cells);

// Whitespace-trimmed cells of a CSV file; skips blank lines.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace metrifract
