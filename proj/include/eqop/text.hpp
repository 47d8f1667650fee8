#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace eqop {

/// Shortest-safe text for a double: 17 significant digits, so parsing the
/// text back yields the same bits.
std::string format_double(double x);

std::string join_doubles(const std::vector<double>& xs, char sep = ',');

std::vector<std::string> split(std::string_view s, char sep);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);
std::vector<double> parse_doubles(std::string_view s, char sep = ',');
std::vector<long long> parse_ints(std::string_view s, char sep = ',');

/// Ordered key=value text block. Repeated keys keep every value in order.
class KeyValueText {
 public:
  void add(std::string key, std::string value);
  void add(std::string key, double value) { add(std::move(key), format_double(value)); }

  bool has(const std::string& key) const;
  /// Value of a key that must appear exactly once.
  const std::string& get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string str() const;
  /// Parses lines of key=value; blank lines and lines starting with '#' are
  /// skipped.
  static KeyValueText parse(std::string_view text);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace eqop
