#include "eqop/text.hpp"

#include "eqop/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eqop {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join_doubles(const std::vector<double>& xs, char sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += format_double(xs[i]);
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw FormatError("not a number: '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw FormatError("not an integer: '" + std::string(s) + "'");
  return v;
}

std::vector<double> parse_doubles(std::string_view s, char sep) {
  std::vector<double> out;
  for (const auto& part : split(s, sep)) out.push_back(parse_double(part));
  return out;
}

std::vector<long long> parse_ints(std::string_view s, char sep) {
  std::vector<long long> out;
  for (const auto& part : split(s, sep)) out.push_back(parse_int(part));
  return out;
}

void KeyValueText::add(std::string key, std::string value) {
  entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValueText::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

const std::string& KeyValueText::get(const std::string& key) const {
  const std::string* found = nullptr;
  for (const auto& [k, v] : entries_) {
    if (k != key) continue;
    if (found) throw FormatError("key '" + key + "' appears more than once");
    found = &v;
  }
  if (!found) throw FormatError("missing key '" + key + "'");
  return *found;
}

std::vector<std::string> KeyValueText::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k == key) out.push_back(v);
  return out;
}

std::string KeyValueText::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

KeyValueText KeyValueText::parse(std::string_view text) {
  KeyValueText kv;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw FormatError("expected key=value, got '" + line + "'");
    kv.add(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << text;
  if (!out) throw FormatError("write failed for '" + path + "'");
}

}  // namespace eqop
