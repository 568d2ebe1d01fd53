#include "lcdqn/config_file.h"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lcdqn/errors.h"

namespace lcdqn {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::Parse(const std::string& text,
                                 const std::string& source) {
  KeyValueFile file;
  file.source_ = source;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    }
    if (file.entries_.count(key) != 0) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": key '" +
                        key + "' already set on line " +
                        std::to_string(file.entries_[key].line));
    }
    file.entries_[key] = {value, line_no, false};
  }
  return file;
}

KeyValueFile KeyValueFile::Load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << is.rdbuf();
  return Parse(text.str(), path.string());
}

bool KeyValueFile::Has(const std::string& key) const {
  return entries_.count(key) != 0;
}

const KeyValueFile::Entry& KeyValueFile::Lookup(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ConfigError(source_ + ": missing key '" + key + "'");
  }
  it->second.used = true;
  return it->second;
}

void KeyValueFile::Fail(const Entry& e, const std::string& key,
                        const std::string& what) const {
  throw ConfigError(source_ + ":" + std::to_string(e.line) + ": " + key + ": " +
                    what + " (got '" + e.value + "')");
}

std::string KeyValueFile::GetString(const std::string& key) const {
  return Lookup(key).value;
}

double KeyValueFile::GetDouble(const std::string& key) const {
  const Entry& e = Lookup(key);
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    Fail(e, key, "expected a number");
  }
  return v;
}

std::int64_t KeyValueFile::GetInt(const std::string& key) const {
  const Entry& e = Lookup(key);
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    Fail(e, key, "expected an integer");
  }
  return v;
}

bool KeyValueFile::GetBool(const std::string& key) const {
  const Entry& e = Lookup(key);
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  Fail(e, key, "expected true or false");
}

std::vector<std::uint64_t> KeyValueFile::GetUintList(
    const std::string& key) const {
  const Entry& e = Lookup(key);
  std::vector<std::uint64_t> out;
  std::istringstream is(e.value);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = Trim(item);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
    if (item.empty() || item[0] == '-' || *end != '\0' || errno == ERANGE) {
      Fail(e, key, "expected a comma-separated list of non-negative integers");
    }
    out.push_back(v);
  }
  if (out.empty()) Fail(e, key, "expected at least one value");
  return out;
}

void KeyValueFile::Read(const std::string& key, double& out) const {
  if (Has(key)) out = GetDouble(key);
}

void KeyValueFile::Read(const std::string& key, int& out) const {
  if (Has(key)) out = static_cast<int>(GetInt(key));
}

void KeyValueFile::Read(const std::string& key, std::int64_t& out) const {
  if (Has(key)) out = GetInt(key);
}

void KeyValueFile::Read(const std::string& key, std::size_t& out) const {
  if (!Has(key)) return;
  const std::int64_t v = GetInt(key);
  if (v < 0) Fail(entries_.at(key), key, "expected a non-negative integer");
  out = static_cast<std::size_t>(v);
}

void KeyValueFile::Read(const std::string& key, bool& out) const {
  if (Has(key)) out = GetBool(key);
}

void KeyValueFile::RejectUnused() const {
  for (const auto& [key, e] : entries_) {
    if (!e.used) {
      throw ConfigError(source_ + ":" + std::to_string(e.line) +
                        ": unknown key '" + key + "'");
    }
  }
}

}  // namespace lcdqn
