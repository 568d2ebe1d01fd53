#ifndef LCDQN_CONFIG_FILE_H_
#define LCDQN_CONFIG_FILE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

// Human-editable key/value configuration:
//
//   # comment
//   scenario.kind = overtake
//   run.seeds = 1, 2, 3
//
// Keys are unique; every value keeps its source line so errors can point at
// it. Typed getters throw ConfigError naming file and line.
namespace lcdqn {

class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  static KeyValueFile Parse(const std::string& text,
                            const std::string& source = "<string>");
  static KeyValueFile Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const;
  std::string GetString(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  std::int64_t GetInt(const std::string& key) const;
  bool GetBool(const std::string& key) const;
  std::vector<std::uint64_t> GetUintList(const std::string& key) const;

  // Assign into `out` only when the key is present.
  void Read(const std::string& key, double& out) const;
  void Read(const std::string& key, int& out) const;
  void Read(const std::string& key, std::int64_t& out) const;
  void Read(const std::string& key, std::size_t& out) const;
  void Read(const std::string& key, bool& out) const;

  // Throws ConfigError for the first key never read by a getter.
  void RejectUnused() const;

  const std::string& source() const { return source_; }

 private:
  const Entry& Lookup(const std::string& key) const;
  [[noreturn]] void Fail(const Entry& e, const std::string& key,
                         const std::string& what) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace lcdqn

#endif  // LCDQN_CONFIG_FILE_H_
