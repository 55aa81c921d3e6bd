#ifndef CMJTRACE_OUTPUT_HPP
#define CMJTRACE_OUTPUT_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmj/io.hpp"

namespace cmjtrace {

using Json = nlohmann::ordered_json;

enum class Format { Csv, Json };

/// Output directory of one invocation. Records every file it writes so the
/// manifest can list them. write() may be called from several threads.
class OutputDir {
 public:
  OutputDir(std::filesystem::path root, Format format);

  const std::filesystem::path& root() const { return root_; }
  Format format() const { return format_; }

  void write(const std::string& relative, const std::function<void(std::ostream&)>& body);
  void write_json(const std::string& relative, const Json& doc);
  /// `stem`.csv or `stem`.json depending on the format.
  void write_table(const std::string& stem, const cmj::io::Table& table);

  /// manifest.json: tool, version, command, configuration and file list.
  void write_manifest(const std::string& command, const Json& config);

 private:
  std::filesystem::path root_;
  Format format_;
  std::mutex mutex_;
  std::vector<std::string> files_;
};

}  // namespace cmjtrace

#endif  // CMJTRACE_OUTPUT_HPP
