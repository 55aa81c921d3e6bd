#include "output.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace cmjtrace {

OutputDir::OutputDir(std::filesystem::path root, Format format) : root_(std::move(root)), format_(format) {
  std::filesystem::create_directories(root_);
}

void OutputDir::write(const std::string& relative, const std::function<void(std::ostream&)>& body) {
  const auto path = root_ / relative;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
  const std::lock_guard<std::mutex> lock(mutex_);
  files_.push_back(relative);
}

void OutputDir::write_json(const std::string& relative, const Json& doc) {
  write(relative, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

void OutputDir::write_table(const std::string& stem, const cmj::io::Table& table) {
  if (format_ == Format::Csv) {
    write(stem + ".csv", [&](std::ostream& out) { cmj::io::write_csv(out, table); });
  } else {
    write(stem + ".json", [&](std::ostream& out) { cmj::io::write_json(out, table); });
  }
}

void OutputDir::write_manifest(const std::string& command, const Json& config) {
  std::vector<std::string> files;
  {
    const std::lock_guard<std::mutex> lock(mutex_);
    files = files_;
  }
  std::sort(files.begin(), files.end());
  Json doc;
  doc["tool"] = "cmjtrace";
  doc["version"] = CMJTRACE_VERSION;
  doc["command"] = command;
  doc["config"] = config;
  doc["files"] = files;
  const auto path = root_ / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

}  // namespace cmjtrace
