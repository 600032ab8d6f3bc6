#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "guifusion/database.hpp"

namespace guifusion::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(GUIFUSION_FIXTURE_DIR) / (name + ".json");
}

inline AppModel fixture(const std::string& name) { return load_app_model(fixture_path(name)); }

inline const AppDatabase& fixture_db(const std::string& name) {
  static std::map<std::string, AppDatabase> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, build_database(fixture(name))).first;
  return it->second;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("guifusion-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline EventToken tok(const std::string& text) { return EventToken::parse(text); }

}  // namespace guifusion::testing
