#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace guifusion {

using Json = nlohmann::ordered_json;

/// Canonical serialization: insertion-ordered keys, 2-space indent, LF
/// newlines, trailing newline. Every file the store writes goes through this.
std::string canonical_dump(const Json& value);

/// First 16 hex digits of the SHA-256 of `bytes`.
std::string content_digest(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never see partial
/// content.
void write_file(const std::filesystem::path& path, std::string_view bytes);

Json read_json_file(const std::filesystem::path& path);

}  // namespace guifusion
