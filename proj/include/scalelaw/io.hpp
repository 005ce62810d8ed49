//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <string>

namespace scalelaw {

std::string read_file(const std::filesystem::path &path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path &path, const std::string &content);

}  // namespace scalelaw
