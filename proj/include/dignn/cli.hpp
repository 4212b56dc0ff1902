// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Command-line surface: gen, train, eval, scan, contrib, experiment and
// replay. Every artifact-producing command writes a run manifest.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace dignn {

inline constexpr const char* kToolVersion = "dignn 0.1.0";

// Exit status: 0 on success, 2 on usage errors (bad flags, missing files,
// schema mismatches), 1 on runtime errors. Failures print one JSON line to
// `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace dignn
