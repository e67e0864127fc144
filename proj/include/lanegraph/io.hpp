#pragma once

#include <string>

namespace lanegraph {

// Whole-file helpers. Failures raise Error(ErrorCode::Io).
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace lanegraph
