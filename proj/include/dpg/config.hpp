#pragma once

#include "dpg/study.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dpg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Benchmark parse_benchmark(std::string_view name);
StudyMode parse_mode(std::string_view name);
std::string to_string(Benchmark benchmark);
std::string to_string(StudyMode mode);

/// Sets one key of the config from its text value. Throws ConfigError on an
/// unknown key or malformed value.
void set_config_value(StudyConfig& config, std::string_view key, std::string_view value);

/// Reads `key = value` lines; `#` starts a comment. Throws ConfigError.
StudyConfig parse_config(std::istream& in, StudyConfig base = {});
StudyConfig load_config(const std::string& path, StudyConfig base = {});

}  // namespace dpg
