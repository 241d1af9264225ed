#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "irkmg/harness.hpp"

namespace irkmg
{

/// Keys accepted in config files; each is also a command line flag "--<key>".
const std::vector<std::string> &config_keys();

/// Sets one configuration entry from its textual value. Throws InvalidParameter for unknown
/// keys or malformed values.
void apply_config_value(RunConfig &config, const std::string &key, const std::string &value);

/// Reads "key = value" lines; blank lines and lines starting with '#' are ignored.
std::vector<std::pair<std::string, std::string>> parse_config(std::istream &is);
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string &path);

}  // namespace irkmg
