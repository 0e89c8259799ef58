#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "acap/geometry.hpp"

namespace acap {

PrinterConfig ceramic_preset();
PrinterConfig fdm_preset();

std::vector<std::string> preset_names();
/// Throws Error for unknown names.
PrinterConfig preset(const std::string &name);

/// `key = value` lines; '#' starts a comment. An optional `preset = <name>` line must come
/// first and supplies the defaults. Unknown keys, malformed numbers and constraint
/// violations are rejected with the offending field named.
PrinterConfig parse_config(std::istream &in, const std::string &source = "config");
PrinterConfig load_config(const std::string &path);

/// A preset name or a path to a config file.
PrinterConfig resolve_config(const std::string &preset_or_path);

void write_config(std::ostream &out, const PrinterConfig &cfg);

} // namespace acap
