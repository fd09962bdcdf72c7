#pragma once

#include <functional>
#include <string>

namespace tkerr {

using WarningHandler = std::function<void(const std::string&)>;

/// Installs a process-wide sink for non-fatal warnings (off-resonance effective
/// Hamiltonians, truncation leakage during dynamics). Returns the previous
/// handler. The default handler prints to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace tkerr
