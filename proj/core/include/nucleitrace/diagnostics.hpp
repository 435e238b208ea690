#pragma once

#include <functional>
#include <string_view>

namespace nucleitrace {

using WarningHandler = std::function<void(std::string_view)>;

// Warnings go to standard error unless a handler is installed. Returns the
// previously installed handler so callers can restore it.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace nucleitrace
