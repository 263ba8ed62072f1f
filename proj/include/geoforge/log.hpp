// Process-wide log sink. Writes are serialized; the default sink is stderr.

#pragma once

#include <functional>
#include <string_view>

namespace geoforge {

enum class LogLevel { info, warning, error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

/// Replaces the sink; pass nullptr to restore stderr.
void set_log_sink(LogSink sink);
void log_message(LogLevel level, std::string_view message);

inline void log_info(std::string_view m) { log_message(LogLevel::info, m); }
inline void log_warning(std::string_view m) { log_message(LogLevel::warning, m); }
inline void log_error(std::string_view m) { log_message(LogLevel::error, m); }

}  // namespace geoforge
