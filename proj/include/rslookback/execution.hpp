#pragma once

namespace rslookback {

/// Selects the serial reference loop or the OpenMP loop of a kernel; both give identical results.
enum class Execution { Serial, Parallel };

}  // namespace rslookback
