#pragma once

namespace hjb {

inline constexpr const char* kThreadsEnvVar = "HJB_PLANNER_THREADS";

/// Applies HJB_PLANNER_THREADS (a positive integer) as the OpenMP thread
/// cap. Returns the thread count in effect afterwards.
int configure_threads_from_env();

int max_threads() noexcept;

}  // namespace hjb
