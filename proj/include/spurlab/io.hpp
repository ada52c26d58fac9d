#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace spurlab::io {

// Whole-file atomic write: content goes to <path>.tmp which is then renamed
// over the target, so concurrent readers never observe a partial file.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);

// Worker cap for fan-out across seeds/checks: SPURLAB_THREADS when set and
// positive, otherwise the hardware concurrency (at least 1).
int worker_count();

// Runs jobs (indexed 0..count-1) across at most worker_count() threads.
// Each job must write only to its own outputs.
void parallel_for_jobs(int count, const std::function<void(int)>& job);

}  // namespace spurlab::io
