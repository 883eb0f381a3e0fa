#pragma once

namespace sculptor {

/// Keeps large freed blocks on the heap instead of returning them to the OS.
/// Training and grid sampling allocate many multi-megabyte temporaries; without
/// this most of the run time is spent in mmap/munmap. Safe to call repeatedly.
void tune_allocator();

}  // namespace sculptor
