#pragma once

#include <functional>

namespace d2d {

// Static block partition over [0, count). fn(i) must touch only slot-i state;
// callers reduce results in index order so output stays deterministic.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

int default_workers();

}  // namespace d2d
