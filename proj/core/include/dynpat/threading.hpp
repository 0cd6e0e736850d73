#pragma once

#include <functional>

namespace dynpat {

/// Process-wide default worker count (0 = hardware concurrency).
void set_default_threads(int n);
int default_threads();

/// Runs fn(i) for i in [0, n). With threads <= 1 (after resolving 0 to the
/// process default) the loop runs inline. Work items must be independent;
/// any reduction over results has to happen after the call so that numeric
/// output does not depend on the worker count.
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

} // namespace dynpat
