#pragma once

#include <cstddef>
#include <functional>

namespace jumpctrl {

// 0 or negative -> hardware concurrency
int resolve_workers(int workers);

// Runs fn(task_index, worker_index) for every task on a small thread
// pool. Tasks must write only to task-indexed slots (or worker-indexed
// scratch); the caller reduces afterwards in task order so results do not
// depend on the worker count or schedule. The first exception thrown by
// a task is rethrown after all workers join.
void parallel_for(std::size_t num_tasks, int workers,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace jumpctrl
