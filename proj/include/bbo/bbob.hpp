#pragma once

#include <cstdint>
#include <vector>

#include "bbo/task.hpp"

namespace bbo {

/// Implemented benchmark function ids (the 2D/5D subset this harness runs).
const std::vector<int>& bbob_function_ids();

/// Human-readable name of a benchmark function id ("sphere", "rastrigin", ...).
std::string bbob_function_name(int function_id);

/// Builds one instance of a benchmark function.
///
/// Every instance is shifted so its global optimum sits at an instance-seeded
/// x_opt (uniform in [-4,4]^d) with value f_opt; rotation matrices come from
/// QR of seeded Gaussian draws. Bounds are [-5,5]^d.
///
/// Throws UnsupportedFunction for ids outside bbob_function_ids() and
/// ContractViolation for dim not in {2, 5} or instance < 1.
TaskSpec bbob_task(int function_id, int instance, int dim);

/// Location of an instance's optimum (for tests; evaluate(task, x_opt) == f_opt).
std::vector<double> bbob_task_optimum(const TaskSpec& task);

/// Default benchmark catalogs: every implemented function at instances
/// 1..n, instance-major, truncated to `count` tasks.
std::vector<TaskSpec> make_bbob_tasks(int dim, int count, int max_instances = 3);

} // namespace bbo
