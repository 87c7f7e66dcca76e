#pragma once

#include <functional>

#include <Eigen/Core>

namespace relcrawl {

enum class ExecPolicy { serial, openmp };

/// Thread cap from RELCRAWL_THREADS (unset or invalid: OpenMP default).
int configured_threads();

/// Calls body(i) for i in [0, n). With ExecPolicy::openmp iterations run
/// concurrently; the first exception thrown by any iteration is rethrown
/// after the loop completes.
void parallel_for(int n, const std::function<void(int)>& body, ExecPolicy policy);

/// Forward-difference Jacobian of f at x with steps 1e-6 * max(1, |x_j|);
/// columns are evaluated independently under the given policy.
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& fx,
                            ExecPolicy policy = ExecPolicy::openmp);

}  // namespace relcrawl
