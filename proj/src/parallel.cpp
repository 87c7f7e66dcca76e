#include "relcrawl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

#include <omp.h>

namespace relcrawl {

int configured_threads() {
  const char* env = std::getenv("RELCRAWL_THREADS");
  if (env != nullptr) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

void parallel_for(int n, const std::function<void(int)>& body, ExecPolicy policy) {
  if (policy == ExecPolicy::serial || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  const int threads = std::min(configured_threads(), n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& fx,
                            ExecPolicy policy) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac(fx.size(), n);
  parallel_for(
      static_cast<int>(n),
      [&](int j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        Eigen::VectorXd xp = x;
        xp[j] += h;
        const double step = xp[j] - x[j];
        jac.col(j) = (f(xp) - fx) / step;
      },
      policy);
  return jac;
}

}  // namespace relcrawl
