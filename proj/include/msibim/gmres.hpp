#pragma once

#include <functional>
#include <vector>

namespace msibim {

struct GmresResult {
    std::vector<double> x;
    double residual = 0.0;  // relative to |b|
    int iterations = 0;
    bool converged = false;
};

// Restarted GMRES with modified Gram-Schmidt Arnoldi and Givens rotations.
// Reductions are sequential so repeated runs are bit-identical.
GmresResult gmres(const std::function<void(const double*, double*)>& apply,
                  const std::vector<double>& b, double tol, int restart,
                  int max_iters, const std::vector<double>* x0 = nullptr);

}  // namespace msibim
