#include "msibim/gmres.hpp"

#include <cmath>
#include <cstring>

namespace msibim {

namespace {

double dot_seq(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm_seq(const std::vector<double>& a) { return std::sqrt(dot_seq(a, a)); }

}  // namespace

GmresResult gmres(const std::function<void(const double*, double*)>& apply,
                  const std::vector<double>& b, double tol, int restart,
                  int max_iters, const std::vector<double>* x0) {
    const std::size_t n = b.size();
    GmresResult out;
    if (x0 && x0->size() == n)
        out.x = *x0;
    else
        out.x.assign(n, 0.0);

    double bnorm = norm_seq(b);
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }

    std::vector<std::vector<double>> V;
    std::vector<double> H;  // (restart+1) x restart, column-major packed
    std::vector<double> cs(restart), sn(restart), s(restart + 1);
    std::vector<double> r(n), w(n);

    int total_iters = 0;
    while (total_iters < max_iters) {
        // r = b - A x
        apply(out.x.data(), r.data());
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        double rnorm = norm_seq(r);
        out.residual = rnorm / bnorm;
        if (out.residual <= tol) {
            out.converged = true;
            return out;
        }

        V.assign(1, r);
        for (double& v : V[0]) v /= rnorm;
        H.assign(static_cast<std::size_t>(restart + 1) * restart, 0.0);
        std::fill(s.begin(), s.end(), 0.0);
        s[0] = rnorm;

        int k = 0;
        for (; k < restart && total_iters < max_iters; ++k, ++total_iters) {
            apply(V[k].data(), w.data());
            // modified Gram-Schmidt
            for (int i = 0; i <= k; ++i) {
                double hik = dot_seq(V[i], w);
                H[static_cast<std::size_t>(k) * (restart + 1) + i] = hik;
                for (std::size_t q = 0; q < n; ++q) w[q] -= hik * V[i][q];
            }
            double hnext = norm_seq(w);
            H[static_cast<std::size_t>(k) * (restart + 1) + k + 1] = hnext;
            if (hnext > 0.0) {
                V.push_back(w);
                for (double& v : V.back()) v /= hnext;
            } else {
                V.push_back(std::vector<double>(n, 0.0));
            }
            // apply the accumulated Givens rotations to the new column
            double* col = &H[static_cast<std::size_t>(k) * (restart + 1)];
            for (int i = 0; i < k; ++i) {
                double t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            double denom = std::hypot(col[k], col[k + 1]);
            cs[k] = denom == 0.0 ? 1.0 : col[k] / denom;
            sn[k] = denom == 0.0 ? 0.0 : col[k + 1] / denom;
            col[k] = denom;
            col[k + 1] = 0.0;
            s[k + 1] = -sn[k] * s[k];
            s[k] = cs[k] * s[k];

            out.residual = std::abs(s[k + 1]) / bnorm;
            if (out.residual <= tol) {
                ++k;
                break;
            }
        }

        // back substitution and update
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double acc = s[i];
            for (int j = i + 1; j < k; ++j)
                acc -= H[static_cast<std::size_t>(j) * (restart + 1) + i] * y[j];
            double hii = H[static_cast<std::size_t>(i) * (restart + 1) + i];
            y[i] = hii != 0.0 ? acc / hii : 0.0;
        }
        for (int j = 0; j < k; ++j)
            for (std::size_t q = 0; q < n; ++q) out.x[q] += y[j] * V[j][q];

        out.iterations = total_iters;
        if (out.residual <= tol) {
            out.converged = true;
            return out;
        }
    }

    // final residual from scratch
    apply(out.x.data(), r.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    out.residual = norm_seq(r) / bnorm;
    out.iterations = total_iters;
    out.converged = out.residual <= tol;
    return out;
}

}  // namespace msibim
