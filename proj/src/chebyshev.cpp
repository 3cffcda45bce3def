#include "rnext/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rnext/errors.hpp"

namespace rnext {

Chebyshev::Chebyshev(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

Chebyshev Chebyshev::constant(double value) { return Chebyshev({value}); }

Chebyshev Chebyshev::from_lobatto_values(const std::vector<double>& values) {
    if (values.empty()) throw PreconditionError("Chebyshev interpolation needs at least one value");
    const std::size_t n = values.size() - 1;
    if (n == 0) return Chebyshev({values[0]});
    std::vector<double> table(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) table[i] = std::cos(std::numbers::pi * i / n);
    std::vector<double> c(n + 1, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
        double sum = 0.5 * (values[0] + values[n] * table[(n * k) % (2 * n)]);
        for (std::size_t j = 1; j < n; ++j) sum += values[j] * table[(j * k) % (2 * n)];
        c[k] = 2.0 * sum / n;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    return Chebyshev(std::move(c));
}

Chebyshev Chebyshev::from_function(const std::function<double(double)>& f, double tol,
                                   std::size_t max_points) {
    Chebyshev last;
    for (std::size_t n = 16; n + 1 <= max_points; n *= 2) {
        const auto x = lobatto_points(n);
        std::vector<double> v(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) v[j] = f(x[j]);
        last = from_lobatto_values(v);
        const double scale = std::max(last.max_abs_coeff(), 1e-300);
        double tail = 0.0;
        for (std::size_t k = n - 3; k <= n; ++k) tail = std::max(tail, std::abs(last.c_[k]));
        if (tail <= tol * scale) return last.chopped(tol);
    }
    return last.chopped(tol);
}

double Chebyshev::operator()(double x) const {
    if (c_.empty()) return 0.0;
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = c_.size() - 1; k >= 1; --k) {
        const double b0 = 2.0 * x * b1 - b2 + c_[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + c_[0];
}

Chebyshev Chebyshev::derivative() const {
    const std::size_t n = c_.size();
    if (n <= 1) return Chebyshev({0.0});
    std::vector<double> d(n - 1, 0.0);
    double next = 0.0, next2 = 0.0;  // d_{k+1}, d_{k+2}
    for (std::size_t k = n - 1; k >= 1; --k) {
        const double dk = next2 + 2.0 * k * c_[k];  // d_{k-1}
        d[k - 1] = dk;
        next2 = next;
        next = dk;
    }
    d[0] *= 0.5;
    return Chebyshev(std::move(d));
}

Chebyshev Chebyshev::integral() const {
    const std::size_t n = c_.size();
    std::vector<double> r(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        const double prev = (k - 1 == 0) ? 2.0 * c_[0] : c_[k - 1];
        const double after = (k + 1 < n) ? c_[k + 1] : 0.0;
        r[k] = (prev - after) / (2.0 * k);
    }
    double at_minus_one = 0.0;
    for (std::size_t k = 1; k <= n; ++k) at_minus_one += (k % 2 == 0 ? 1.0 : -1.0) * r[k];
    r[0] = -at_minus_one;
    return Chebyshev(std::move(r));
}

double Chebyshev::definite_integral() const {
    double sum = 0.0;
    for (std::size_t k = 0; k < c_.size(); k += 2) sum += c_[k] * 2.0 / (1.0 - double(k) * double(k));
    return sum;
}

double Chebyshev::max_abs_coeff() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
}

Chebyshev Chebyshev::chopped(double tol) const {
    const double cut = tol * max_abs_coeff();
    std::size_t last = 0;
    for (std::size_t k = 0; k < c_.size(); ++k)
        if (std::abs(c_[k]) > cut) last = k;
    return Chebyshev(std::vector<double>(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(last + 1)));
}

Chebyshev Chebyshev::operator+(const Chebyshev& other) const {
    std::vector<double> r(std::max(c_.size(), other.c_.size()), 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) r[k] += c_[k];
    for (std::size_t k = 0; k < other.c_.size(); ++k) r[k] += other.c_[k];
    return Chebyshev(std::move(r));
}

Chebyshev Chebyshev::operator*(double s) const {
    std::vector<double> r(c_);
    for (double& v : r) v *= s;
    return Chebyshev(std::move(r));
}

std::vector<double> lobatto_points(std::size_t n_intervals) {
    if (n_intervals == 0) return {1.0};
    std::vector<double> x(n_intervals + 1);
    for (std::size_t j = 0; j <= n_intervals; ++j) x[j] = std::cos(std::numbers::pi * j / n_intervals);
    x[0] = 1.0;
    x[n_intervals] = -1.0;
    if (n_intervals % 2 == 0) x[n_intervals / 2] = 0.0;
    return x;
}

std::vector<double> clenshaw_curtis_weights(std::size_t n) {
    if (n == 0) return {2.0};
    std::vector<double> w(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k <= n; k += 2) {
            const double gamma = (k == 0 || k == n) ? 0.5 : 1.0;
            sum += gamma * 2.0 / (1.0 - double(k) * double(k)) * std::cos(std::numbers::pi * double(j * k % (2 * n)) / n);
        }
        const double half = (j == 0 || j == n) ? 0.5 : 1.0;
        w[j] = 2.0 * half * sum / n;
    }
    return w;
}

GaussRule gauss_legendre(std::size_t n) {
    if (n == 0) throw PreconditionError("Gauss rule needs at least one node");
    GaussRule rule{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.x[i] = x;
        rule.x[n - 1 - i] = -x;
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.x[n / 2] = 0.0;
    return rule;
}

void legendre_orthonormal(std::size_t count, double x, std::vector<double>& p, std::vector<double>& dp) {
    p.assign(count, 0.0);
    dp.assign(count, 0.0);
    if (count == 0) return;
    double pm = 1.0, pc = x, dpm = 0.0, dpc = 1.0;
    for (std::size_t k = 0; k < count; ++k) {
        double val, der;
        if (k == 0) {
            val = 1.0;
            der = 0.0;
        } else if (k == 1) {
            val = x;
            der = 1.0;
        } else {
            val = ((2.0 * k - 1.0) * x * pc - (k - 1.0) * pm) / k;
            der = dpm + (2.0 * k - 1.0) * pc;
            pm = pc;
            pc = val;
            dpm = dpc;
            dpc = der;
        }
        const double s = std::sqrt((2.0 * k + 1.0) / 2.0);
        p[k] = s * val;
        dp[k] = s * der;
    }
}

}  // namespace rnext
