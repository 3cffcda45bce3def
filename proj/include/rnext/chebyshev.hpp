#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace rnext {

// Chebyshev series sum_k c_k T_k(x) on [-1, 1].
class Chebyshev {
public:
    Chebyshev() = default;
    explicit Chebyshev(std::vector<double> coeffs);

    // Interpolant through values at the Lobatto points x_j = cos(j pi / N), j = 0..N.
    static Chebyshev from_lobatto_values(const std::vector<double>& values);
    // Adaptive interpolant: doubles the Lobatto grid until the tail is below tol * scale.
    static Chebyshev from_function(const std::function<double(double)>& f, double tol = 1e-15,
                                   std::size_t max_points = 4097);
    static Chebyshev constant(double value);

    double operator()(double x) const;
    const std::vector<double>& coeffs() const { return c_; }
    std::size_t degree() const { return c_.empty() ? 0 : c_.size() - 1; }

    Chebyshev derivative() const;
    // Antiderivative vanishing at x = -1.
    Chebyshev integral() const;
    double definite_integral() const;
    double max_abs_coeff() const;

    // Drops trailing coefficients smaller than tol * max|c_k|.
    Chebyshev chopped(double tol) const;

    Chebyshev operator+(const Chebyshev& other) const;
    Chebyshev operator*(double s) const;

private:
    std::vector<double> c_;
};

// Lobatto points x_j = cos(j pi / N) for j = 0..N (descending from 1 to -1).
std::vector<double> lobatto_points(std::size_t n_intervals);

// Clenshaw-Curtis weights for the Lobatto points above.
std::vector<double> clenshaw_curtis_weights(std::size_t n_intervals);

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

// n-point Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(std::size_t n);

// Orthonormal Legendre polynomials p_k = sqrt((2k+1)/2) P_k and their derivatives at x.
void legendre_orthonormal(std::size_t count, double x, std::vector<double>& p, std::vector<double>& dp);

}  // namespace rnext
