// linalg.hpp: dense complex kernels: Kronecker product, pivoted solve, matrix exponential

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cqed {

using Complex = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXc = Matrix<Complex>;
using VectorXc = Vector<Complex>;

// Largest row/column count any constructed operator may reach.
inline constexpr Eigen::Index kMaxDimension = Eigen::Index{1} << 14;

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (!m.allFinite())
        throw std::domain_error(std::string(what) + ": non-finite entry");
}

// Kronecker product; result index (i*rows(B)+k, j*cols(B)+l) = A(i,j)*B(k,l).
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> tensor(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
    if ((ra != 0 && rb > kMaxDimension / ra) || (ca != 0 && cb > kMaxDimension / ca))
        throw std::length_error("tensor: dimension product exceeds kMaxDimension");

    Matrix<Scalar> out(ra * rb, ca * cb);
    for (Eigen::Index i = 0; i < ra; ++i)
        for (Eigen::Index j = 0; j < ca; ++j)
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    return out;
}

template <typename Derived>
Matrix<typename Derived::Scalar> dagger(const Eigen::MatrixBase<Derived>& m) {
    return m.adjoint();
}

template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> commutator(const Eigen::MatrixBase<DerivedA>& a,
                                             const Eigen::MatrixBase<DerivedB>& b) {
    return a * b - b * a;
}

template <typename Derived>
double inf_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0)
        return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Solves A x = b by LU with partial pivoting.
///
/// Throws SingularMatrixError when a pivot falls below 1e-14 * ||A||_inf, or
/// when the solution misses ||Ax - b|| <= 1e-10 (||A|| ||x|| + ||b||).
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> solve_linear(const Eigen::MatrixBase<DerivedA>& a,
                                               const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (a.rows() != a.cols())
        throw std::invalid_argument("solve_linear: matrix is not square");
    if (b.size() != a.rows())
        throw std::invalid_argument("solve_linear: right-hand side length mismatch");
    require_finite(a, "solve_linear");
    require_finite(b, "solve_linear");

    const double norm_a = inf_norm(a);
    if (norm_a == 0.0)
        throw SingularMatrixError("solve_linear: zero matrix");

    Eigen::PartialPivLU<Matrix<Scalar>> lu(a);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (min_pivot < 1e-14 * norm_a)
        throw SingularMatrixError("solve_linear: pivot " + std::to_string(min_pivot) +
                                  " below 1e-14*||A||");

    Vector<Scalar> x = lu.solve(b);
    const double residual = (a * x - b).template lpNorm<Eigen::Infinity>();
    const double bound = 1e-10 * (norm_a * x.template lpNorm<Eigen::Infinity>() +
                                  b.template lpNorm<Eigen::Infinity>());
    if (!(residual <= bound))
        throw SingularMatrixError("solve_linear: residual bound violated (ill-conditioned)");
    return x;
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
template <typename Derived>
Matrix<typename Derived::Scalar> expm(const Eigen::MatrixBase<Derived>& a_in) {
    using Scalar = typename Derived::Scalar;
    using Mat = Matrix<Scalar>;
    if (a_in.rows() != a_in.cols())
        throw std::invalid_argument("expm: matrix is not square");
    require_finite(a_in, "expm");

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const Eigen::Index n = a_in.rows();
    const double norm1 = n == 0 ? 0.0 : a_in.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13)
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));

    const Mat a = a_in * Scalar(std::ldexp(1.0, -squarings));
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a4 * a2;

    const Mat u_inner = a6 * (Scalar(b[13]) * a6 + Scalar(b[11]) * a4 + Scalar(b[9]) * a2) +
                        Scalar(b[7]) * a6 + Scalar(b[5]) * a4 + Scalar(b[3]) * a2 +
                        Scalar(b[1]) * id;
    const Mat u = a * u_inner;
    const Mat v = a6 * (Scalar(b[12]) * a6 + Scalar(b[10]) * a4 + Scalar(b[8]) * a2) +
                  Scalar(b[6]) * a6 + Scalar(b[4]) * a4 + Scalar(b[2]) * a2 + Scalar(b[0]) * id;

    Mat r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k)
        r = (r * r).eval();
    return r;
}

} // namespace cqed
