#include "cqed/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace cqed {

void HilbertSpec::validate() const {
    if (fock_cutoff < 1)
        throw std::invalid_argument("HilbertSpec: fock cutoff must be >= 1");
    if (dimension() > kMaxDimension)
        throw std::length_error("HilbertSpec: dimension exceeds kMaxDimension");
}

MatrixXc annihilation(int fock_cutoff) {
    MatrixXc a = MatrixXc::Zero(fock_cutoff + 1, fock_cutoff + 1);
    for (int n = 1; n <= fock_cutoff; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

MatrixXc atom_lowering() {
    MatrixXc sm = MatrixXc::Zero(2, 2);
    sm(0, 1) = 1.0; // |g><e|
    return sm;
}

OperatorSet build_operators(const HilbertSpec& spec) {
    spec.validate();
    const MatrixXc id_atom = MatrixXc::Identity(2, 2);
    const MatrixXc id_cav = MatrixXc::Identity(spec.cavity_dim(), spec.cavity_dim());

    OperatorSet ops;
    ops.spec = spec;
    ops.a = tensor(id_atom, annihilation(spec.fock_cutoff));
    ops.a_dag = dagger(ops.a);
    ops.sigma_minus = tensor(atom_lowering(), id_cav);
    ops.sigma_plus = dagger(ops.sigma_minus);
    ops.n_op = ops.a_dag * ops.a;
    ops.pe_op = ops.sigma_plus * ops.sigma_minus;
    ops.identity = MatrixXc::Identity(spec.dimension(), spec.dimension());
    return ops;
}

} // namespace cqed
