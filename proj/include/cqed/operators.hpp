// operators.hpp: truncated atom (x) cavity operator basis

#pragma once

#include "cqed/linalg.hpp"

namespace cqed {

/// Truncated Hilbert space of a two-level atom and one cavity mode.
///
/// Tensor order is atom (x) cavity: basis index = atom * (N + 1) + n, with
/// atom 0 = ground, atom 1 = excited, and n the photon number 0..N.
struct HilbertSpec {
    static constexpr int atom_dim = 2;
    int fock_cutoff = 9;

    int cavity_dim() const { return fock_cutoff + 1; }
    int dimension() const { return atom_dim * cavity_dim(); }
    Eigen::Index index(int atom, int photons) const { return atom * cavity_dim() + photons; }

    void validate() const;
};

struct OperatorSet {
    HilbertSpec spec;
    MatrixXc a;
    MatrixXc a_dag;
    MatrixXc sigma_minus;
    MatrixXc sigma_plus;
    MatrixXc n_op;  // a^dag a
    MatrixXc pe_op; // sigma+ sigma-
    MatrixXc identity;
};

MatrixXc annihilation(int fock_cutoff);
MatrixXc atom_lowering();

OperatorSet build_operators(const HilbertSpec& spec);

} // namespace cqed
