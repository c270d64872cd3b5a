#pragma once

// Operator algebra over the N-atom tensor-product space of three-level
// atoms. Basis convention: single-atom levels |g>=0, |e>=1, |r>=2; the
// N-atom index is read as base-3 digits with atom 1 most significant.
// Superoperators act on column-stacked density matrices.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rydeit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kLevels = 3;
inline constexpr int kG = 0;
inline constexpr int kE = 1;
inline constexpr int kR = 2;

inline long dim_for_atoms(int n_atoms)
{
    if (n_atoms < 1)
        throw std::invalid_argument("atom count must be >= 1");
    long d = 1;
    for (int i = 0; i < n_atoms; ++i)
        d *= kLevels;
    return d;
}

/// |a><b| on the single-atom space.
inline Matrix ket_bra(int a, int b)
{
    Matrix m = Matrix::Zero(kLevels, kLevels);
    m(a, b) = 1.0;
    return m;
}

inline Matrix projector(int level) { return ket_bra(level, level); }

/// Embed a 3x3 single-atom operator at `site` (1-based) of an N-atom chain:
/// I (x) ... (x) op (x) ... (x) I.
inline Matrix kron_embed(const Matrix& op, int site, int n_atoms)
{
    if (op.rows() != kLevels || op.cols() != kLevels)
        throw std::invalid_argument("kron_embed: operator must be 3x3");
    if (site < 1 || site > n_atoms)
        throw std::invalid_argument("kron_embed: site out of range");

    Matrix out = Matrix::Identity(1, 1);
    for (int s = 1; s <= n_atoms; ++s) {
        if (s == site)
            out = Eigen::kroneckerProduct(out, op).eval();
        else
            out = Eigen::kroneckerProduct(out, Matrix::Identity(kLevels, kLevels)).eval();
    }
    return out;
}

/// Tensor product with opA at site i, opB at site j, identity elsewhere.
inline Matrix pairwise_embed(const Matrix& opA, const Matrix& opB, int i, int j, int n_atoms)
{
    if (i == j)
        throw std::invalid_argument("pairwise_embed: sites must differ");
    if (i < 1 || i > n_atoms || j < 1 || j > n_atoms)
        throw std::invalid_argument("pairwise_embed: site out of range");
    if (opA.rows() != kLevels || opA.cols() != kLevels ||
        opB.rows() != kLevels || opB.cols() != kLevels)
        throw std::invalid_argument("pairwise_embed: operators must be 3x3");

    Matrix out = Matrix::Identity(1, 1);
    for (int s = 1; s <= n_atoms; ++s) {
        const Matrix* factor = nullptr;
        if (s == i)
            factor = &opA;
        else if (s == j)
            factor = &opB;
        if (factor)
            out = Eigen::kroneckerProduct(out, *factor).eval();
        else
            out = Eigen::kroneckerProduct(out, Matrix::Identity(kLevels, kLevels)).eval();
    }
    return out;
}

/// Lindblad generator L with vec(sigma_dot) = L vec(sigma), column-stacked.
/// Collapse operators are rate-absorbed (c = sqrt(rate) * op).
inline Matrix liouvillian(const Matrix& hamiltonian, const std::vector<Matrix>& collapse_ops)
{
    const long d = hamiltonian.rows();
    if (hamiltonian.cols() != d)
        throw std::invalid_argument("liouvillian: Hamiltonian must be square");
    const Matrix id = Matrix::Identity(d, d);
    const Complex i1(0.0, 1.0);

    // sigma_dot = -i [H, sigma]  ->  -i (I (x) H - H^T (x) I)
    Matrix L = -i1 * (Eigen::kroneckerProduct(id, hamiltonian).eval() -
                      Eigen::kroneckerProduct(hamiltonian.transpose(), id).eval());

    for (const Matrix& c : collapse_ops) {
        if (c.rows() != d || c.cols() != d)
            throw std::invalid_argument("liouvillian: collapse operator dimension mismatch");
        const Matrix cdc = c.adjoint() * c;
        L += Eigen::kroneckerProduct(c.conjugate(), c).eval();
        L -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
        L -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
    }
    return L;
}

/// Overload taking explicit (rate, operator) dephasing pairs in addition to
/// rate-absorbed collapse operators. Each pair contributes rate * D[op].
inline Matrix liouvillian(const Matrix& hamiltonian,
                          const std::vector<Matrix>& collapse_ops,
                          const std::vector<std::pair<double, Matrix>>& dephasing_ops)
{
    std::vector<Matrix> all = collapse_ops;
    for (const auto& [rate, op] : dephasing_ops) {
        if (rate < 0.0)
            throw std::invalid_argument("liouvillian: negative dephasing rate");
        all.push_back(std::sqrt(rate) * op);
    }
    return liouvillian(hamiltonian, all);
}

inline Vector vec(const Matrix& m)
{
    return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, long d)
{
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

}  // namespace rydeit
