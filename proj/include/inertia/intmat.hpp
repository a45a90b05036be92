#pragma once

#include "inertia/rational.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace inertia {

// Dense integer matrices, row-major. Sizes in this library are tiny
// (windows of a dozen slots), so simple exact algorithms suffice.
using IntRow = std::vector<Int>;
using IntMat = std::vector<IntRow>;

inline IntMat identity_mat(size_t n) {
    IntMat m(n, IntRow(n, 0));
    for (size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline size_t mat_cols(const IntMat& m) { return m.empty() ? 0 : m[0].size(); }

// Row Hermite normal form, canonical for the lattice spanned by the rows:
// pivots positive, strictly increasing pivot columns, entries above each
// pivot reduced into [0, pivot). Zero rows removed. If `transform` is given
// it receives U with U * input = output-extended-by-zero-rows.
inline IntMat hnf_rows(IntMat m, IntMat* transform = nullptr) {
    size_t rows = m.size(), cols = mat_cols(m);
    IntMat u = identity_mat(rows);
    size_t r = 0;  // next pivot row
    for (size_t c = 0; c < cols && r < rows; ++c) {
        // eliminate below row r in column c via Euclid
        for (size_t i = r + 1; i < rows; ++i) {
            while (m[i][c] != 0) {
                if (m[r][c] == 0) {
                    std::swap(m[r], m[i]);
                    std::swap(u[r], u[i]);
                    continue;
                }
                Int q = m[i][c] / m[r][c];
                for (size_t j = 0; j < cols; ++j) m[i][j] -= q * m[r][j];
                for (size_t j = 0; j < rows; ++j) u[i][j] -= q * u[r][j];
                if (m[i][c] != 0) {
                    std::swap(m[r], m[i]);
                    std::swap(u[r], u[i]);
                }
            }
        }
        if (m[r][c] == 0) continue;
        if (m[r][c] < 0) {
            for (size_t j = 0; j < cols; ++j) m[r][j] = -m[r][j];
            for (size_t j = 0; j < rows; ++j) u[r][j] = -u[r][j];
        }
        // reduce entries above the pivot
        for (size_t i = 0; i < r; ++i) {
            Int q = m[i][c] / m[r][c];
            if (m[i][c] - q * m[r][c] < 0) q -= 1;
            if (q != 0) {
                for (size_t j = 0; j < cols; ++j) m[i][j] -= q * m[r][j];
                for (size_t j = 0; j < rows; ++j) u[i][j] -= q * u[r][j];
            }
        }
        ++r;
    }
    if (transform) *transform = u;
    m.resize(r);
    return m;
}

// Basis of the left kernel {x : x*m = 0} as HNF rows.
inline IntMat left_kernel(const IntMat& m) {
    IntMat u;
    IntMat h = hnf_rows(m, &u);
    size_t rank = h.size();
    IntMat ker(u.begin() + rank, u.end());
    return hnf_rows(std::move(ker));
}

// Solve x * basis = target over Z where `basis` is in row HNF.
inline std::optional<IntRow> solve_in_hnf(const IntMat& basis, IntRow target) {
    size_t cols = target.size();
    IntRow coeff(basis.size(), 0);
    size_t row = 0;
    for (size_t c = 0; c < cols; ++c) {
        Int piv = (row < basis.size()) ? basis[row][c] : Int(0);
        if (row < basis.size() && piv != 0) {
            Int q = target[c] / piv;
            if (target[c] % piv != 0) return std::nullopt;
            coeff[row] = q;
            for (size_t j = c; j < cols; ++j) target[j] -= q * basis[row][j];
            ++row;
        } else if (target[c] != 0) {
            return std::nullopt;
        }
    }
    for (size_t c = 0; c < cols; ++c)
        if (target[c] != 0) return std::nullopt;
    return coeff;
}

// locate pivot columns of an HNF basis
inline std::vector<size_t> hnf_pivots(const IntMat& h) {
    std::vector<size_t> piv;
    size_t c = 0;
    for (size_t r = 0; r < h.size(); ++r) {
        while (c < mat_cols(h) && h[r][c] == 0) ++c;
        piv.push_back(c);
    }
    return piv;
}

// |det| of a square integer matrix, exact rational elimination.
inline Int abs_det(const IntMat& mi) {
    size_t n = mi.size();
    if (n == 0) return 1;
    std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) m[i][j] = Rat(mi[i][j]);
    Rat det = 1;
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        while (piv < n && m[piv][c] == 0) ++piv;
        if (piv == n) return 0;
        if (piv != c) std::swap(m[piv], m[c]);
        det *= m[c][c];
        for (size_t i = c + 1; i < n; ++i) {
            if (m[i][c] == 0) continue;
            Rat f = m[i][c] / m[c][c];
            for (size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
        }
    }
    if (det < 0) det = -det;
    if (!is_integer(det)) throw Error("abs_det: internal error");
    return num(det);
}

// Diagonalization over Z (Smith-style, without the divisibility chain):
// finds unimodular V and diag d_i >= 0 with rowlattice(M * V) = rowlattice(diag).
// Also yields V^{-1}; quotient Z^n / rowlattice(M) has generators rows of
// V^{-1} with orders d_i (d_i = 0 meaning infinite, d_i = 1 trivial).
struct Diagonalization {
    std::vector<Int> diag;  // one entry per column of M
    IntMat v;               // n x n unimodular
    IntMat v_inv;           // its inverse
};

inline Diagonalization diagonalize(IntMat m) {
    size_t rows = m.size(), cols = mat_cols(m);
    IntMat v = identity_mat(cols), vinv = identity_mat(cols);
    auto col_op = [&](size_t j, size_t k, const Int& q) {  // col_j -= q * col_k
        for (size_t i = 0; i < rows; ++i) m[i][j] -= q * m[i][k];
        for (size_t i = 0; i < cols; ++i) v[i][j] -= q * v[i][k];
        for (size_t i = 0; i < cols; ++i) vinv[k][i] += q * vinv[j][i];
    };
    auto col_swap = [&](size_t j, size_t k) {
        for (size_t i = 0; i < rows; ++i) std::swap(m[i][j], m[i][k]);
        for (size_t i = 0; i < cols; ++i) std::swap(v[i][j], v[i][k]);
        std::swap(vinv[j], vinv[k]);
    };
    size_t t = 0;
    while (t < rows && t < cols) {
        size_t pi = t, pj = t;
        bool found = false;
        for (size_t i = t; i < rows && !found; ++i)
            for (size_t j = t; j < cols && !found; ++j)
                if (m[i][j] != 0) { pi = i; pj = j; found = true; }
        if (!found) break;
        std::swap(m[t], m[pi]);
        if (pj != t) col_swap(t, pj);
        bool clean = false;
        while (!clean) {
            clean = true;
            for (size_t i = t + 1; i < rows; ++i)
                while (m[i][t] != 0) {
                    Int q = m[i][t] / m[t][t];
                    for (size_t j = 0; j < cols; ++j) m[i][j] -= q * m[t][j];
                    if (m[i][t] != 0) { std::swap(m[t], m[i]); clean = false; }
                }
            for (size_t j = t + 1; j < cols; ++j)
                while (m[t][j] != 0) {
                    Int q = m[t][j] / m[t][t];
                    col_op(j, t, q);
                    if (m[t][j] != 0) { col_swap(t, j); clean = false; }
                }
        }
        ++t;
    }
    Diagonalization out;
    out.diag.assign(cols, 0);
    for (size_t i = 0; i < t; ++i) {
        Int d = m[i][i];
        out.diag[i] = d < 0 ? -d : d;
    }
    out.v = std::move(v);
    out.v_inv = std::move(vinv);
    return out;
}

// Solve x * M = target over Z for arbitrary M; returns one solution.
inline std::optional<IntRow> solve_left(const IntMat& m, const IntRow& target) {
    IntMat u;
    IntMat h = hnf_rows(m, &u);
    auto c = solve_in_hnf(h, target);
    if (!c) return std::nullopt;
    IntRow x(m.size(), 0);
    for (size_t r = 0; r < h.size(); ++r)
        for (size_t j = 0; j < m.size(); ++j) x[j] += (*c)[r] * u[r][j];
    return x;
}

}  // namespace inertia
