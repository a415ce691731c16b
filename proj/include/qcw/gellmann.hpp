#pragma once

#include <stdexcept>
#include <vector>

#include "qcw/model.hpp"

// Orthogonal Hermitian operator bases: G0 = I/sqrt(N) plus the standard
// traceless generators (Pauli for N = 2, Gell-Mann for N = 3), normalized to
// Tr(G_i G_j) = 2 delta_ij.

namespace qcw {

struct OperatorBasis {
    Eigen::MatrixXcd g0;                  // I / sqrt(n)
    std::vector<Eigen::MatrixXcd> gens;   // n^2 - 1 traceless generators
};

inline OperatorBasis gell_mann_basis(int n) {
    if (n != 2 && n != 3) throw std::invalid_argument("gell_mann_basis: only n = 2, 3");
    OperatorBasis b;
    b.g0 = Eigen::MatrixXcd::Identity(n, n) / std::sqrt(double(n));
    auto sym = [n](int j, int k) {  // |j><k| + |k><j|
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        m(j, k) = m(k, j) = 1.0;
        return m;
    };
    auto antisym = [n](int j, int k) {  // -i|j><k| + i|k><j|
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
        m(j, k) = -I1;
        m(k, j) = I1;
        return m;
    };
    if (n == 2) {
        Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(2, 2);
        sz(0, 0) = 1.0;
        sz(1, 1) = -1.0;
        b.gens = {sym(0, 1), antisym(0, 1), sz};
    } else {
        Eigen::MatrixXcd l3 = Eigen::MatrixXcd::Zero(3, 3);
        l3(0, 0) = 1.0;
        l3(1, 1) = -1.0;
        Eigen::MatrixXcd l8 = Eigen::MatrixXcd::Zero(3, 3);
        l8(0, 0) = l8(1, 1) = 1.0 / std::sqrt(3.0);
        l8(2, 2) = -2.0 / std::sqrt(3.0);
        b.gens = {sym(0, 1), antisym(0, 1), l3, sym(0, 2), antisym(0, 2), sym(1, 2), antisym(1, 2), l8};
    }
    return b;
}

} // namespace qcw
