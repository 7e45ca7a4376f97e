#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "opensis/errors.hpp"
#include "opensis/rng.hpp"

namespace opensis {

// Symmetric nonnegative weight matrix with zero diagonal. Undirected;
// weights(i,j) is the contact strength between agents i and j.
struct Adjacency {
    Eigen::MatrixXd weights;

    int n() const { return static_cast<int>(weights.rows()); }
};

struct SpectralInfo {
    double lambda1; // largest eigenvalue of the weight matrix
};

inline void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

// Erdos-Renyi G(n, p). Edges are drawn in row-major upper-triangular order,
// one uniform per pair, so the draw count is fixed for given n.
inline Adjacency sample_er_graph(int n, double p, RandomStream& rng) {
    if (n < 1) throw std::invalid_argument("graph needs at least one node");
    check_probability(p, "edge probability");
    Adjacency a;
    a.weights = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform01() < p) {
                a.weights(i, j) = 1.0;
                a.weights(j, i) = 1.0;
            }
        }
    }
    return a;
}

// E[G(n,p)]: p everywhere off the diagonal.
inline Adjacency expected_adjacency(int n, double p) {
    if (n < 1) throw std::invalid_argument("graph needs at least one node");
    check_probability(p, "edge probability");
    Adjacency a;
    a.weights = Eigen::MatrixXd::Constant(n, n, p);
    a.weights.diagonal().setZero();
    return a;
}

inline SpectralInfo largest_eigenvalue(const Adjacency& a) {
    if (a.n() == 1) return {0.0};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.weights, Eigen::EigenvaluesOnly);
    return {solver.eigenvalues().maxCoeff()};
}

// New node appended at index n, wired to each existing node independently
// with probability p (one uniform per existing node, in index order).
inline Adjacency attach_node(const Adjacency& a, double p, RandomStream& rng) {
    check_probability(p, "edge probability");
    const int n = a.n();
    Adjacency out;
    out.weights = Eigen::MatrixXd::Zero(n + 1, n + 1);
    out.weights.topLeftCorner(n, n) = a.weights;
    for (int i = 0; i < n; ++i) {
        if (rng.uniform01() < p) {
            out.weights(i, n) = 1.0;
            out.weights(n, i) = 1.0;
        }
    }
    return out;
}

inline Adjacency remove_node(const Adjacency& a, int index) {
    const int n = a.n();
    if (index < 0 || index >= n) throw std::out_of_range("node index out of range");
    if (n < 2) throw cannot_empty_error("cannot remove the last agent");
    Adjacency out;
    out.weights.resize(n - 1, n - 1);
    const int tail = n - 1 - index; // rows/cols after the removed one
    out.weights.topLeftCorner(index, index) = a.weights.topLeftCorner(index, index);
    out.weights.block(0, index, index, tail) = a.weights.block(0, index + 1, index, tail);
    out.weights.block(index, 0, tail, index) = a.weights.block(index + 1, 0, tail, index);
    out.weights.block(index, index, tail, tail) = a.weights.block(index + 1, index + 1, tail, tail);
    return out;
}

} // namespace opensis
