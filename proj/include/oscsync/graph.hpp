#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oscsync/matrix.hpp"

namespace oscsync {

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TopologyEdge {
    int from = 0;  // observing follower
    int to = 0;    // observed vertex (0 = leader)
    double weight = 1.0;
};

/// Directed interaction topology over the leader (vertex 0) and n
/// followers (vertices 1..n). weights(i, j) > 0 means follower i observes
/// vertex j with that weight. The leader observes nobody, so row 0 is zero.
struct DirectedTopology {
    int n = 0;
    Mat weights;  // (n+1) x (n+1)

    DirectedTopology() = default;
    DirectedTopology(int followers, Mat w) : n(followers), weights(std::move(w)) { validate(); }

    static DirectedTopology from_edges(int followers, const std::vector<TopologyEdge>& edges) {
        if (followers < 1) throw TopologyError("topology: follower count must be >= 1");
        Mat w(followers + 1, followers + 1);
        for (const auto& e : edges) {
            if (e.from < 1 || e.from > followers)
                throw TopologyError("topology: edge source " + std::to_string(e.from) +
                                    " is not a follower index in 1.." + std::to_string(followers));
            if (e.to < 0 || e.to > followers)
                throw TopologyError("topology: edge target " + std::to_string(e.to) +
                                    " out of range 0.." + std::to_string(followers));
            if (e.from == e.to) throw TopologyError("topology: self-loop on vertex " + std::to_string(e.from));
            if (e.weight <= 0.0) throw TopologyError("topology: edge weight must be positive");
            w(e.from, e.to) = e.weight;
        }
        return DirectedTopology(followers, std::move(w));
    }

    /// A directed chain 1 -> 0, 2 -> 1, ..., n -> n-1 with unit weights.
    static DirectedTopology chain(int followers) {
        std::vector<TopologyEdge> edges;
        for (int i = 1; i <= followers; ++i) edges.push_back({i, i - 1, 1.0});
        return from_edges(followers, edges);
    }

    void validate() const {
        const std::size_t dim = static_cast<std::size_t>(n) + 1;
        if (n < 1) throw TopologyError("topology: follower count must be >= 1");
        if (weights.rows() != dim || weights.cols() != dim)
            throw TopologyError("topology: weight matrix must be " + std::to_string(dim) + "x" +
                                std::to_string(dim));
        for (std::size_t j = 0; j < dim; ++j)
            if (weights(0, j) != 0.0)
                throw TopologyError("topology: leader row must be zero (the leader has no neighbors)");
        for (std::size_t i = 0; i < dim; ++i) {
            if (weights(i, i) != 0.0)
                throw TopologyError("topology: nonzero diagonal entry at vertex " + std::to_string(i));
            for (std::size_t j = 0; j < dim; ++j)
                if (weights(i, j) < 0.0)
                    throw TopologyError("topology: negative weight at (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")");
        }
    }

    /// Neighbors of follower i as (vertex, weight) pairs.
    std::vector<std::pair<int, double>> neighbors(int i) const {
        std::vector<std::pair<int, double>> out;
        for (int j = 0; j <= n; ++j) {
            const double w = weights(i, j);
            if (w > 0.0) out.emplace_back(j, w);
        }
        return out;
    }
};

/// Weighted graph Laplacian: row sums zero, off-diagonal entries -w_ij.
struct LaplacianMatrix {
    Mat entries;
};

inline LaplacianMatrix build_laplacian(const DirectedTopology& topology) {
    topology.validate();
    const std::size_t dim = static_cast<std::size_t>(topology.n) + 1;
    Mat l(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double w = topology.weights(i, j);
            degree += w;
            if (i != j && w != 0.0) l(i, j) = -w;
        }
        l(i, i) = degree;
    }
    return {std::move(l)};
}

/// True iff every follower has a directed path to the leader (vertex 0),
/// i.e. the graph contains a spanning tree rooted at the leader. Checked
/// as reachability from 0 on the edge-reversed graph.
inline bool has_spanning_tree_rooted_at_leader(const DirectedTopology& topology) {
    topology.validate();
    const int dim = topology.n + 1;
    std::vector<char> reached(dim, 0);
    std::vector<int> stack{0};
    reached[0] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int i = 1; i < dim; ++i) {
            if (!reached[i] && topology.weights(i, v) > 0.0) {
                reached[i] = 1;
                stack.push_back(i);
            }
        }
    }
    for (int i = 1; i < dim; ++i)
        if (!reached[i]) return false;
    return true;
}

/// Change of coordinates that splits the leader motion from the stacked
/// consecutive-difference errors: row 0 keeps q0, row k maps to the
/// difference q_{k-1} - q_k.
inline std::pair<Mat, Mat> similarity_transform(int n) {
    if (n < 1) throw std::invalid_argument("similarity_transform: n must be >= 1");
    const std::size_t dim = static_cast<std::size_t>(n) + 1;
    Mat t(dim, dim);
    t(0, 0) = 1.0;
    for (std::size_t k = 1; k < dim; ++k) {
        t(k, k - 1) = 1.0;
        t(k, k) = -1.0;
    }
    // closed-form inverse: column 0 all ones, entry (i, j) = -1 for 1 <= j <= i
    Mat tinv(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        tinv(i, 0) = 1.0;
        for (std::size_t j = 1; j <= i; ++j) tinv(i, j) = -1.0;
    }
    return {std::move(t), std::move(tinv)};
}

class DecompositionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimilarityDecomposition {
    Mat transform;      // T
    Mat transform_inv;  // T^{-1}, closed form
    Mat reduced;        // n x n lower-right block of T L T^{-1}
};

/// Block-diagonalize T L T^{-1} = diag[0, L_bar]. The first row and column
/// of the product must vanish (to 1e-12); a violation means the Laplacian's
/// leader row was not zero.
inline SimilarityDecomposition decompose(const LaplacianMatrix& laplacian) {
    const Mat& l = laplacian.entries;
    if (!l.square() || l.rows() < 2) throw std::invalid_argument("decompose: Laplacian must be square, >= 2x2");
    const int n = static_cast<int>(l.rows()) - 1;
    auto [t, tinv] = similarity_transform(n);
    const Mat product = t * l * tinv;
    const double tol = 1e-12;
    const double row0 = product.max_abs_row(0);
    const double col0 = product.max_abs_col(0);
    if (row0 > tol || col0 > tol)
        throw DecompositionError(
            "decompose: T L T^{-1} is not block diagonal (first row/col max " +
            std::to_string(std::max(row0, col0)) + "); Laplacian leader row is nonzero");
    return {std::move(t), std::move(tinv), product.block(1, 1, n, n)};
}

/// State matrix [[0, I], [-alpha I, -X]] of xdd = -X xd - alpha x.
inline Mat oscillator_companion(const Mat& x, double alpha) {
    if (!x.square()) throw std::invalid_argument("oscillator_companion: matrix not square");
    const std::size_t k = x.rows();
    Mat a(2 * k, 2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        a(i, k + i) = 1.0;
        a(k + i, i) = -alpha;
        for (std::size_t j = 0; j < k; ++j) a(k + i, k + j) = -x(i, j);
    }
    return a;
}

/// Poles of the reduced error system sdd_E = -L_bar sd_E - alpha s_E,
/// one copy per follower coordinate (the m-fold replication from the
/// Kronecker structure is not expanded).
inline ComplexVec reduced_system_poles(const SimilarityDecomposition& decomp, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("reduced_system_poles: alpha must be positive");
    return eigenvalues(oscillator_companion(decomp.reduced, alpha));
}

/// Poles of the full stacked system qdd* = -L qd* - alpha q*; equals
/// {+-i sqrt(alpha)} joined with the reduced poles.
inline ComplexVec stacked_system_poles(const LaplacianMatrix& laplacian, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("stacked_system_poles: alpha must be positive");
    return eigenvalues(oscillator_companion(laplacian.entries, alpha));
}

/// Greedy nearest matching of two spectra; true iff both multisets pair up
/// within tol.
inline bool spectra_match(ComplexVec a, ComplexVec b, double tol) {
    if (a.size() != b.size()) return false;
    for (const Complex& va : a) {
        double best = tol;
        std::size_t best_j = b.size();
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = std::abs(va - b[j]);
            if (d <= best) { best = d; best_j = j; }
        }
        if (best_j == b.size()) return false;
        b.erase(b.begin() + best_j);
    }
    return true;
}

}  // namespace oscsync
