#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "odis/errors.hpp"

namespace odis {

using Eigen::MatrixXd;
using Eigen::MatrixXi;

/// One doubly stochastic consensus weight matrix. Row and column sums are
/// exactly 1.0 in binary64 (see metropolis_weights); every positive entry is
/// at least min_positive_weight and the diagonal is strictly positive.
struct WeightMatrix {
    MatrixXd w;
    double min_positive_weight = 0.0;
};

/// A time-varying graph given as a finite list of weight matrices, extended
/// cyclically over the horizon: A(t) = matrices[(t-1) mod size].
struct GraphSequence {
    std::vector<WeightMatrix> matrices;
    int connectivity_window = 1;  // B
    int node_count = 0;           // N

    const WeightMatrix& at(int t) const {
        return matrices[static_cast<std::size_t>((t - 1) % static_cast<int>(matrices.size()))];
    }
};

/// Geometric mixing constants of the transition-matrix bound
///   |[Phi(t,s)]_ij - 1/N| <= C_hat * tau^(t-s).
struct MixingConstants {
    double c_hat = 0.0;    // > 1
    double tau = 0.0;      // in (0,1)
    double min_weight = 0.0;
    int window = 0;        // B
    int node_count = 0;    // N
};

struct WindowReport {
    int start_t = 0;
    bool strongly_connected = false;
};

struct GraphValidation {
    bool ok = false;
    double max_row_residual = 0.0;
    double max_col_residual = 0.0;
    bool stochasticity_ok = false;
    bool diagonal_ok = false;
    std::vector<WindowReport> windows;  // one per sliding window over the cycle
    std::string message;
};

/// Metropolis weights on an undirected graph:
///   a_ij = 1 / (1 + max(deg_i, deg_j)) for each edge, a_ii = 1 - sum_j a_ij.
/// Off-diagonal weights are snapped to the 2^-40 dyadic grid so that row and
/// column sums are exactly 1.0; the snap moves each weight by less than 1e-12.
/// `adjacency` must be symmetric 0/1 with an all-ones diagonal.
WeightMatrix metropolis_weights(const MatrixXi& adjacency);

/// Checks double stochasticity of every matrix and strong connectivity of the
/// union graph over every window of B consecutive steps (sliding over one
/// cyclic period). Failures are reported, not thrown.
GraphValidation validate_sequence(const GraphSequence& seq);

/// Phi(t,s) = A(t-1) ... A(s) for t > s, identity for t = s. Throws on t < s.
MatrixXd transition_matrix(const GraphSequence& seq, int t, int s);

/// Mixing constants from the minimum positive weight across the sequence:
///   C_hat = 2 (1 + a^-(N-1)B) / (1 + a^(N-1)B),
///   tau   = (1 - a^(N-1)B)^(1/((N-1)B)).
/// Requires a validated sequence.
MixingConstants mixing_bound(const GraphSequence& seq);

/// Named presets: "complete", "ring", "star", "switching3". The last is the
/// default 5-node round-robin {ring, star, two disjoint edges}; it fails
/// validation at B=1 (the two-edge graph alone is disconnected) and passes
/// at B=3.
GraphSequence make_preset(const std::string& name, int nodes, int window);

/// Sequence from explicit adjacency matrices (symmetric 0/1, ones diagonal).
GraphSequence make_sequence(const std::vector<MatrixXi>& adjacencies, int window);

}  // namespace odis
