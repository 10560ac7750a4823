#include "odis/network.hpp"

#include <cmath>
#include <limits>

namespace odis {

namespace {

// Snap to the 2^-40 dyadic grid. Sums of up to ~2^13 such values are exact in
// binary64, which is what makes the row/column sums of the weight matrices
// exactly 1.0.
double snap_dyadic(double v) {
    return std::round(v * 0x1p40) * 0x1p-40;
}

// Union reachability closure (Floyd-Warshall on booleans).
bool strongly_connected(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& adj) {
    const int n = static_cast<int>(adj.rows());
    auto reach = adj;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (reach(i, k))
                for (int j = 0; j < n; ++j)
                    if (reach(k, j)) reach(i, j) = true;
    return reach.all();
}

}  // namespace

WeightMatrix metropolis_weights(const MatrixXi& adjacency) {
    const int n = static_cast<int>(adjacency.rows());
    if (n == 0 || adjacency.cols() != n)
        throw GraphError("metropolis_weights: adjacency must be square and nonempty");
    if (adjacency != adjacency.transpose())
        throw GraphError("metropolis_weights: adjacency must be symmetric");
    for (int i = 0; i < n; ++i) {
        if (adjacency(i, i) != 1)
            throw GraphError("metropolis_weights: diagonal must be all ones (self-loops)");
        for (int j = 0; j < n; ++j)
            if (adjacency(i, j) != 0 && adjacency(i, j) != 1)
                throw GraphError("metropolis_weights: entries must be 0/1");
    }

    Eigen::VectorXi degree(n);
    for (int i = 0; i < n; ++i) degree(i) = adjacency.row(i).sum() - 1;

    WeightMatrix out;
    out.w = MatrixXd::Zero(n, n);
    double min_pos = 1.0;
    for (int i = 0; i < n; ++i) {
        double off_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i || adjacency(i, j) == 0) continue;
            const double w = snap_dyadic(1.0 / (1.0 + std::max(degree(i), degree(j))));
            out.w(i, j) = w;
            off_sum += w;  // exact: dyadic summands
        }
        out.w(i, i) = 1.0 - off_sum;  // exact: both operands dyadic
        if (out.w(i, i) <= 0.0)
            throw GraphError("metropolis_weights: nonpositive diagonal at node " +
                             std::to_string(i));
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (out.w(i, j) > 0.0) min_pos = std::min(min_pos, out.w(i, j));
    out.min_positive_weight = min_pos;
    return out;
}

GraphValidation validate_sequence(const GraphSequence& seq) {
    GraphValidation report;
    if (seq.matrices.empty()) {
        report.message = "empty sequence";
        return report;
    }
    const int n = seq.node_count;
    const int len = static_cast<int>(seq.matrices.size());

    report.stochasticity_ok = true;
    report.diagonal_ok = true;
    for (const auto& m : seq.matrices) {
        if (m.w.rows() != n || m.w.cols() != n) {
            report.message = "matrix size does not match node count";
            return report;
        }
        for (int i = 0; i < n; ++i) {
            report.max_row_residual =
                std::max(report.max_row_residual, std::abs(m.w.row(i).sum() - 1.0));
            report.max_col_residual =
                std::max(report.max_col_residual, std::abs(m.w.col(i).sum() - 1.0));
            if (!(m.w(i, i) > 0.0)) report.diagonal_ok = false;
        }
        if ((m.w.array() < 0.0).any() || (m.w.array() > 1.0).any())
            report.stochasticity_ok = false;
    }
    if (report.max_row_residual > 1e-12 || report.max_col_residual > 1e-12)
        report.stochasticity_ok = false;

    // Strong connectivity of the union over each sliding window of B steps
    // (the sequence repeats cyclically, so windows wrap around).
    const int B = seq.connectivity_window;
    bool all_connected = true;
    for (int start = 0; start < len; ++start) {
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> uni(n, n);
        uni.setConstant(false);
        for (int k = 0; k < B; ++k) {
            const auto& m = seq.matrices[static_cast<std::size_t>((start + k) % len)];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (m.w(i, j) > 0.0) uni(i, j) = true;
        }
        WindowReport wr;
        wr.start_t = start + 1;
        wr.strongly_connected = strongly_connected(uni);
        all_connected = all_connected && wr.strongly_connected;
        report.windows.push_back(wr);
    }

    report.ok = report.stochasticity_ok && report.diagonal_ok && all_connected;
    if (!report.ok) {
        report.message = !report.stochasticity_ok ? "weight matrices are not doubly stochastic"
                         : !report.diagonal_ok
                             ? "a weight matrix has a nonpositive diagonal entry"
                             : "a window of B consecutive graphs has a disconnected union";
    } else {
        report.message = "ok";
    }
    return report;
}

MatrixXd transition_matrix(const GraphSequence& seq, int t, int s) {
    if (s < 1 || t < s)
        throw std::out_of_range("transition_matrix: need t >= s >= 1");
    MatrixXd phi = MatrixXd::Identity(seq.node_count, seq.node_count);
    for (int k = s; k < t; ++k) phi = seq.at(k).w * phi;
    return phi;
}

MixingConstants mixing_bound(const GraphSequence& seq) {
    const auto report = validate_sequence(seq);
    if (!report.ok) throw GraphError("mixing_bound: invalid sequence: " + report.message);

    double a = 1.0;
    for (const auto& m : seq.matrices) a = std::min(a, m.min_positive_weight);

    MixingConstants c;
    c.min_weight = a;
    c.window = seq.connectivity_window;
    c.node_count = seq.node_count;
    const double p = static_cast<double>((seq.node_count - 1) * seq.connectivity_window);
    const double a_pow = std::pow(a, p);
    c.c_hat = 2.0 * (1.0 + 1.0 / a_pow) / (1.0 + a_pow);
    c.tau = std::pow(1.0 - a_pow, 1.0 / p);
    return c;
}

namespace {

MatrixXi ring_adjacency(int n) {
    MatrixXi adj = MatrixXi::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        adj(i, (i + 1) % n) = 1;
        adj((i + 1) % n, i) = 1;
    }
    return adj;
}

MatrixXi star_adjacency(int n) {
    MatrixXi adj = MatrixXi::Identity(n, n);
    for (int i = 1; i < n; ++i) {
        adj(0, i) = 1;
        adj(i, 0) = 1;
    }
    return adj;
}

MatrixXi complete_adjacency(int n) { return MatrixXi::Ones(n, n); }

// Two disjoint edges (1,2) and (3,4); remaining nodes keep only self-loops.
MatrixXi two_edges_adjacency(int n) {
    MatrixXi adj = MatrixXi::Identity(n, n);
    if (n >= 2) { adj(0, 1) = adj(1, 0) = 1; }
    if (n >= 4) { adj(2, 3) = adj(3, 2) = 1; }
    return adj;
}

}  // namespace

GraphSequence make_sequence(const std::vector<MatrixXi>& adjacencies, int window) {
    if (adjacencies.empty()) throw GraphError("make_sequence: no adjacency matrices");
    if (window < 1) throw GraphError("make_sequence: window B must be >= 1");
    GraphSequence seq;
    seq.node_count = static_cast<int>(adjacencies.front().rows());
    seq.connectivity_window = window;
    for (const auto& adj : adjacencies) {
        if (adj.rows() != seq.node_count)
            throw GraphError("make_sequence: inconsistent node counts");
        seq.matrices.push_back(metropolis_weights(adj));
    }
    return seq;
}

GraphSequence make_preset(const std::string& name, int nodes, int window) {
    if (nodes < 1) throw GraphError("make_preset: need at least one node");
    if (name == "complete") return make_sequence({complete_adjacency(nodes)}, window);
    if (name == "ring") return make_sequence({ring_adjacency(nodes)}, window);
    if (name == "star") return make_sequence({star_adjacency(nodes)}, window);
    if (name == "switching3") {
        return make_sequence(
            {ring_adjacency(nodes), star_adjacency(nodes), two_edges_adjacency(nodes)},
            window);
    }
    throw GraphError("make_preset: unknown preset '" + name + "'");
}

}  // namespace odis
