#include "gcsim/inductance.hpp"

#include "gcsim/errors.hpp"

#include <Eigen/Dense>

#include <numeric>

namespace gcsim {

namespace {

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

double equivalent_inductance(const HybridNetwork& network, const std::string& winding,
                             const SystemState& operating_point) {
    const std::size_t target = network.find_winding(winding);
    const auto ground = network.magnetic_ground();
    if (!ground) {
        throw NumericalError("equivalent_inductance: magnetic domain has no ground");
    }
    if (operating_point.flux.size() != network.permeances().size()) {
        throw UsageError("equivalent_inductance: operating point does not match the network");
    }

    const std::size_t n_nodes = network.magnetic_nodes().size();
    DisjointSet sets(n_nodes);
    for (const auto& h : network.hysteresis()) {
        sets.join(h.node_a, h.node_b);
    }
    for (std::size_t w = 0; w < network.windings().size(); ++w) {
        if (w != target) {
            sets.join(network.windings()[w].mag_a, network.windings()[w].mag_b);
        }
    }
    const WindingGyrator& port = network.windings()[target];
    if (sets.find(port.mag_a) == sets.find(port.mag_b)) {
        throw NumericalError("equivalent_inductance: winding '" + winding +
                             "' sees a magnetic short");
    }

    // Unknowns: potentials of merged non-ground nodes, then the port flux.
    const std::size_t g = sets.find(*ground);
    std::vector<int> index(n_nodes, -1);
    int n = 0;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const std::size_t r = sets.find(k);
        if (r != g && index[r] < 0) {
            index[r] = n++;
        }
    }
    auto node = [&](std::size_t k) { return index[sets.find(k)]; };
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    for (std::size_t p = 0; p < network.permeances().size(); ++p) {
        const PermeanceElement& el = network.permeances()[p];
        const double perm = differential_permeance(el, operating_point.flux[p]);
        const int i = node(el.node_a);
        const int j = node(el.node_b);
        if (i >= 0) a(i, i) += perm;
        if (j >= 0) a(j, j) += perm;
        if (i >= 0 && j >= 0) {
            a(i, j) -= perm;
            a(j, i) -= perm;
        }
    }
    // Unit mmf source raising mag_a over mag_b; its flux leaves at mag_a.
    const int pa = node(port.mag_a);
    const int pb = node(port.mag_b);
    if (pa >= 0) {
        a(pa, n) -= 1.0;
        a(n, pa) += 1.0;
    }
    if (pb >= 0) {
        a(pb, n) += 1.0;
        a(n, pb) -= 1.0;
    }
    rhs[n] = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
        throw NumericalError("equivalent_inductance: reduced magnetic network is singular");
    }
    const Eigen::VectorXd x = lu.solve(rhs);
    const double turns = static_cast<double>(port.turns);
    return turns * turns * x[n];
}

}  // namespace gcsim
