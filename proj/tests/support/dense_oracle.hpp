#pragma once

// Reference implementations used only by the tests. Everything here is built
// from textbook definitions and never calls the simulator kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qksvm/statevector.hpp"

namespace qksvm::oracle {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline CMat mat2(std::complex<double> a, std::complex<double> b, std::complex<double> c, std::complex<double> d) {
    CMat m(2, 2);
    m << a, b, c, d;
    return m;
}

inline CMat rx(double t) {
    const std::complex<double> i{0.0, 1.0};
    return mat2(std::cos(t / 2), -i * std::sin(t / 2), -i * std::sin(t / 2), std::cos(t / 2));
}
inline CMat ry(double t) { return mat2(std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2)); }
inline CMat rz(double t) {
    return mat2(std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2));
}

inline CMat one_qubit_matrix(const Gate& g) {
    const double r = 1.0 / std::sqrt(2.0);
    const std::complex<double> i{0.0, 1.0};
    switch (g.kind) {
        case GateKind::H: return mat2(r, r, r, -r);
        case GateKind::X: return mat2(0.0, 1.0, 1.0, 0.0);
        case GateKind::S: return mat2(1.0, 0.0, 0.0, i);
        case GateKind::Sdg: return mat2(1.0, 0.0, 0.0, -i);
        case GateKind::RX: return rx(g.angles[0]);
        case GateKind::RY: return ry(g.angles[0]);
        case GateKind::RZ: return rz(g.angles[0]);
        case GateKind::ROT: return rz(g.angles[2]) * ry(g.angles[1]) * rz(g.angles[0]);
        default: return CMat::Identity(2, 2);
    }
}

inline bool bit_of(std::size_t index, int q, int n) { return (index >> (n - 1 - q)) & 1U; }

// Full 2^n x 2^n operator. Single-qubit gates go through Kronecker products;
// CNOT/CSWAP and extra controls are assembled from their action on basis states.
inline CMat dense_gate(const Gate& g, int n) {
    const std::size_t dim = std::size_t{1} << n;
    CMat full = CMat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    if (g.kind == GateKind::CNOT || g.kind == GateKind::CSWAP) {
        for (std::size_t col = 0; col < dim; ++col) {
            std::size_t row = col;
            if (g.kind == GateKind::CNOT) {
                if (bit_of(col, g.targets[0], n)) row ^= std::size_t{1} << (n - 1 - g.targets[1]);
            } else if (bit_of(col, g.targets[0], n) && bit_of(col, g.targets[1], n) != bit_of(col, g.targets[2], n)) {
                row ^= std::size_t{1} << (n - 1 - g.targets[1]);
                row ^= std::size_t{1} << (n - 1 - g.targets[2]);
            }
            full(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = 1.0;
        }
    } else {
        CMat acc = CMat::Identity(1, 1);
        for (int q = 0; q < n; ++q) {
            const CMat f = (q == g.targets[0]) ? one_qubit_matrix(g) : CMat::Identity(2, 2);
            CMat next(acc.rows() * 2, acc.cols() * 2);
            for (Eigen::Index a = 0; a < acc.rows(); ++a)
                for (Eigen::Index b = 0; b < acc.cols(); ++b) next.block(a * 2, b * 2, 2, 2) = acc(a, b) * f;
            acc = next;
        }
        full = acc;
    }
    if (g.controls.empty()) return full;
    // Controlled version: act with `full` on the subspace where all controls are 1.
    CMat out = CMat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t col = 0; col < dim; ++col) {
        bool on = true;
        for (int c : g.controls) on = on && bit_of(col, c, n);
        if (!on) continue;
        out.col(static_cast<Eigen::Index>(col)) = full.col(static_cast<Eigen::Index>(col));
    }
    return out;
}

inline CMat dense_circuit(const Circuit& c) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << c.n_qubits);
    CMat u = CMat::Identity(dim, dim);
    for (const auto& g : c.gates) u = dense_gate(g, c.n_qubits) * u;
    return u;
}

inline CVec to_vec(const Statevector& s) {
    CVec v(static_cast<Eigen::Index>(s.dimension()));
    for (std::size_t i = 0; i < s.dimension(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
    return v;
}

inline Gate random_gate(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> angle(-2 * std::numbers::pi, 2 * std::numbers::pi);
    std::vector<int> qubits(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) qubits[static_cast<std::size_t>(q)] = q;
    std::shuffle(qubits.begin(), qubits.end(), rng);
    const int pick = static_cast<int>(rng() % (n >= 3 ? 10 : (n >= 2 ? 9 : 8)));
    switch (pick) {
        case 0: return Gate::h(qubits[0]);
        case 1: return Gate::x(qubits[0]);
        case 2: return Gate::s(qubits[0]);
        case 3: return Gate::sdg(qubits[0]);
        case 4: return Gate::rx(qubits[0], angle(rng));
        case 5: return Gate::ry(qubits[0], angle(rng));
        case 6: return Gate::rz(qubits[0], angle(rng));
        case 7: return Gate::rot(qubits[0], angle(rng), angle(rng), angle(rng));
        case 8: return Gate::cnot(qubits[0], qubits[1]);
        default: return Gate::cswap(qubits[0], qubits[1], qubits[2]);
    }
}

inline Circuit random_circuit(std::mt19937_64& rng, int n, int n_gates) {
    Circuit c{n, {}};
    for (int k = 0; k < n_gates; ++k) c.gates.push_back(random_gate(rng, n));
    return c;
}

inline Statevector random_state(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    std::vector<Complex> amps(std::size_t{1} << n);
    double norm = 0.0;
    for (auto& a : amps) {
        a = {g(rng), g(rng)};
        norm += std::norm(a);
    }
    for (auto& a : amps) a /= std::sqrt(norm);
    return Statevector::from_amplitudes(std::move(amps));
}

// Closed form of the S-map fidelity kernel.
inline double s_map_kernel(const std::vector<double>& a, const std::vector<double>& b, double w = std::numbers::pi) {
    double k = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double c = std::cos(w * (a[i] - b[i]) / 2.0);
        k *= c * c;
    }
    return k;
}

}  // namespace qksvm::oracle
