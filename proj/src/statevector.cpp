#include "qksvm/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qksvm/error.hpp"
#include "qksvm/random.hpp"

namespace qksvm {

namespace {

constexpr Complex kI{0.0, 1.0};

std::size_t bit_of(int qubit, int n_qubits) {
    return std::size_t{1} << static_cast<unsigned>(n_qubits - 1 - qubit);
}

std::array<Complex, 4> matmul(const std::array<Complex, 4>& a, const std::array<Complex, 4>& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

std::array<Complex, 4> rz_matrix(double theta) {
    return {std::polar(1.0, -theta / 2), 0.0, 0.0, std::polar(1.0, theta / 2)};
}

std::array<Complex, 4> ry_matrix(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return {c, -s, s, c};
}

std::array<Complex, 4> rx_matrix(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return {c, -kI * s, -kI * s, c};
}

bool is_diagonal(GateKind kind) {
    return kind == GateKind::RZ || kind == GateKind::S || kind == GateKind::Sdg;
}

}  // namespace

const char* gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::S: return "S";
        case GateKind::Sdg: return "SDG";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::ROT: return "ROT";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CSWAP: return "CSWAP";
    }
    return "?";
}

int gate_arity(GateKind kind) {
    switch (kind) {
        case GateKind::CNOT: return 2;
        case GateKind::CSWAP: return 3;
        default: return 1;
    }
}

int gate_angle_count(GateKind kind) {
    switch (kind) {
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ: return 1;
        case GateKind::ROT: return 3;
        default: return 0;
    }
}

std::array<Complex, 4> single_qubit_matrix(const Gate& gate) {
    const double r = 1.0 / std::numbers::sqrt2;
    switch (gate.kind) {
        case GateKind::H: return {r, r, r, -r};
        case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
        case GateKind::S: return {1.0, 0.0, 0.0, kI};
        case GateKind::Sdg: return {1.0, 0.0, 0.0, -kI};
        case GateKind::RX: return rx_matrix(gate.angles[0]);
        case GateKind::RY: return ry_matrix(gate.angles[0]);
        case GateKind::RZ: return rz_matrix(gate.angles[0]);
        case GateKind::ROT:
            return matmul(rz_matrix(gate.angles[2]),
                          matmul(ry_matrix(gate.angles[1]), rz_matrix(gate.angles[0])));
        default: throw ArgumentError(std::string(gate_name(gate.kind)) + " is not a single-qubit gate");
    }
}

Gate adjoint(const Gate& gate) {
    Gate out = gate;
    switch (gate.kind) {
        case GateKind::S: out.kind = GateKind::Sdg; break;
        case GateKind::Sdg: out.kind = GateKind::S; break;
        case GateKind::RX:
        case GateKind::RY:
        case GateKind::RZ: out.angles[0] = -gate.angles[0]; break;
        case GateKind::ROT:
            out.angles = {-gate.angles[2], -gate.angles[1], -gate.angles[0]};
            break;
        default: break;
    }
    return out;
}

Gate controlled(Gate gate, int control) {
    gate.controls.push_back(control);
    return gate;
}

void validate_gate(const Gate& gate, int n_qubits) {
    if (static_cast<int>(gate.targets.size()) != gate_arity(gate.kind)) {
        std::ostringstream msg;
        msg << gate_name(gate.kind) << " expects " << gate_arity(gate.kind) << " target(s), got "
            << gate.targets.size();
        throw ShapeError(msg.str());
    }
    std::vector<int> all = gate.targets;
    all.insert(all.end(), gate.controls.begin(), gate.controls.end());
    for (int q : all) {
        if (q < 0 || q >= n_qubits) {
            std::ostringstream msg;
            msg << gate_name(gate.kind) << " qubit index " << q << " outside [0, " << n_qubits << ")";
            throw IndexError(msg.str());
        }
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        throw IndexError(std::string(gate_name(gate.kind)) + " qubit indices must be distinct");
    for (double a : gate.angles)
        if (!std::isfinite(a)) throw ArgumentError("gate angle must be finite");
}

Circuit& Circuit::append(Gate gate) {
    gates.push_back(std::move(gate));
    return *this;
}

Circuit& Circuit::append(const Circuit& other) {
    if (other.n_qubits != n_qubits) throw ShapeError("cannot concatenate circuits of different width");
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
    return *this;
}

Circuit adjoint(const Circuit& circuit) {
    Circuit out{circuit.n_qubits, {}};
    out.gates.reserve(circuit.gates.size());
    for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) out.gates.push_back(adjoint(*it));
    return out;
}

Statevector::Statevector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        std::ostringstream msg;
        msg << "register of " << n_qubits << " qubits outside supported range [1, " << kMaxQubits << "]";
        throw CapacityError(msg.str());
    }
    amplitudes_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amplitudes_[0] = 1.0;
}

Statevector::Statevector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

Statevector Statevector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || (dim & (dim - 1)) != 0) throw ShapeError("amplitude count must be a power of two >= 2");
    const int n = std::countr_zero(dim);
    if (n > kMaxQubits) throw CapacityError("amplitude array exceeds the qubit bound");
    double norm = 0.0;
    for (const auto& a : amplitudes) norm += std::norm(a);
    if (std::abs(norm - 1.0) > 1e-10) throw NormalizationError("amplitudes are not normalized");
    return Statevector(n, std::move(amplitudes));
}

double Statevector::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s;
}

void Statevector::apply(const Gate& gate) {
    validate_gate(gate, n_qubits_);
    const std::size_t dim = amplitudes_.size();
    std::size_t control_mask = 0;
    for (int c : gate.controls) control_mask |= bit_of(c, n_qubits_);
    Complex* amp = amplitudes_.data();

    if (gate.kind == GateKind::CNOT) {
        const std::size_t cmask = control_mask | bit_of(gate.targets[0], n_qubits_);
        const std::size_t t = bit_of(gate.targets[1], n_qubits_);
        for (std::size_t i = 0; i < dim; ++i)
            if ((i & t) == 0 && (i & cmask) == cmask) std::swap(amp[i], amp[i | t]);
        return;
    }
    if (gate.kind == GateKind::CSWAP) {
        const std::size_t cmask = control_mask | bit_of(gate.targets[0], n_qubits_);
        const std::size_t a = bit_of(gate.targets[1], n_qubits_);
        const std::size_t b = bit_of(gate.targets[2], n_qubits_);
        for (std::size_t i = 0; i < dim; ++i)
            if ((i & cmask) == cmask && (i & a) != 0 && (i & b) == 0) std::swap(amp[i], amp[(i & ~a) | b]);
        return;
    }

    const std::size_t stride = bit_of(gate.targets[0], n_qubits_);
    const auto m = single_qubit_matrix(gate);
    if (is_diagonal(gate.kind)) {
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & control_mask) != control_mask) continue;
            amp[i] *= (i & stride) ? m[3] : m[0];
        }
        return;
    }
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t i0 = base + off;
            if ((i0 & control_mask) != control_mask) continue;
            const std::size_t i1 = i0 + stride;
            const Complex a0 = amp[i0], a1 = amp[i1];
            amp[i0] = m[0] * a0 + m[1] * a1;
            amp[i1] = m[2] * a0 + m[3] * a1;
        }
    }
}

void Statevector::apply(const Circuit& circuit) {
    if (circuit.n_qubits != n_qubits_) {
        std::ostringstream msg;
        msg << "circuit on " << circuit.n_qubits << " qubits applied to a " << n_qubits_ << "-qubit state";
        throw ShapeError(msg.str());
    }
    for (const auto& g : circuit.gates) apply(g);
}

double Statevector::probability_one(int qubit) const {
    if (qubit < 0 || qubit >= n_qubits_) throw IndexError("qubit index out of range");
    const std::size_t b = bit_of(qubit, n_qubits_);
    double p = 0.0;
    for (std::size_t i = 0; i < amplitudes_.size(); ++i)
        if (i & b) p += std::norm(amplitudes_[i]);
    return p;
}

Statevector zero_state(int n_qubits) { return Statevector(n_qubits); }

Statevector apply_gate(Statevector state, const Gate& gate) {
    state.apply(gate);
    return state;
}

Statevector apply_circuit(Statevector state, const Circuit& circuit) {
    state.apply(circuit);
    return state;
}

Complex inner_product(const Statevector& a, const Statevector& b) {
    if (a.n_qubits() != b.n_qubits()) throw ShapeError("inner product of states with different widths");
    Complex s{0.0, 0.0};
    const auto x = a.amplitudes(), y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
    return s;
}

double fidelity(const Statevector& a, const Statevector& b) { return std::norm(inner_product(a, b)); }

double prob_all_zero(const Statevector& state) { return std::norm(state[0]); }

std::vector<std::uint64_t> sample_histogram(const Statevector& state, std::uint64_t shots,
                                            std::uint64_t seed) {
    if (shots == 0) throw ArgumentError("shots must be >= 1");
    const auto amps = state.amplitudes();
    std::vector<double> cumulative(amps.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        acc += std::norm(amps[i]);
        cumulative[i] = acc;
    }
    // Outcomes with zero probability must never be drawn, so the search is
    // over the last index with non-zero mass.
    std::size_t last = amps.size() - 1;
    while (last > 0 && std::norm(amps[last]) == 0.0) --last;

    std::vector<std::uint64_t> counts(amps.size(), 0);
    Rng rng(seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.begin() + static_cast<std::ptrdiff_t>(last), u);
        ++counts[static_cast<std::size_t>(it - cumulative.begin())];
    }
    return counts;
}

std::map<std::string, std::uint64_t> sample_counts(const Statevector& state, std::uint64_t shots,
                                                   std::uint64_t seed) {
    const auto hist = sample_histogram(state, shots, seed);
    std::map<std::string, std::uint64_t> out;
    for (std::size_t i = 0; i < hist.size(); ++i)
        if (hist[i] != 0) out.emplace(basis_label(i, state.n_qubits()), hist[i]);
    return out;
}

std::string basis_label(std::size_t index, int n_qubits) {
    std::string s(static_cast<std::size_t>(n_qubits), '0');
    for (int q = 0; q < n_qubits; ++q)
        if (index & bit_of(q, n_qubits)) s[static_cast<std::size_t>(q)] = '1';
    return s;
}

}  // namespace qksvm
