#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qksvm {

using Complex = std::complex<double>;

// Largest register the dense simulator will allocate (2^26 amplitudes, 1 GiB).
inline constexpr int kMaxQubits = 26;

// Qubit 0 is the most-significant bit of the basis-state index, so |10> on two
// qubits is index 2 and bitstrings print qubit 0 first.
enum class GateKind : std::uint8_t {
    H,
    X,
    S,
    Sdg,
    RX,
    RY,
    RZ,
    ROT,   // ROT(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi)
    CNOT,  // targets = {control, target}
    CSWAP, // targets = {control, a, b}
};

const char* gate_name(GateKind kind);
int gate_arity(GateKind kind);
int gate_angle_count(GateKind kind);

struct Gate {
    GateKind kind = GateKind::H;
    std::vector<int> targets;
    std::array<double, 3> angles{0.0, 0.0, 0.0};
    // Extra control qubits; the gate acts only where all of them are |1>.
    std::vector<int> controls;

    static Gate h(int q) { return {GateKind::H, {q}, {}, {}}; }
    static Gate x(int q) { return {GateKind::X, {q}, {}, {}}; }
    static Gate s(int q) { return {GateKind::S, {q}, {}, {}}; }
    static Gate sdg(int q) { return {GateKind::Sdg, {q}, {}, {}}; }
    static Gate rx(int q, double theta) { return {GateKind::RX, {q}, {theta, 0.0, 0.0}, {}}; }
    static Gate ry(int q, double theta) { return {GateKind::RY, {q}, {theta, 0.0, 0.0}, {}}; }
    static Gate rz(int q, double theta) { return {GateKind::RZ, {q}, {theta, 0.0, 0.0}, {}}; }
    static Gate rot(int q, double phi, double theta, double omega) {
        return {GateKind::ROT, {q}, {phi, theta, omega}, {}};
    }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}, {}, {}}; }
    static Gate cswap(int control, int a, int b) { return {GateKind::CSWAP, {control, a, b}, {}, {}}; }

    bool operator==(const Gate&) const = default;
};

// 2x2 row-major matrix of a single-qubit gate kind; throws for CNOT/CSWAP.
std::array<Complex, 4> single_qubit_matrix(const Gate& gate);

// Hermitian conjugate of one gate (controls are kept).
Gate adjoint(const Gate& gate);

// Returns a copy of `gate` with an additional control qubit.
Gate controlled(Gate gate, int control);

// Checks arity, index range, distinctness. Throws IndexError / ShapeError.
void validate_gate(const Gate& gate, int n_qubits);

struct Circuit {
    int n_qubits = 1;
    std::vector<Gate> gates;

    Circuit& append(Gate gate);
    Circuit& append(const Circuit& other);

    bool operator==(const Circuit&) const = default;
};

// Reversed order with every gate conjugated.
Circuit adjoint(const Circuit& circuit);

class Statevector {
  public:
    // |0...0> on n qubits; CapacityError unless 1 <= n <= kMaxQubits.
    explicit Statevector(int n_qubits);

    // Takes ownership of a normalized amplitude array of power-of-two length.
    static Statevector from_amplitudes(std::vector<Complex> amplitudes);

    int n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

    double norm_squared() const;

    void apply(const Gate& gate);
    void apply(const Circuit& circuit);

    // Probability that `qubit` measures as 1.
    double probability_one(int qubit) const;

  private:
    Statevector(int n_qubits, std::vector<Complex> amplitudes);

    int n_qubits_;
    std::vector<Complex> amplitudes_;
};

Statevector zero_state(int n_qubits);
Statevector apply_gate(Statevector state, const Gate& gate);
Statevector apply_circuit(Statevector state, const Circuit& circuit);

// <a|b> = sum conj(a_i) b_i.
Complex inner_product(const Statevector& a, const Statevector& b);

// |<a|b>|^2.
double fidelity(const Statevector& a, const Statevector& b);

double prob_all_zero(const Statevector& state);

// Per-basis-index counts of `shots` measurements in the computational basis.
std::vector<std::uint64_t> sample_histogram(const Statevector& state, std::uint64_t shots,
                                            std::uint64_t seed);

// Bitstring (qubit 0 first) to count; outcomes never observed are omitted.
std::map<std::string, std::uint64_t> sample_counts(const Statevector& state, std::uint64_t shots,
                                                   std::uint64_t seed);

std::string basis_label(std::size_t index, int n_qubits);

}  // namespace qksvm
