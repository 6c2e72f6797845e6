#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qksvm/statevector.hpp"

namespace qksvm {

// Layer tokens of an embedding architecture:
//   S  Hadamard on every qubit, then RZ(w * x_i) on qubit i
//   W  ROT(phi, theta, omega) on every qubit (3n parameters)
//   E  W followed by the CNOT ring CNOT(i, (i + 1) mod n)
enum class Layer : char { S = 'S', W = 'W', E = 'E' };

// Layers act on |0...0> in the order written, so "WS" applies W first.
struct ArchitectureSpec {
    std::vector<Layer> tokens;
    int n_qubits = 1;

    std::string text() const;
    std::size_t param_count() const;
    bool has_variational_layers() const { return param_count() > 0; }
    bool is_entangling() const;

    bool operator==(const ArchitectureSpec&) const = default;
};

// Parameters are sliced in token order, qubit-major, (phi, theta, omega)-minor.
using ParamVector = std::vector<double>;

struct ScalingConfig {
    double w = std::numbers::pi;
};

ArchitectureSpec parse_architecture(std::string_view text, int n_qubits);

std::vector<Gate> build_s_layer(std::span<const double> x, int n_qubits, const ScalingConfig& cfg);
std::vector<Gate> build_w_layer(std::span<const double> params, int n_qubits);
std::vector<Gate> build_e_layer(std::span<const double> params, int n_qubits);

// Throws ShapeError when params.size() != arch.param_count() or x has the wrong
// length, ArgumentError on non-finite parameters or a bad scaling factor.
void validate_embedding_inputs(const ArchitectureSpec& arch, std::span<const double> x,
                               std::span<const double> params, const ScalingConfig& cfg);

Circuit compile_embedding(const ArchitectureSpec& arch, std::span<const double> x,
                          std::span<const double> params, const ScalingConfig& cfg = {});

// A fully bound feature map: U(x) for any datum x.
struct Embedding {
    ArchitectureSpec arch;
    ParamVector params;
    ScalingConfig scaling;

    int n_qubits() const { return arch.n_qubits; }
    Circuit circuit(std::span<const double> x) const { return compile_embedding(arch, x, params, scaling); }
    Statevector state(std::span<const double> x) const;
};

// Zero-pads to the next power of two (at least 2) and normalizes.
Statevector amplitude_embed(std::span<const double> x);
Statevector basis_embed(std::span<const int> bits);

// Parameter files: {"architecture": "WS", "n_qubits": 2, "params": [...]}.
struct ParameterFile {
    ArchitectureSpec arch;
    ParamVector params;
};

std::string params_to_json(const ArchitectureSpec& arch, const ParamVector& params);
ParameterFile params_from_json(std::string_view text);
void write_params_file(const std::string& path, const ArchitectureSpec& arch, const ParamVector& params);
ParameterFile read_params_file(const std::string& path);

}  // namespace qksvm
