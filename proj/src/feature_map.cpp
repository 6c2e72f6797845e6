#include "qksvm/feature_map.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qksvm/error.hpp"

namespace qksvm {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

void check_param_count(std::span<const double> params, int n_qubits, const char* layer) {
    const auto expected = static_cast<std::size_t>(3 * n_qubits);
    if (params.size() != expected) {
        std::ostringstream msg;
        msg << layer << " layer on " << n_qubits << " qubits needs " << expected << " parameters, got "
            << params.size();
        throw ShapeError(msg.str());
    }
}

}  // namespace

std::string ArchitectureSpec::text() const {
    std::string s;
    for (Layer t : tokens) s.push_back(static_cast<char>(t));
    return s;
}

std::size_t ArchitectureSpec::param_count() const {
    std::size_t variational = 0;
    for (Layer t : tokens)
        if (t != Layer::S) ++variational;
    return 3 * static_cast<std::size_t>(n_qubits) * variational;
}

bool ArchitectureSpec::is_entangling() const {
    for (Layer t : tokens)
        if (t == Layer::E) return true;
    return false;
}

ArchitectureSpec parse_architecture(std::string_view text, int n_qubits) {
    const auto body = trim(text);
    if (body.empty()) throw ParseError("empty architecture string");
    if (n_qubits < 1 || n_qubits > kMaxQubits) throw CapacityError("architecture qubit count out of range");
    ArchitectureSpec spec;
    spec.n_qubits = n_qubits;
    for (char c : body) {
        switch (c) {
            case 'S': spec.tokens.push_back(Layer::S); break;
            case 'W': spec.tokens.push_back(Layer::W); break;
            case 'E': spec.tokens.push_back(Layer::E); break;
            default: throw ParseError("unknown layer symbol '" + std::string(1, c) + "' in \"" + std::string(body) + "\"");
        }
    }
    bool has_s = false;
    for (Layer t : spec.tokens) has_s |= (t == Layer::S);
    if (!has_s) throw ValidationError("architecture \"" + std::string(body) + "\" has no S layer; data never enters the circuit");
    if (spec.is_entangling() && n_qubits < 2) throw ValidationError("E layer needs at least 2 qubits");
    return spec;
}

std::vector<Gate> build_s_layer(std::span<const double> x, int n_qubits, const ScalingConfig& cfg) {
    if (x.size() != static_cast<std::size_t>(n_qubits)) {
        std::ostringstream msg;
        msg << "S layer on " << n_qubits << " qubits got " << x.size() << " features";
        throw ShapeError(msg.str());
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw ArgumentError("feature values must be finite");
        if (v < 0.0 || v > 1.0)
            warn_once("s-layer-range", "feature value outside [0, 1] passed to the S layer; values are not clamped");
    }
    std::vector<Gate> gates;
    gates.reserve(2 * x.size());
    for (int q = 0; q < n_qubits; ++q) gates.push_back(Gate::h(q));
    for (int q = 0; q < n_qubits; ++q) gates.push_back(Gate::rz(q, cfg.w * x[static_cast<std::size_t>(q)]));
    return gates;
}

std::vector<Gate> build_w_layer(std::span<const double> params, int n_qubits) {
    check_param_count(params, n_qubits, "W");
    std::vector<Gate> gates;
    gates.reserve(static_cast<std::size_t>(n_qubits));
    for (int q = 0; q < n_qubits; ++q) {
        const auto p = params.subspan(3 * static_cast<std::size_t>(q), 3);
        gates.push_back(Gate::rot(q, p[0], p[1], p[2]));
    }
    return gates;
}

std::vector<Gate> build_e_layer(std::span<const double> params, int n_qubits) {
    if (n_qubits < 2) throw ValidationError("E layer needs at least 2 qubits");
    auto gates = build_w_layer(params, n_qubits);
    for (int q = 0; q < n_qubits; ++q) gates.push_back(Gate::cnot(q, (q + 1) % n_qubits));
    return gates;
}

void validate_embedding_inputs(const ArchitectureSpec& arch, std::span<const double> x,
                               std::span<const double> params, const ScalingConfig& cfg) {
    if (!std::isfinite(cfg.w) || cfg.w == 0.0) throw ArgumentError("scaling factor w must be finite and nonzero");
    if (x.size() != static_cast<std::size_t>(arch.n_qubits)) {
        std::ostringstream msg;
        msg << "datum has " << x.size() << " features, architecture expects " << arch.n_qubits;
        throw ShapeError(msg.str());
    }
    if (params.size() != arch.param_count()) {
        std::ostringstream msg;
        msg << "architecture " << arch.text() << " on " << arch.n_qubits << " qubits needs "
            << arch.param_count() << " parameters, got " << params.size();
        throw ShapeError(msg.str());
    }
    for (double p : params)
        if (!std::isfinite(p)) throw ArgumentError("variational parameters must be finite");
}

Circuit compile_embedding(const ArchitectureSpec& arch, std::span<const double> x,
                          std::span<const double> params, const ScalingConfig& cfg) {
    validate_embedding_inputs(arch, x, params, cfg);
    const int n = arch.n_qubits;
    const auto block = static_cast<std::size_t>(3 * n);
    Circuit circuit{n, {}};
    std::size_t offset = 0;
    for (Layer t : arch.tokens) {
        std::vector<Gate> layer;
        switch (t) {
            case Layer::S: layer = build_s_layer(x, n, cfg); break;
            case Layer::W: layer = build_w_layer(params.subspan(offset, block), n); offset += block; break;
            case Layer::E: layer = build_e_layer(params.subspan(offset, block), n); offset += block; break;
        }
        for (auto& g : layer) circuit.gates.push_back(std::move(g));
    }
    return circuit;
}

Statevector Embedding::state(std::span<const double> x) const {
    Statevector s(arch.n_qubits);
    s.apply(circuit(x));
    return s;
}

Statevector amplitude_embed(std::span<const double> x) {
    if (x.empty()) throw ShapeError("amplitude embedding of an empty vector");
    double norm = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) throw ArgumentError("amplitude embedding needs finite values");
        norm += v * v;
    }
    if (norm == 0.0) throw NormalizationError("cannot amplitude-embed the zero vector");
    std::size_t dim = 2;
    while (dim < x.size()) dim <<= 1;
    if (std::countr_zero(dim) > kMaxQubits) throw CapacityError("vector too long for amplitude embedding");
    const double inv = 1.0 / std::sqrt(norm);
    std::vector<Complex> amps(dim, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < x.size(); ++i) amps[i] = x[i] * inv;
    // Renormalize against rounding so the strict norm check always passes.
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    for (auto& a : amps) a /= std::sqrt(s);
    return Statevector::from_amplitudes(std::move(amps));
}

Statevector basis_embed(std::span<const int> bits) {
    if (bits.empty()) throw ShapeError("basis embedding of an empty bit vector");
    if (bits.size() > static_cast<std::size_t>(kMaxQubits)) throw CapacityError("too many bits for basis embedding");
    Statevector s(static_cast<int>(bits.size()));
    for (std::size_t q = 0; q < bits.size(); ++q) {
        if (bits[q] != 0 && bits[q] != 1) throw ArgumentError("basis embedding entries must be 0 or 1");
        if (bits[q] == 1) s.apply(Gate::x(static_cast<int>(q)));
    }
    return s;
}

std::string params_to_json(const ArchitectureSpec& arch, const ParamVector& params) {
    if (params.size() != arch.param_count()) throw ShapeError("parameter vector does not match architecture");
    nlohmann::json j;
    j["architecture"] = arch.text();
    j["n_qubits"] = arch.n_qubits;
    j["params"] = params;
    return j.dump(2);
}

ParameterFile params_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("parameter file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("architecture") || !j.contains("n_qubits") || !j.contains("params"))
        throw FormatError("parameter file needs architecture, n_qubits and params");
    ParameterFile out;
    try {
        out.arch = parse_architecture(j.at("architecture").get<std::string>(), j.at("n_qubits").get<int>());
        out.params = j.at("params").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed parameter file: ") + e.what());
    }
    if (out.params.size() != out.arch.param_count()) {
        std::ostringstream msg;
        msg << "parameter file holds " << out.params.size() << " values, " << out.arch.text() << " on "
            << out.arch.n_qubits << " qubits needs " << out.arch.param_count();
        throw ShapeError(msg.str());
    }
    return out;
}

void write_params_file(const std::string& path, const ArchitectureSpec& arch, const ParamVector& params) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << params_to_json(arch, params) << '\n';
}

ParameterFile read_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return params_from_json(ss.str());
}

}  // namespace qksvm
