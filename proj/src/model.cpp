#include "qlock/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qlock {

void CavityParams::validate() const {
    if (!(omega > 0) || !(L > 0) || !(V > 0) || !(d_a > 0))
        throw std::invalid_argument("cavity parameters must be strictly positive");
}

double ModelParams::coupling(int atom_index) const {
    if (atom_index < 0 || atom_index >= n_atoms())
        throw std::out_of_range("atom index out of range");
    const AtomConfig& a = atoms[atom_index];
    if (a.g_override) return *a.g_override;
    return std::sqrt(cavity.omega / cavity.V) * cavity.d_a *
           std::sin(std::numbers::pi * a.x / cavity.L);
}

std::vector<double> ModelParams::couplings() const {
    std::vector<double> g(atoms.size());
    for (int i = 0; i < n_atoms(); ++i) g[i] = coupling(i);
    return g;
}

bool ModelParams::rwa_warning() const {
    for (int i = 0; i < n_atoms(); ++i)
        if (coupling(i) >= 0.1 * cavity.omega) return true;
    return false;
}

void ModelParams::validate() const {
    cavity.validate();
    if (atoms.empty()) throw std::invalid_argument("at least one atom required");
    for (int i = 0; i < n_atoms(); ++i) {
        const AtomConfig& a = atoms[i];
        if (a.x < 0 || a.x > cavity.L)
            throw std::invalid_argument("atom position outside [0, L]");
        if (!std::isfinite(a.delta))
            throw std::invalid_argument("atom detuning must be finite");
        if (coupling(i) < 0)
            throw std::invalid_argument("atom coupling must be non-negative");
    }
}

ModelParams default_params(int n_atoms) {
    if (n_atoms < 1) throw std::invalid_argument("n_atoms must be >= 1");
    ModelParams p;
    p.atoms.resize(n_atoms);
    for (int i = 0; i < n_atoms; ++i)
        p.atoms[i].x = static_cast<double>(i + 1) / (n_atoms + 1);
    return p;
}

nlohmann::json params_to_json(const ModelParams& p) {
    nlohmann::json j;
    j["omega"] = p.cavity.omega;
    j["L"] = p.cavity.L;
    j["V"] = p.cavity.V;
    j["d_a"] = p.cavity.d_a;
    auto atoms = nlohmann::json::array();
    for (const auto& a : p.atoms) {
        nlohmann::json ja;
        ja["x"] = a.x;
        ja["delta"] = a.delta;
        if (a.g_override) ja["g_override"] = *a.g_override;
        else ja["g_override"] = nullptr;
        atoms.push_back(std::move(ja));
    }
    j["atoms"] = std::move(atoms);
    return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
    ModelParams p;
    p.cavity.omega = j.at("omega").get<double>();
    p.cavity.L = j.at("L").get<double>();
    p.cavity.V = j.at("V").get<double>();
    p.cavity.d_a = j.at("d_a").get<double>();
    for (const auto& ja : j.at("atoms")) {
        AtomConfig a;
        a.x = ja.at("x").get<double>();
        a.delta = ja.at("delta").get<double>();
        if (!ja.at("g_override").is_null()) a.g_override = ja.at("g_override").get<double>();
        p.atoms.push_back(a);
    }
    p.validate();
    return p;
}

} // namespace qlock
