#pragma once

#include "opent/dense_operator.hpp"

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace opent {

enum class ModelFamily { XXZ, KIM, TFIM };

inline std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::XXZ: return "XXZ";
    case ModelFamily::KIM: return "KIM";
    case ModelFamily::TFIM: return "TFIM";
  }
  return "?";
}

inline ModelFamily parse_model_family(const std::string& s) {
  if (s == "XXZ" || s == "xxz") return ModelFamily::XXZ;
  if (s == "KIM" || s == "kim") return ModelFamily::KIM;
  if (s == "TFIM" || s == "tfim") return ModelFamily::TFIM;
  throw ConfigError("unknown model family '" + s + "'");
}

/// Two-site gate family and couplings. TFIM is KIM with h_z pinned to 0.
struct ModelSpec {
  ModelFamily family = ModelFamily::XXZ;
  double J = 1.0;
  double Delta = 0.55;  // XXZ anisotropy
  double hx = 0.0;
  double hz = 0.0;

  static ModelSpec xxz(double J = 1.0, double Delta = 0.55) {
    return {ModelFamily::XXZ, J, Delta, 0.0, 0.0};
  }
  static ModelSpec kim(double J = 1.0, double hx = 0.9045, double hz = 0.8090) {
    return {ModelFamily::KIM, J, 0.0, hx, hz};
  }
  static ModelSpec tfim(double J = 1.0, double hx = 0.55) {
    return {ModelFamily::TFIM, J, 0.0, hx, 0.0};
  }

  static ModelSpec defaults(ModelFamily f) {
    switch (f) {
      case ModelFamily::XXZ: return xxz();
      case ModelFamily::KIM: return kim();
      case ModelFamily::TFIM: return tfim();
    }
    return xxz();
  }

  std::string name() const { return to_string(family); }
};

using Gate = Eigen::Matrix4cd;

namespace pauli {
inline Eigen::Matrix2cd I() { return Eigen::Matrix2cd::Identity(); }
inline Eigen::Matrix2cd X() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
inline Eigen::Matrix2cd Y() {
  Eigen::Matrix2cd m;
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
inline Eigen::Matrix2cd Z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}
inline Eigen::Matrix2cd by_name(char c) {
  switch (c) {
    case 'I': return I();
    case 'X': return X();
    case 'Y': return Y();
    case 'Z': return Z();
    default: throw DomainError(std::string("unknown Pauli '") + c + "'");
  }
}
inline Gate kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}
}  // namespace pauli

/// Hermitian generator H of the two-site gate U = exp(-i H).
inline Gate two_site_hamiltonian(const ModelSpec& m) {
  using namespace pauli;
  switch (m.family) {
    case ModelFamily::XXZ:
      return m.J * (kron(X(), X()) + kron(Y(), Y()) + m.Delta * kron(Z(), Z()));
    case ModelFamily::KIM:
    case ModelFamily::TFIM: {
      const double hz = m.family == ModelFamily::TFIM ? 0.0 : m.hz;
      return m.J * kron(Z(), Z()) + m.hx * (kron(I(), X()) + kron(X(), I())) +
             hz * (kron(I(), Z()) + kron(Z(), I()));
    }
  }
  throw DomainError("two_site_hamiltonian: unsupported family");
}

/// U = exp(-i H) through the eigendecomposition of H.
inline Gate build_gate(const ModelSpec& m) {
  Eigen::SelfAdjointEigenSolver<Gate> es(two_site_hamiltonian(m));
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i) phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// A Pauli on `site` (1-based), identity elsewhere.
inline DenseOperator local_pauli(int n_sites, int site, char which) {
  if (site < 1 || site > n_sites) {
    throw DimensionError("local_pauli: site " + std::to_string(site) + " outside 1.." +
                         std::to_string(n_sites));
  }
  CMatrix m = CMatrix::Ones(1, 1);
  for (int s = 1; s <= n_sites; ++s) {
    const Eigen::Matrix2cd f = s == site ? pauli::by_name(which) : pauli::I();
    m = Eigen::kroneckerProduct(m, f).eval();
  }
  return DenseOperator(n_sites, 2, std::move(m));
}

/// Pauli string such as "IXZI" (site 1 first).
inline DenseOperator pauli_string(const std::string& label) {
  if (label.empty()) throw DimensionError("pauli_string: empty label");
  CMatrix m = CMatrix::Ones(1, 1);
  for (char c : label) m = Eigen::kroneckerProduct(m, pauli::by_name(c)).eval();
  return DenseOperator(static_cast<int>(label.size()), 2, std::move(m));
}

inline int default_initial_site(int n_sites) { return n_sites / 2 + 1; }

/// sigma_z on `site`, the initial operator of the brickwork experiments.
inline DenseOperator initial_local_z(int n_sites, int site) {
  return local_pauli(n_sites, site, 'Z');
}

inline DenseOperator initial_local_z(int n_sites) {
  if (n_sites % 2 != 0) throw DimensionError("initial_local_z: default site needs even N");
  return initial_local_z(n_sites, default_initial_site(n_sites));
}

/// Brick layout for layer t (1-based). With odd-first parity, odd layers
/// couple {2,3},{4,5},... and even layers {1,2},{3,4},...
inline std::vector<int> brick_left_sites(int layer, int n_sites, bool first_layer_odd = true) {
  const bool odd_pattern = (layer % 2 == 1) == first_layer_odd;
  std::vector<int> out;
  for (int s = odd_pattern ? 2 : 1; s + 1 <= n_sites; s += 2) out.push_back(s);
  return out;
}

namespace detail {

// O <- G^dagger_{(s,s+1)} O G_{(s,s+1)} for qubits, site 1 the top bit.
inline void conjugate_brick(CMatrix& op, int n_sites, int site, const Gate& gate) {
  const Eigen::Index dim = op.rows();
  const Eigen::Index hi = Eigen::Index{1} << (n_sites - site);
  const Eigen::Index lo = Eigen::Index{1} << (n_sites - site - 1);
  const Gate gd = gate.adjoint();
  // Row transform: rows k' <- sum_k gd(k', k) rows k.
  for (Eigen::Index base = 0; base < dim; ++base) {
    if (base & (hi | lo)) continue;
    const Eigen::Index r[4] = {base, base | lo, base | hi, base | hi | lo};
    for (Eigen::Index c = 0; c < dim; ++c) {
      const Complex v0 = op(r[0], c), v1 = op(r[1], c), v2 = op(r[2], c), v3 = op(r[3], c);
      for (int k = 0; k < 4; ++k) {
        op(r[k], c) = gd(k, 0) * v0 + gd(k, 1) * v1 + gd(k, 2) * v2 + gd(k, 3) * v3;
      }
    }
  }
  // Column transform: cols k' <- sum_k cols k gate(k, k').
  for (Eigen::Index row = 0; row < dim; ++row) {
    Complex* rp = op.data() + row * dim;
    for (Eigen::Index base = 0; base < dim; ++base) {
      if (base & (hi | lo)) continue;
      const Eigen::Index c[4] = {base, base | lo, base | hi, base | hi | lo};
      const Complex v0 = rp[c[0]], v1 = rp[c[1]], v2 = rp[c[2]], v3 = rp[c[3]];
      for (int k = 0; k < 4; ++k) {
        rp[c[k]] = v0 * gate(0, k) + v1 * gate(1, k) + v2 * gate(2, k) + v3 * gate(3, k);
      }
    }
  }
}

}  // namespace detail

/// Heisenberg operator O_t after t brick layers. Layer t acts as
/// O_t = L_t^dagger O_{t-1} L_t.
struct EvolutionState {
  DenseOperator op;
  int layers_applied = 0;
  ModelSpec model;
  int initial_site = 1;
  bool first_layer_odd = true;
};

inline EvolutionState apply_layer(const EvolutionState& state) {
  if (state.op.local_dim() != 2) throw DimensionError("apply_layer: gates are defined for qubits");
  const Gate gate = build_gate(state.model);
  const int n = state.op.n_sites();
  const int layer = state.layers_applied + 1;
  CMatrix m = state.op.matrix();
  for (int s : brick_left_sites(layer, n, state.first_layer_odd)) detail::conjugate_brick(m, n, s, gate);
  return EvolutionState{DenseOperator(n, 2, std::move(m)), layer, state.model, state.initial_site,
                        state.first_layer_odd};
}

/// Calls `visit` on every snapshot t = 0..layers without keeping them all,
/// for system sizes where a trajectory does not fit in memory.
inline void evolve_each(const DenseOperator& op0, const ModelSpec& model, int layers,
                        const std::function<void(const EvolutionState&)>& visit,
                        int initial_site = 0, bool first_layer_odd = true) {
  if (layers < 0) throw DomainError("evolve: layers must be >= 0");
  EvolutionState state{op0, 0, model, initial_site, first_layer_odd};
  visit(state);
  for (int t = 1; t <= layers; ++t) {
    state = apply_layer(state);
    visit(state);
  }
}

inline std::vector<EvolutionState> evolve(const DenseOperator& op0, const ModelSpec& model, int layers,
                                          int initial_site = 0, bool first_layer_odd = true) {
  std::vector<EvolutionState> out;
  out.reserve(static_cast<size_t>(std::max(layers, 0) + 1));
  evolve_each(op0, model, layers, [&](const EvolutionState& s) { out.push_back(s); }, initial_site,
              first_layer_odd);
  return out;
}

struct SiteInterval {
  int lo;
  int hi;
  bool contains(int s) const { return s >= lo && s <= hi; }
  int width() const { return hi - lo + 1; }
  bool operator==(const SiteInterval&) const = default;
};

/// Sites on which O_t may act nontrivially, from the brick geometry alone.
inline SiteInterval light_cone_support(int t, int site, int n_sites, bool first_layer_odd = true) {
  if (site < 1 || site > n_sites) throw DimensionError("light_cone_support: site out of range");
  SiteInterval iv{site, site};
  for (int layer = 1; layer <= t; ++layer) {
    for (int s : brick_left_sites(layer, n_sites, first_layer_odd)) {
      if (s + 1 == iv.lo) iv.lo = s;
      if (s == iv.hi) iv.hi = s + 1;
    }
  }
  return iv;
}

/// Whether a cut after `cut` sites splits the interval.
inline bool cut_inside(const SiteInterval& iv, int cut) { return cut >= iv.lo && cut < iv.hi; }

}  // namespace opent
