#pragma once

#include "opent/schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace opent {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A probability vector held in descending order.
class Distribution {
 public:
  static constexpr double kSumTol = 1e-10;
  static constexpr double kSupportFloor = 1e-13;

  explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw DomainError("Distribution: empty");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p >= 0.0)) throw DomainError("Distribution: negative or NaN probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTol) {
      throw DomainError("Distribution: probabilities sum to " + std::to_string(sum));
    }
    std::sort(probs_.begin(), probs_.end(), std::greater<>());
  }

  explicit Distribution(const RVector& probs)
      : Distribution(std::vector<double>(probs.data(), probs.data() + probs.size())) {}

  /// The squared Schmidt values of a decomposition.
  static Distribution from_schmidt(const SchmidtDecomposition& sd) {
    return Distribution(sd.probabilities());
  }

  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

/// Renyi entropy in nats. alpha = 1 is Shannon, alpha = 0 the log support
/// size, alpha = infinity the min-entropy.
inline double renyi_entropy(const Distribution& dist, double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("renyi_entropy: alpha must be >= 0");
  const auto& p = dist.probs();
  if (std::isinf(alpha)) return -std::log(p.front());
  if (alpha == 0.0) {
    const auto support = std::count_if(p.begin(), p.end(),
                                       [](double x) { return x > Distribution::kSupportFloor; });
    return std::log(static_cast<double>(support));
  }
  if (alpha == 1.0) {
    double h = 0.0;
    for (double x : p) {
      if (x > 0.0) h -= x * std::log(x);
    }
    return h;
  }
  double s = 0.0;
  for (double x : p) {
    if (alpha < 1.0 && x <= Distribution::kSupportFloor) continue;
    if (x > 0.0) s += std::pow(x, alpha);
  }
  return std::log(s) / (1.0 - alpha);
}

/// Local-operator entanglement: Renyi entropy of the squared Schmidt values.
inline double loe(const SchmidtDecomposition& sd, double alpha) {
  return renyi_entropy(Distribution::from_schmidt(sd), alpha);
}

inline double loe(const DenseOperator& op, const Bipartition& cut, double alpha) {
  return loe(schmidt_decompose(op, cut), alpha);
}

struct CutMaximum {
  double value;
  int cut;
};

/// max over n = 1..N-1 of the LOE; ties keep the leftmost cut.
inline CutMaximum loe_max_over_cuts(const DenseOperator& op, double alpha) {
  if (op.n_sites() < 2) return {0.0, 0};
  CutMaximum best{-kInfinity, 1};
  for (int n = 1; n < op.n_sites(); ++n) {
    const double e = loe(op, Bipartition(op.n_sites(), n), alpha);
    if (e > best.value + 1e-14) best = {e, n};
  }
  return best;
}

/// LOE values per (cut, alpha) for one operator.
struct RenyiProfile {
  std::string operator_id;
  std::map<std::pair<int, double>, double> entries;

  double at(int cut, double alpha) const { return entries.at({cut, alpha}); }

  /// max over cuts for a given alpha.
  double max_over_cuts(double alpha) const {
    double best = -kInfinity;
    for (const auto& [key, value] : entries) {
      if (key.second == alpha) best = std::max(best, value);
    }
    return best;
  }

  /// Entropy non-increasing in alpha at every cut.
  bool monotone(double tol = 1e-10) const {
    for (auto it = entries.begin(); it != entries.end(); ++it) {
      auto next = std::next(it);
      if (next == entries.end()) break;
      if (next->first.first == it->first.first && next->second > it->second + tol) return false;
    }
    return true;
  }
};

inline const std::vector<double>& default_alpha_grid() {
  static const std::vector<double> grid{0.5, 0.7, 1.0, 2.0, kInfinity};
  return grid;
}

/// One Schmidt decomposition per cut, evaluated on the whole alpha grid.
inline RenyiProfile renyi_profile(const DenseOperator& op, std::string id,
                                  const std::vector<double>& alphas = default_alpha_grid()) {
  RenyiProfile prof{std::move(id), {}};
  for (int n = 1; n < op.n_sites(); ++n) {
    const auto dist = Distribution::from_schmidt(schmidt_decompose(op, Bipartition(op.n_sites(), n)));
    for (double a : alphas) prof.entries[{n, a}] = renyi_entropy(dist, a);
  }
  return prof;
}

/// sum_{i > chi} p_i.
inline double tail_sum(const Distribution& dist, std::size_t chi) {
  if (chi > dist.size()) throw DomainError("tail_sum: chi exceeds distribution length");
  double s = 0.0;
  // Summing from the small end keeps the tail accurate.
  for (std::size_t i = dist.size(); i > chi; --i) s += dist[i - 1];
  return s;
}

inline double tail_sum(const RVector& probs_desc, Eigen::Index chi) {
  if (chi < 0 || chi > probs_desc.size()) throw DomainError("tail_sum: chi out of range");
  double s = 0.0;
  for (Eigen::Index i = probs_desc.size(); i > chi; --i) s += probs_desc(i - 1);
  return s;
}

namespace detail {
inline void require_sub_unit_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError(std::string(what) + ": alpha must lie in (0,1)");
}
inline void require_positive_chi(double chi, const char* what) {
  if (!(chi >= 1.0)) throw DomainError(std::string(what) + ": chi must be >= 1");
}
}  // namespace detail

/// Upper bound on the tail sum from an alpha < 1 Renyi entropy:
/// exp[((1-alpha)/alpha)(S - log(chi/(1-alpha)))].
inline double lemma1a_upper(double entropy, double alpha, double chi) {
  detail::require_sub_unit_alpha(alpha, "lemma1a_upper");
  detail::require_positive_chi(chi, "lemma1a_upper");
  return std::exp((1.0 - alpha) / alpha * (entropy - std::log(chi / (1.0 - alpha))));
}

/// Lower bound on the tail sum from an alpha > 1 Renyi entropy:
/// 1 - exp[((alpha-1)/alpha)(log chi - S)]. alpha = infinity is the limit.
inline double lemma1b_lower(double entropy, double alpha, double chi) {
  if (!(alpha > 1.0)) throw DomainError("lemma1b_lower: alpha must be > 1");
  detail::require_positive_chi(chi, "lemma1b_lower");
  const double ratio = std::isinf(alpha) ? 1.0 : (alpha - 1.0) / alpha;
  return 1.0 - std::exp(ratio * (std::log(chi) - entropy));
}

/// Upper bound on sqrt(p_{chi+1}): exp[((1-alpha)/(2 alpha)) S - log(chi)/(2 alpha)].
inline double lemma1c_element(double entropy, double alpha, double chi) {
  detail::require_sub_unit_alpha(alpha, "lemma1c_element");
  detail::require_positive_chi(chi, "lemma1c_element");
  return std::exp((1.0 - alpha) / (2.0 * alpha) * entropy - std::log(chi) / (2.0 * alpha));
}

/// Converts nats to bits for display.
inline double nats_to_bits(double nats) { return nats / std::log(2.0); }

}  // namespace opent
