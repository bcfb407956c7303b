#pragma once

// Bernstein (sub-gamma) functions Psi_{v,b}, their one-sided Legendre
// transform and its inverse. Every guarantee in the library is built on these.

namespace hypoguard {

/// Variance proxy v and scale b of Psi_{v,b}(lambda) = lambda^2 v / (2 (1 - lambda b)).
struct BernsteinPair {
  double v = 0.0;
  double b = 0.0;

  /// Throws DomainError on negative or non-finite fields.
  void validate() const;
  bool degenerate() const noexcept { return v == 0.0 && b == 0.0; }
};

/// Psi_{v,b}(lambda); +infinity once lambda * b >= 1 (the bound is then vacuous).
double psi(const BernsteinPair& pair, double lambda);

/// sup_{0 <= lambda < 1/b} { lambda r - Psi(lambda) } in closed form.
/// For v = 0 this is the continuous limit r / b.
double psi_star(const BernsteinPair& pair, double r);

/// Inverse of psi_star: sqrt(2 v eta) + b eta.
double psi_star_inv(const BernsteinPair& pair, double eta);

}  // namespace hypoguard
