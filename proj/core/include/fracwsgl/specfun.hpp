#pragma once

namespace fracwsgl {

/// Gamma function for real arguments.
///
/// Lanczos approximation (g = 7, nine coefficients) for x >= 0.5 and the
/// reflection formula Γ(x)Γ(1-x) = π / sin(πx) below that. Relative error is
/// below 1e-13 for |x| <= 30.
///
/// Throws PoleError for x in {0, -1, -2, ...} and OverflowError when the
/// result exceeds the double range (x > ~171.6).
double gamma(double x);

/// One-parameter Mittag-Leffler function E_α(z) = Σ z^k / Γ(kα + 1).
///
/// Plain Taylor series accumulated in extended precision. Summation stops
/// once two consecutive terms fall below 1e-16 of the running sum.
///
/// Requires α in (0, 1] and |z| <= 5. Throws DomainError outside that range,
/// and also when the alternating series would cancel so badly that the
/// 1e-12 relative accuracy guarantee cannot be met (small α with large
/// negative z).
double mittag_leffler(double alpha, double z);

}  // namespace fracwsgl
