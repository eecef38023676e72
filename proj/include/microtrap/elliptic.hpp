#pragma once

namespace microtrap {

struct EllipticKE {
    double K; // complete elliptic integral of the first kind
    double E; // complete elliptic integral of the second kind
};

/// Complete elliptic integrals K(m) and E(m) in one pass, with the parameter
/// convention m = k^2:
///
///   K(m) = int_0^{pi/2} dt / sqrt(1 - m sin^2 t)
///   E(m) = int_0^{pi/2} sqrt(1 - m sin^2 t) dt
///
/// Evaluated by the arithmetic-geometric mean:
///   a_0 = 1, g_0 = sqrt(1-m), c_0 = sqrt(m)
///   a_{n+1} = (a_n+g_n)/2, g_{n+1} = sqrt(a_n g_n), c_{n+1} = (a_n-g_n)/2
///   K = pi / (2 AGM(1, sqrt(1-m)))
///   E = K (1 - sum_{n>=0} 2^{n-1} c_n^2)
///
/// Converges quadratically; relative accuracy is ~1e-15 over [0, 1).
/// Throws std::domain_error for m outside [0, 1) (K diverges as m -> 1).
EllipticKE elliptic_KE(double m);

} // namespace microtrap
