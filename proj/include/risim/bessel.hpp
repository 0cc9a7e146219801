#pragma once

#include "risim/types.hpp"

namespace risim {

// Bessel functions of order zero, double precision over the full positive
// axis. Ported from the public-domain SLATEC FNLIB routines DBESJ0/DBESY0
// (W. Fullerton, LANL): Chebyshev expansions below x = 4 and an
// amplitude/phase decomposition above.
double bessel_j0(double x);

// bessel_y0 requires x > 0.
double bessel_y0(double x);

// Hankel function of the second kind, order zero: J0(x) - i*Y0(x).
// Under the e^{+i w t} time convention this is the outgoing cylindrical
// wave, which is why the interaction kernel uses the second kind.
// Requires x > 0.
Complex hankel0_second_kind(double x);

}  // namespace risim
