#pragma once

namespace htlob {

// Exponentially scaled modified Bessel function of the first kind: exp(-z) I_nu(z),
// for real order nu >= 0 and argument z >= 0.
double bessel_ie(double nu, double z);

}  // namespace htlob
