// quadrature.hpp - Gauss-Laguerre rules for integrals against exp(-t) on [0, inf)

#pragma once

#include <cstddef>
#include <vector>

namespace isospec::quadrature {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// n-point rule for int_0^inf exp(-t) f(t) dt, exact for polynomials of
// degree < 2n. Nodes come from the Jacobi matrix eigenvalues and are then
// polished by Newton steps on L_n; weights use x / ((n+1) L_{n+1}(x))^2
// evaluated in log space so large n does not overflow.
Rule gauss_laguerre(std::size_t n);

}  // namespace isospec::quadrature
