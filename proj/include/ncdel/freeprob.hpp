#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ncdel/core.hpp"
#include "ncdel/ncpoly.hpp"

namespace ncdel {

/// tau(s_{w1} ... s_{wk}) for free standard semicirculars: number of non-crossing pairings of
/// equal labels. Exact in unsigned 64-bit arithmetic.
std::uint64_t semicircular_word_moment(const std::vector<int>& w);

/// Same count by exhaustive enumeration of all pair partitions; for cross-checks on short words.
std::uint64_t semicircular_word_moment_bruteforce(const std::vector<int>& w);

std::uint64_t catalan(int n);

/// k -> tau((1 - q(s))^k) for k = 0..k_max; q over hermitian symbols.
std::map<int, double> limiting_moments(const NCPolynomial& q_tilde, int k_max);

/// -sum_{k=0}^{D} tau((1-q)^k) / z^{k+1}; moments from Fock space propagation.
/// Throws when the last retained term exceeds tail_tol, the size of the truncation error.
cplx stieltjes_tail_oracle(const NCPolynomial& q_tilde, cplx z, int D, double tail_tol = 1e-9);

/// tau((1-q)^k) for k = 0..K evaluated on the full Fock space over gamma* letters.
std::vector<cplx> fock_moments(const NCPolynomial& q_tilde, int K);

}  // namespace ncdel
