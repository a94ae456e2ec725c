"""
Weak values, the log-derivative identity and Kirkwood-Dirac tables
==================================================================

The imaginary part of the weak value K^w(x) = <x|K rho|x> / <x|rho|x> is half
the log-derivative of the Born probability under the translation
exp(-iK theta). Summed with the probabilities, the same imaginary parts give
the classical Fisher information of the measurement, and arranged by the
eigenbasis of K they form the Kirkwood-Dirac quasiprobability.
"""

import numpy as np

import asymcoh as ac

rho = ac.random_density_matrix(3, seed=4)
K = ac.random_generator(3, seed=5)
basis = ac.OrthonormalBasis.from_unitary(ac.haar_random_unitary(3, 6))

wv = ac.weak_values(K, rho, basis)
print("weak values       :", np.round(wv, 4))
print("Born probabilities:", np.round(ac.born_probabilities(rho, basis), 4))

# Im K^w = (1/2) d log Pr / d theta, checked by central differences
for delta in (1e-2, 5e-3, 2.5e-3):
    print(f"identity residual at delta={delta:g}: {ac.log_derivative_identity_residual(rho, K, basis, delta):.3e}")

# two routes to the classical Fisher information
fw = ac.classical_fisher_information(rho, K, basis)
fd = ac.classical_fisher_information(rho, K, basis, method="finite_difference")
print(f"Fisher information: weak-value route {fw:.8f}, finite-difference route {fd:.8f}")
print(f"quantum Fisher information (any measurement is at most this): {ac.qfi_unitary_family(rho, K):.8f}")

# KD table at the basis that maximizes the coherence
table = ac.kd_quasiprobability(rho, K.eigenvectors, ac.oracle_basis(rho, K))
print("KD table (real parts):\n", np.round(table.entries.real, 4))
print("KD table (imag parts):\n", np.round(table.entries.imag, 4))
print("sum |Im KD| =", table.imag_abs_sum(), " marginal error =", table.marginal_error)
print("first CSV lines:\n" + "\n".join(table.to_csv().splitlines()[:3]))
