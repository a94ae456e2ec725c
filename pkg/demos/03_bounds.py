"""
How the coherence relates to variance, Fisher information and noncommutativity
==============================================================================

The coherence sits below the standard deviation of K and below half the
square root of the quantum Fisher information, with equality for pure
qubits. It sits above the average noncommutativity |Tr([X, K] rho)| / 2 of
normalized observables, and below the total imaginary Kirkwood-Dirac mass.
"""

import numpy as np

import asymcoh as ac

plus = ac.DensityMatrix.pure([1, 1])
print("pure qubit |+>, K = sigma_z")
rep = ac.bounds_report(plus, ac.SIGMA_Z)
print(f"  C_w = {rep.c_w:.6f}  std = {rep.std_dev:.6f}  QFI = {rep.qfi:.6f}")

mixed = ac.DensityMatrix.from_bloch(0.5, 0, 0)
rep = ac.bounds_report(mixed, ac.SIGMA_Z)
print("mixed qubit r = 0.5 along x")
print(f"  C_w = {rep.c_w:.6f}  std = {rep.std_dev:.6f} (strictly larger)  QFI = {rep.qfi:.6f} = 4 C_w^2")

rho, K, X = ac.random_density_matrix(4, seed=1), ac.random_generator(4, seed=2), ac.random_generator(4, seed=3)
rep = ac.bounds_report(rho, K, X)
print("random d=4 instance with a second observable")
print(rep.to_json())

# the |i> state saturates the uncertainty-type product for sigma_z and sigma_x
i_state = ac.DensityMatrix.pure([1, 1j])
print("uncertainty product at |i>:", ac.uncertainty_product_check(i_state, ac.SIGMA_Z, ac.SIGMA_X))

# Fisher information of the translated family bounds the estimation error
print("optimal estimation (delta2, bound, ok) for |+>, nu=1:", ac.optimal_estimation_bound(plus, ac.SIGMA_Z, 1))

# supremum over all generators sharing a spectrum, by sampling
res = ac.spectrum_class_sup(ac.DensityMatrix.pure([1, 0]), (1.0, -1.0), 500, seed=0)
print(f"sup over spectrum (+1, -1) for |0>: {res.sup_estimate:.6f} (KD bound {res.kd_bound:.6f}, noncommutativity {res.kwr_sup:.6f})")

# for pure states the gap to the standard deviation is recorded, not assumed
for d in (3, 4):
    gaps = ac.pure_state_gap_distribution(d, 200, seed=d)
    print(f"d={d}: std - C_w over 200 pure states: min {gaps.min():.2e}, max {gaps.max():.2e}")
