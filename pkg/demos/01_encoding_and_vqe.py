# %% [markdown]
# Helium on two qubits: encoding and VQE
#
# The three singlet configurations of helium in a small orbital basis map
# onto the computational states |00>, |01>, |10> of two qubits. |11> is
# unused and sits (almost) decoupled at zero energy.

# %%
import numpy as np

from heqcm import helium_hamiltonian, decode, encode, exact_ground, group_into_bases
from heqcm.circuits import HARTREE_FOCK_PARAMS, OPTIMAL_PARAMS, ansatz_native, ansatz_state, state_fidelity
from heqcm.encoding import HELIUM_STATES
from heqcm.optimizer import VqeConfig, exact_energy, run_vqe, success_probability

np.set_printoptions(precision=5, suppress=True)

h = helium_hamiltonian()
print(h)
m = decode(h)
print(m.real)

# %% [markdown]
# Encoding the dense matrix back gives the same ten Pauli strings.

# %%
print(encode(m).allclose(h, atol=1e-12))
e0, v0 = exact_ground(m, HELIUM_STATES)
print(f"restricted ground energy {e0:.9f} Ha, state {v0}")

# %% [markdown]
# Qubit-wise commuting groups: five measurement settings cover every term.

# %%
for basis, members in group_into_bases(h):
    print(basis, members)

# %% [markdown]
# The hardware-native ansatz. theta1 drives one Ry, theta2 enters through an
# Rz and an Rzz of half its size.

# %%
for g in ansatz_native(OPTIMAL_PARAMS).gates:
    print(g)

# %% [markdown]
# Exact-expectation sweeps from the Hartree-Fock point (-pi, 0).

# %%
print(f"start  {exact_energy(h, HARTREE_FOCK_PARAMS):.6f} Ha")
for rec in run_vqe(VqeConfig(sweeps=3), h):
    print(f"sweep {rec.sweep}  theta=({rec.params.theta1:+.4f}, {rec.params.theta2:+.4f})  E={rec.energy_exact:.9f}")
final = rec.params
print("fidelity with the reference state", state_fidelity(ansatz_state(final), ansatz_state(OPTIMAL_PARAMS)))

# %% [markdown]
# With shots the answer is noisy. The success rate counts runs whose final
# parameters give an exact energy within 1 kcal/mol of e0.

# %%
for shots in (1024, 4096, 16384):
    print(shots, success_probability(shots, sweeps=3, trials=40, seed=1, h=h))
