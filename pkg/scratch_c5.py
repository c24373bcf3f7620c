import time

import numpy as np

from corrvec.circuits import MeasurementSettings, NoiseModel, run_pure
from corrvec.fermion import BlockedSpinOrbitals
from corrvec.greens import dyson_embed, nondyson_embed, retarded_grid, spin_up_block
from corrvec.molham import build_cas, fock_matrix, read_fcidump
from corrvec.oracle import GreensOracle, exact_ground, lehmann_decomposition
from corrvec.solver import SolverOptions, assemble_matrices, sweep_columns
from corrvec.vqe import AnsatzSpec, build_hea, hf_start_angles, vqe_ground_state

t_all = time.time()
I = read_fcidump("tests/fixtures/lih_2.0.fcidump")
part, cas = build_cas(I, (1, 2))
Hc = cas.to_qubits()
e_ref, psi_ref = exact_ground(Hc, n_particles=2)

spec = AnsatzSpec(width=4, depth=3)
th0 = hf_start_angles(spec, BlockedSpinOrbitals(2).closed_shell_modes(2))
s = MeasurementSettings(mode="exact", shots=10**6, seed=31)
t0 = time.time()
e0, th, tr = vqe_ground_state(Hc, spec, s, NoiseModel(), tol=1e-12,
                              max_sweeps=200, theta0=th0)
print("GS: err=%.2e sweeps=%d %.1fs" % (abs(e0 - e_ref), tr.sweeps, time.time() - t0))

grid = retarded_grid(-2.6, 1.2, 96, eta=0.05)
zs = grid.points
gs_circ = build_hea(spec).bound(th)
opts = SolverOptions()
t0 = time.time()
recs = sweep_columns(Hc, e0, gs_circ, zs, [0, 1], spec, opts, s, NoiseModel(),
                     seed=31, n_elec=2)
dt = time.time() - t0
n_unconv = sum(not r.converged for r in recs)
res = [r.residual for r in recs]
print("sweep: %d records %.1fs unconv=%d res: med=%.2e max=%.2e"
      % (len(recs), dt, n_unconv, np.median(res), max(res)))

g_solver = assemble_matrices(recs, [0, 1], 2, len(zs))
oracle = GreensOracle(Hc, e_ref, psi_ref, n_particles=2)
g_oracle = oracle.series(zs)
print("max |G_cas solver - oracle| =", np.max(np.abs(g_solver - g_oracle)))

f = fock_matrix(I)
active = (1, 2)
gs_sp = np.array([spin_up_block(g) for g in g_solver])
go_sp = np.array([spin_up_block(g) for g in g_oracle])
emb = {}
for name, gcas in (("solver", gs_sp), ("oracle", go_sp)):
    gd, skipped = dyson_embed(gcas, f, active, zs)
    gn = nondyson_embed(gcas, f, active, zs)
    emb[name] = (gd, gn)
    if skipped:
        print(name, "dyson skipped:", skipped)

lehm = lehmann_decomposition(Hc, e_ref, psi_ref, 2)
cas_poles = []
for sgn, poles_arr, w_arr in ((1, lehm.poles_particle, lehm.weights_particle),
                              (-1, lehm.poles_hole, lehm.weights_hole)):
    wt = np.sum(np.abs(w_arr) ** 2, axis=1)
    cas_poles.extend(sgn * p for p, w in zip(poles_arr, wt) if w > 1e-8)
f_eigs = np.linalg.eigvalsh(f)
poles = np.concatenate([cas_poles, f_eigs])
omega = zs.real
off = np.ones(len(zs), dtype=bool)
for p in poles:
    off &= np.abs(omega - p) > 3 * 0.05
print("off-peak points: %d / %d" % (off.sum(), len(zs)))

for which, j in (("dyson", 0), ("nondyson", 1)):
    tr_s = np.array([np.trace(m).imag for m in emb["solver"][j]])
    tr_o = np.array([np.trace(m).imag for m in emb["oracle"][j]])
    d = np.abs(tr_s - tr_o)
    print("%-8s off-peak max=%.4f  overall max=%.4f" % (which, d[off].max(), d.max()))

d_do = np.abs(np.array([np.trace(a).imag - np.trace(b).imag
                        for a, b in zip(emb["oracle"][0], emb["oracle"][1])]))
print("oracle dyson-vs-nondyson max |dTr| = %.2e" % d_do.max())
print("total %.1fs" % (time.time() - t_all))
