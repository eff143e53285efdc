"""Initial data and branches of the one-loop deformation.

For eps*Lambda < 0 the initial value rho0 of the deformed metrics solves a
depressed cubic.  Its sign s = -1 roots exist only below the threshold
eps*Lambda = -81 k^2, and each real root starts a separate branch of the
first-order ODE system.  Here we list the roots on both sides of the
threshold, then integrate every branch at eps*Lambda = -100 and compare the
numerical solution with the closed form.

Run with ``python3 demos/02_one_loop_branches.py``.
"""

from heisenqk import SolutionSpec
from heisenqk.evolution import crosscheck
from heisenqk.solutions import branch_slopes, cubic_rho_roots

k = 1.0
for el in (-50.0, -81.0, -100.0):
    roots = cubic_rho_roots(k, el)
    print(f"eps*Lambda = {el:g}: valid roots s=+1 -> {roots.valid_count(1)}, s=-1 -> {roots.valid_count(-1)}")
    for r in roots.roots:
        value = f"{r.rho:.10g}" if r.real else f"{r.value:.10g} (complex)"
        print(f"    rho_{r.l} = {value}, residual {r.residual:.1e}, valid for s: {r.valid}")

# %% the three slopes b'(t0) of the branch system at a = b = 1
print("\nslopes at eps*Lambda = -100:", branch_slopes(1.0, 1.0, k, -100.0))

# %% integrate each branch forward and backward
for l in (1, 2, 3):
    spec = SolutionSpec.make("NegativeTimelike", k=k, epslambda=-100, branch=l)
    lo, hi = spec.domain
    print(f"\nbranch l={l}: gamma = {spec.gamma:.6g}, t-domain ({lo:.6g}, {hi:.6g})")
    for span in (2.0, -2.0):
        rep = crosscheck(spec, span=span)
        print(
            f"    span {span:+g}: stopped at t = {rep.t_end:.6g} ({rep.termination.value}), "
            f"max relative deviation {rep.max_relative_deviation:.1e}"
        )
