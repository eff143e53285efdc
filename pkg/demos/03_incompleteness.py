"""Which metrics end at finite distance?

A metric on an interval of t is incomplete when a geodesic reaches the end
of the interval at finite length.  For the families here the normal curve
(along t, or along rho for the one-loop charts) is such a geodesic.  The
probe measures its length and watches the Kretschmann scalar on the way, so
it can tell a curvature singularity from a harmless chart boundary.

Run with ``python3 demos/03_incompleteness.py``.
"""

from heisenqk import SolutionSpec
from heisenqk.geodesics import incompleteness_probe, normal_length

cases = [
    ("HyperKahlerTimelike", {"k": 1}),
    ("PositiveTimelike", {"epslambda": 3}),
    ("NegativeTimelike", {"epslambda": -100, "branch": 2}),
    ("NegativeTimelike", {"eps": 1, "epslambda": -12}),
    ("HyperKahlerLightlike", {}),
    ("LightlikeQPK", {"lam": 3}),
]

for family, kwargs in cases:
    spec = SolutionSpec.make(family, **kwargs)
    p = incompleteness_probe(spec)
    print(f"{spec.label}")
    print(f"    {p.curve}: {p.verdict.value}, length {p.length:.9g}, affine span {p.affine_span:.9g}")
    if p.kretschmann_trace:
        d, K = p.kretschmann_trace[-1]
        print(f"    Kretschmann {K:.3g} at distance {d:.1e} from the end; metric degeneration x{p.degeneration:.3g}")
    print(f"    {p.note}")

# %% the hyperKahler length is exactly 1/(3k)
spec = SolutionSpec.make("HyperKahlerTimelike", k=2)
print("\nlength to t0 - 1/(3k) at k=2:", normal_length(spec, 0.0, -1 / 6), "expected", 1 / 6)
