"""Compare the derivative and difference routes of the conformal operator.

For each s and sample point, prints both routes' values against the closed
form (2 pi y)^(2s) e_(-s)(g, y) at several outer quadrature tolerances.

Usage: python3 scripts/conformal_routes.py [s ...]
"""
import math
import sys
import time

from intertwine.fracops import conformal_apply
from intertwine.htype import GroupPoint, structure_for
from intertwine.kernels import FracOrder, fundsol_closed
from intertwine.quad import QuadratureSpec

H1 = structure_for(2, 1)
POINTS = [(GroupPoint([0.0, 0.0], [0.0]), 1.0), (GroupPoint([1.0, 0.0], [0.2]), 0.8)]
INNER = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-18, tail_cut=1e-12)


def main(orders):
    print("s,z,sigma,y,rel_tol,method,value,closed,rel_err,seconds")
    for s in orders:
        for g, y in POINTS:
            closed = (2 * math.pi * y) ** (2 * s) * fundsol_closed(H1, FracOrder.minus(s), g, y)
            for rel in (1e-3, 1e-4, 1e-5, 1e-6):
                outer = QuadratureSpec(rel_tol=rel, abs_tol=1e-16, tail_cut=1e-10)
                for method in ("derivative", "difference"):
                    t0 = time.perf_counter()
                    v = conformal_apply(H1, s, g, y, outer, method=method, inner_spec=INNER, tol=1e-3)
                    print(f"{s},{g.z[0]};{g.z[1]},{g.sigma[0]},{y},{rel:g},{method},{v!r},{closed!r},"
                          f"{abs(v / closed - 1):.3e},{time.perf_counter() - t0:.2f}", flush=True)


if __name__ == "__main__":
    main([float(a) for a in sys.argv[1:]] or [0.3, 0.5, 0.7])
