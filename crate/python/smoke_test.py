"""Smoke test for the thetabody extension module."""

import math

import thetabody
from thetabody import ThetaBody

pentagon = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]

th1 = ThetaBody.stable_set(5, pentagon, 1)
value, x = th1.maximize([1.0] * 5)
assert abs(value - math.sqrt(5)) < 1e-6, value
assert all(abs(xi - 1 / math.sqrt(5)) < 1e-6 for xi in x)

th2 = ThetaBody.stable_set(5, pentagon, 2)
value, _ = th2.maximize([1.0] * 5)
assert abs(value - 2.0) < 1e-6, value

cert = th1.certify([1, 1, 0, 0, 0], 1)
assert cert.verified and cert.exact, cert
assert not th1.certify([1] * 5, 2).verified

cardioid = "x1^4 + 2*x1^2*x2^2 + x2^4 + 4*x1^3 + 4*x1*x2^2 - 4*x2^2"
assert ThetaBody.curve(cardioid, 1).ray_shoot([1.0, 0.0]) == math.inf
body = ThetaBody.curve(cardioid, 2)
trace = body.trace(16)
assert len(trace) == 16 and all(t is not None for _, t, _ in trace)
assert body.contains([-2.0, 0.0]) and not body.contains([1.0, 3.0])

cube = [[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)]
report = thetabody.level_report(cube)
assert report["is_2_level"] and len(report["facets"]) == 6

half = ThetaBody.points([["0", "0"], ["1/2", "0"], ["0", "1/2"], ["1/2", "1/2"]], 1)
assert abs(half.maximize([1.0, 1.0])[0] - 1.0) < 1e-6

try:
    ThetaBody.stable_set(2, [(0, 5)], 1)
except ValueError:
    pass
else:
    raise AssertionError("bad edge accepted")

print(repr(th1), repr(cert))
print("smoke test passed")
