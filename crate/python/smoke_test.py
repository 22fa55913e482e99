"""Smoke test for the compiled extension: run after `maturin develop` or installing the wheel."""

import math

import fermat_chabauty as fc

phi = fc.AngleSpec.golden()
assert str(phi) == "quad:1,1,2,5"
assert abs(float(phi) - (1 + 5 ** 0.5) / 2) < 1e-15

cs = fc.convergents(phi, 10)
assert [q for (_, _, _, q) in cs] == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]
big = fc.convergents(phi, 120)[-1][3]
assert isinstance(big, int) and big.bit_length() > 64

residual, negative = fc.verify_cf_identities(phi, 1, 40)
assert residual < 2.0 ** -80 and negative

beta, c, ctilde = fc.triplet(phi, 40)
assert abs(beta - phi.__float__()) < 1e-8
assert abs(abs(c) - 1 / 5 ** 0.5) < 1e-6 and c * ctilde < 0

v, vt = fc.predicted_basis(*fc.limit_triplet(phi, 1))
assert abs(v[1] - 1.4049629) < 1e-6 and abs(vt[1] + 0.8683149) < 1e-6
assert abs(fc.covolume(v, vt) - math.pi) < 1e-12

spiral = fc.Spiral(phi)
x, y, err = spiral.point(5)
assert abs(x - 1.886694) < 1e-6 and abs(y - 1.200160) < 1e-6 and err < 1e-12
m, offset, dist = spiral.nearest_neighbor(10_000)
assert abs(offset) in {q for (_, _, _, q) in fc.convergents(phi, 40)}

(j, n), = fc.center_indices(phi, 9, 9)
assert (j, n) == (9, 289)
patch, indices = spiral.patch(11_441_306, 8.0)
assert len(patch) == len(indices) > 40
f1, f2, residual, cov = fc.fit_lattice(patch)
assert abs(cov - math.pi) < 0.05
sums, inverses, violations = fc.group_closure(patch)
assert violations == 0 and sums > 0

report = fc.empirical_vs_predicted(phi, 16, 20)
assert report["verdict"] == "proof_form"
assert float(report["rows"][-1]["proof_form"]["value"]) < 0.1

witness = fc.empty_rectangle(phi, 2000.0, 0.2, 20.0)
assert witness is not None and float(witness["probe"]["length"]) == 20.0

a = fc.lattice_ball(v, vt, 30.0)
b = fc.lattice_ball(v, vt, 30.0).rotated(0.5)
assert 0.0 < fc.chabauty_distance(a, b) <= 1.0

try:
    fc.AngleSpec("rat:1/0")
except ValueError:
    pass
else:
    raise AssertionError("zero denominator accepted")

try:
    fc.convergents(fc.AngleSpec("dec:1.5@64"), 5)
except fc.PrecisionExhausted:
    pass
else:
    raise AssertionError("uncertifiable quotient accepted")

assert fc.density_ratio(100.0) == 1.0
print("python smoke test passed")
