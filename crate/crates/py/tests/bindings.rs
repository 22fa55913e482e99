use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyModule;

fn run(code: &str) -> PyResult<()> {
    Python::attach(|py| {
        let m = PyModule::new(py, "fermat_chabauty")?;
        fermat_chabauty_py::register(&m)?;
        let globals = pyo3::types::PyDict::new(py);
        globals.set_item("fc", m)?;
        py.run(&CString::new(code).unwrap(), Some(&globals), None)
    })
}

#[test]
fn convergents_and_prediction() {
    run(r#"
phi = fc.AngleSpec.golden()
assert [q for (_, _, _, q) in fc.convergents(phi, 10)][-1] == 55
v, vt = fc.predicted_basis(*fc.limit_triplet(phi, 1))
assert abs(v[1] - 1.4049629) < 1e-6
assert abs(fc.covolume(v, vt) - 3.141592653589793) < 1e-12
"#)
    .unwrap();
}

#[test]
fn spiral_patch_fits_a_lattice() {
    run(r#"
s = fc.Spiral(fc.AngleSpec("quad:1,1,2,5"))
(j, n), = fc.center_indices(fc.AngleSpec.golden(), 20, 20)
p, idx = s.patch(n, 8.0)
v1, v2, residual, cov = fc.fit_lattice(p)
assert abs(cov - 3.141592653589793) < 0.05 and residual < 0.05
assert fc.group_closure(p)[2] == 0
"#)
    .unwrap();
}

#[test]
fn errors_map_to_exceptions() {
    run(r#"
try:
    fc.convergents(fc.AngleSpec("dec:1.5@64"), 5)
    raise AssertionError("no error")
except fc.PrecisionExhausted:
    pass
try:
    fc.fit_lattice(fc.Patch([(0.0, 0.0), (0.3, 0.1)], 8.0))
    raise AssertionError("no error")
except (fc.NotALattice, ValueError):
    pass
"#)
    .unwrap();
}
