use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

use hivelab_py::hivelab_py;

/// Runs `python/smoke_test.py` in an embedded interpreter with the module
/// registered as a builtin.
#[test]
fn smoke_script_runs_embedded() {
    pyo3::append_to_inittab!(hivelab_py);
    Python::initialize();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/python/smoke_test.py");
    let code = CString::new(std::fs::read_to_string(path).unwrap()).unwrap();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("__name__", "__main__").unwrap();
        globals.set_item("__file__", path).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("smoke script failed");
        }
    });
}
