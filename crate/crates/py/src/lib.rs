use pyo3::prelude::*;

#[pymodule]
fn rirs_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
