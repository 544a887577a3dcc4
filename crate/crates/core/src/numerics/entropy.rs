use super::NumericsError;

/// Binary Shannon entropy H₂(x) in bits, with H₂(0) = H₂(1) = 0.
pub fn binary_entropy(x: f64) -> Result<f64, NumericsError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(NumericsError::Domain { what: "binary_entropy argument", value: x });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}
