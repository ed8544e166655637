use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Volume of the `n`-ball of radius `r`: π^(n/2) / Γ(n/2 + 1) · rⁿ.
pub fn hypersphere_volume(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param(format!("radius must be positive, got {r}")));
    }
    let half = n as f64 / 2.0;
    Ok(PI.powf(half) / gamma(half + 1.0) * r.powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_disk_and_ball() {
        assert!((hypersphere_volume(2, 1.0).unwrap() - PI).abs() < 1e-12);
        assert!((hypersphere_volume(3, 1.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((hypersphere_volume(1, 0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn high_dimensions_vanish() {
        let v = hypersphere_volume(16, 0.5).unwrap();
        assert!((v - 3.5908e-6).abs() < 1e-9, "{v}");
        for r in [0.3, 0.45, 0.5] {
            for n in 2..=40 {
                assert!(hypersphere_volume(n, r).unwrap() < hypersphere_volume(n - 1, r).unwrap());
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(hypersphere_volume(0, 1.0).is_err());
        assert!(hypersphere_volume(2, 0.0).is_err());
    }
}
