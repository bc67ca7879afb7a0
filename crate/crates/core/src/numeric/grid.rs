//! Uniform 1-D grids and field snapshots.

use serde::Serialize;

use super::ode::Metadata;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    /// Zero flux through both ends.
    Reflecting,
    /// Ends held at their initial values.
    Dirichlet,
}

impl std::str::FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "reflecting" => Ok(Boundary::Reflecting),
            "dirichlet" => Ok(Boundary::Dirichlet),
            other => Err(format!("unknown boundary `{other}`")),
        }
    }
}

/// Field values on a uniform grid at a sequence of times.
///
/// For periodic and Dirichlet grids `x_i = x0 + i dx`; for reflecting
/// (finite-volume) grids the points are cell centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldGrid {
    pub field: String,
    pub x0: f64,
    pub dx: f64,
    pub points: usize,
    pub boundary: Boundary,
    pub dt: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    /// Conserved or monitored integrals, one value per snapshot.
    pub conserved: Vec<(String, Vec<f64>)>,
    /// Largest stable step for the scheme on this grid.
    pub stability_bound: f64,
    pub warnings: Vec<String>,
    pub meta: Metadata,
}

impl FieldGrid {
    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x0 + i as f64 * self.dx).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.snapshots.last().expect("grids hold at least the initial snapshot")
    }

    pub fn conserved(&self, name: &str) -> Option<&[f64]> {
        self.conserved
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Largest relative change of a monitored integral from its initial value.
    pub fn drift(&self, name: &str) -> Option<f64> {
        let v = self.conserved(name)?;
        let v0 = v[0];
        let scale = if v0.abs() > 0.0 { v0.abs() } else { 1.0 };
        Some(v.iter().map(|x| (x - v0).abs() / scale).fold(0.0, f64::max))
    }
}

/// Rectangle-rule integral over the grid.
pub fn integral(u: &[f64], dx: f64) -> f64 {
    u.iter().sum::<f64>() * dx
}

/// Uniform grid of `n` points starting at `x0`.
pub fn linspace_periodic(x0: f64, length: f64, n: usize) -> (Vec<f64>, f64) {
    let dx = length / n as f64;
    ((0..n).map(|i| x0 + i as f64 * dx).collect(), dx)
}
