//! Staggered 1D grid along z and per-node material sampling.

use serde::{Deserialize, Serialize};

use crate::error::{HopfieldError, Result};
use crate::media::{LayeredGeometry, MediumParams};

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 16;

/// Where a component lives: integer nodes z_j or half nodes z_{j+½}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stagger {
    Integer,
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Boundary {
    /// Tangential electric field vanishes at both walls.
    #[default]
    Pec,
}

/// Uniform grid on [z_min, z_min + N·h].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n: usize,
    pub h: f64,
    pub z_min: f64,
    pub boundary: Boundary,
}

impl Grid1D {
    /// N cells spanning the box of `geom`.
    pub fn for_geometry(geom: &LayeredGeometry, n: usize) -> Result<Self> {
        Self::new(n, geom.lz(), -0.5 * geom.lz())
    }

    pub fn new(n: usize, lz: f64, z_min: f64) -> Result<Self> {
        if n < MIN_CELLS {
            return Err(HopfieldError::InvalidInput(format!(
                "grid needs at least {MIN_CELLS} cells, got {n}"
            )));
        }
        if !(lz > 0.0 && lz.is_finite() && z_min.is_finite()) {
            return Err(HopfieldError::InvalidInput(format!("invalid box length {lz}")));
        }
        Ok(Self {
            n,
            h: lz / n as f64,
            z_min,
            boundary: Boundary::Pec,
        })
    }

    pub fn lz(&self) -> f64 {
        self.h * self.n as f64
    }

    /// z of node j (integer) or j + ½ (half).
    pub fn z(&self, stagger: Stagger, j: usize) -> f64 {
        match stagger {
            Stagger::Integer => self.z_min + j as f64 * self.h,
            Stagger::Half => self.z_min + (j as f64 + 0.5) * self.h,
        }
    }
}

/// A matter oscillator attached to a node, scaled by the fraction of the
/// node's dual cell it fills.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeOscillator {
    pub medium: MediumParams,
    pub fraction: f64,
}

impl NodeOscillator {
    pub fn rho(&self) -> f64 {
        self.fraction * self.medium.rho
    }

    pub fn kappa(&self) -> f64 {
        self.fraction * self.medium.kappa
    }

    /// Coefficient of X² in the potential: ρ'ω_T² + κ'².
    pub fn stiffness(&self) -> f64 {
        self.rho() * self.medium.omega_t.powi(2) + self.kappa().powi(2)
    }
}

/// Material content of every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialMap {
    pub integer: Vec<Vec<NodeOscillator>>,
    pub half: Vec<Vec<NodeOscillator>>,
}

impl MaterialMap {
    /// Samples `geom` on `grid`. Layer boundaries must fall on integer
    /// nodes; a boundary node takes half of its dual cell from each side.
    pub fn sample(geom: &LayeredGeometry, grid: &Grid1D) -> Result<Self> {
        let h = grid.h;
        for layer in geom.layers() {
            for z in [layer.z_min, layer.z_max] {
                let s = (z - grid.z_min) / h;
                if (s - s.round()).abs() > 1e-9 * (1.0 + s.abs()) {
                    return Err(HopfieldError::InvalidGeometry(format!(
                        "layer boundary z = {z} is not on the grid (h = {h})"
                    )));
                }
            }
        }
        let locate = |z: f64| geom.medium_at(z).copied();
        let half = (0..grid.n)
            .map(|j| {
                locate(grid.z(Stagger::Half, j))
                    .map(|medium| NodeOscillator {
                        medium,
                        fraction: 1.0,
                    })
                    .into_iter()
                    .collect()
            })
            .collect();
        let integer = (0..=grid.n)
            .map(|j| {
                let z = grid.z(Stagger::Integer, j);
                let below = locate(z - 0.25 * h);
                let above = locate(z + 0.25 * h);
                let mut osc: Vec<NodeOscillator> = Vec::new();
                for m in [below, above].into_iter().flatten() {
                    if let Some(o) = osc.iter_mut().find(|o| o.medium == m) {
                        o.fraction += 0.5;
                    } else {
                        osc.push(NodeOscillator {
                            medium: m,
                            fraction: 0.5,
                        });
                    }
                }
                osc
            })
            .collect();
        Ok(Self { integer, half })
    }

    /// Largest ω_L among all media (1 for an empty box).
    pub fn omega_scale(&self) -> f64 {
        self.half
            .iter()
            .chain(&self.integer)
            .flatten()
            .map(|o| o.medium.omega_l())
            .fold(1.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interface_node_is_split() {
        let geom = LayeredGeometry::interface(MediumParams::reference(), 4.0, 1.0);
        let grid = Grid1D::for_geometry(&geom, 16).unwrap();
        let map = MaterialMap::sample(&geom, &grid).unwrap();
        assert_eq!(map.integer[8].len(), 1);
        assert_eq!(map.integer[8][0].fraction, 0.5);
        assert_eq!(map.integer[7][0].fraction, 1.0);
        assert!(map.integer[9].is_empty());
        assert!(map.half[7].len() == 1 && map.half[8].is_empty());
    }

    #[test]
    fn misaligned_interface_is_rejected() {
        let geom = LayeredGeometry::interface(MediumParams::reference(), 4.0, 1.0);
        assert!(MaterialMap::sample(&geom, &Grid1D::for_geometry(&geom, 17).unwrap()).is_err());
    }

    #[test]
    fn tiny_grids_are_rejected() {
        assert!(Grid1D::new(8, 1.0, 0.0).is_err());
    }
}
