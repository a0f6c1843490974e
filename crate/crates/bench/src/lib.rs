//! Fixtures shared by the benchmarks.

use hopfield_core::modes::PolaritonMode;
use hopfield_core::{LayeredGeometry, MediumParams, ModeClass, ModeIndex};

pub fn reference_interface(lz: f64, area: f64) -> LayeredGeometry {
    LayeredGeometry::interface(MediumParams::reference(), lz, area)
}

/// Counter-propagating surface pair plus a normal-incidence photon.
pub fn three_wave_modes(geom: &LayeredGeometry) -> [PolaritonMode; 3] {
    let build = |idx: ModeIndex| PolaritonMode::build(geom, &idx).expect("fixture mode");
    [
        build(ModeIndex::surface([2.0, 0.0])),
        build(ModeIndex::surface([-2.0, 0.0])),
        build(ModeIndex::new(ModeClass::TMv, [0.0, 0.0], Some(0.5)).expect("fixture index")),
    ]
}
