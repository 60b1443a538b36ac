//! Return maps of symmetric periodic orbits of reversible Hamiltonian
//! systems: shooting from the fixed set of the involution, the variational
//! equation along the orbit, and reduction to a `ρ`-adapted symplectic
//! section.

pub mod integrate;
pub mod section;
pub mod shooting;
pub mod systems;

pub use integrate::{integrate_with_variations, Flow};
pub use section::{build_transverse_section, reduced_monodromy, TransverseSection};
pub use shooting::{estimate_half_period, find_symmetric_orbit, SymmetricOrbit};
pub use systems::{parse_seed_point, parse_system_spec, AnisotropicOscillator, HamiltonianSystem, HenonHeiles};

use crate::darwin::ReturnMapBlocks;
use crate::error::Result;
use crate::linalg::Vector;

/// Search window and grid used when no half-period guess is given.
pub const HALF_PERIOD_SEARCH: (f64, f64) = (50.0, 0.02);

#[derive(Debug, Clone)]
pub struct OrbitAnalysis {
    pub orbit: SymmetricOrbit,
    pub section: TransverseSection,
    pub blocks: ReturnMapBlocks,
}

/// Orbit search, section and reduction in one go.
pub fn analyze_orbit(
    sys: &dyn HamiltonianSystem,
    seed: &Vector,
    half_period_guess: Option<f64>,
    tol: f64,
) -> Result<OrbitAnalysis> {
    let guess = match half_period_guess {
        Some(t) => t,
        None => estimate_half_period(sys, seed, HALF_PERIOD_SEARCH.0, HALF_PERIOD_SEARCH.1, tol)?,
    };
    let orbit = find_symmetric_orbit(sys, seed, guess, tol)?;
    let section = build_transverse_section(sys, &orbit)?;
    let blocks = reduced_monodromy(sys, &orbit, &section, tol)?;
    Ok(OrbitAnalysis { orbit, section, blocks })
}
