//! Steady solitary water waves on shear flows in height-function form.

pub mod numerics;
pub mod shear;
pub mod verdict;
pub mod banded;
pub mod sturm;
pub mod wavesolve;
pub mod diagnostics;
pub mod waveio;
pub mod cli;
