//! Simulation library for Fourier-based period finding, amplitude
//! amplification and coined quantum-walk search, with operation counters
//! for comparing their costs against classical baselines.

pub mod error;
pub mod fit;
pub mod grover;
pub mod qft;
pub mod register;
pub mod rng;
pub mod shor;
pub mod walk;

pub use error::{Error, Result};
pub use register::{Amplitude, MeasurementOutcome, OpCounts, QuantumRegister, SingleQubitGate};
pub use fit::{CostUnit, FitResult, ScalingRecord};
pub use walk::{Coin, Lattice, Shift};
