//! Computational toolkit for delta-rings, Witt vectors, prismatic envelopes,
//! crystals and their comparison complexes over Z_p at bounded precision.

pub mod cohomology;
pub mod cosimplicial;
pub mod crystals;
pub mod delta;
pub mod envelope;
pub mod error;
pub mod laurent;
pub mod linalg;
pub mod pd;
pub mod random;
pub mod ring;
pub mod scalar;
pub mod text;
pub mod universal;
pub mod witt;

pub use delta::DeltaStructure;
pub use error::{Error, Result};
pub use laurent::LaurentPoly;
pub use pd::{PdAssignment, PdPoly, Truncation};
pub use ring::{Mat, PadicRing, Ring};
pub use scalar::{Modulus, PadicScalar};
pub use witt::WittVec;
