//! Scale sequences, exceptional-point measures and the closed-form
//! objects attached to them.

mod gamma_tail;
mod measure;
mod mu_tilde;
mod qseq;
mod resample;
mod scales;

pub use gamma_tail::*;
pub use measure::*;
pub use mu_tilde::*;
pub use qseq::*;
pub use resample::*;
pub use scales::*;
