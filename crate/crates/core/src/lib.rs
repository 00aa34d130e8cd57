//! Gapped K-theoretic invariants of concretely represented operator systems.
//!
//! Elements live as dense complex matrices ([`linalg::CMatrix`]). On top of
//! that substrate the crate provides
//!
//! * [`gap`]: bordered matrices, the doubled spectrum `Sigma_x`, delta-gap
//!   certificates and s-gaps;
//! * [`clifford`]: matrix models of complex Clifford algebras, the odd-part
//!   embeddings and their periodicity reductions;
//! * [`homotopy`]: sampled path certification, stabilization, direct sums,
//!   contraction of invertibles and Grothendieck-class witnesses;
//! * [`localizer`]: spectral triples, generalized and reduced spectral
//!   localizers, the constancy region and the integer index;
//! * [`models`]: the truncated circle, Toeplitz compressions and seeded random
//!   gapped elements.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clifford;
pub mod error;
pub mod gap;
pub mod homotopy;
pub mod linalg;
pub mod localizer;
pub mod models;

pub use error::{Error, Result};
pub use gap::{CheckMode, GapCertificate, OperatorElement};
pub use linalg::{CMatrix, Inertia, TolerancePolicy, C64};
pub use localizer::{LocalizerReport, Parity, SpectralTriple};

/// Serializes non-finite reals as the strings `"inf"` / `"-inf"`.
pub mod serde_inf {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Str(s) => Err(D::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}
