//! Computable semi-Fredholm theory on standard modules over
//! finite-dimensional C*-algebras `A = ⊕ M_{n_i}(C)`.
//!
//! The crate classifies shift-type operators on the standard module `H_A`
//! into the semi-Fredholm and semi-Weyl classes, computes K0-valued indices
//! as integer dimension vectors, provides the catalog of example operators
//! these classes are usually illustrated with, and ships an executable suite
//! per theorem so the classification laws can be regression-tested at desk
//! scale.

pub mod algebra;
pub mod constructions;
pub mod dense;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod module;
pub mod oracle;
pub mod spectra;
pub mod symbolic;

pub use algebra::{
    central_basis, default_signature, regular_representation_dim, AlgebraElement,
    AlgebraSignature, DimensionVector, IndexValue,
};

#[cfg(test)]
pub(crate) mod testsupport {
    use crate::algebra::{AlgebraElement, AlgebraSignature};
    use crate::dense::DenseOperator;
    use crate::linalg::C64;
    use nalgebra::DMatrix;
    use rand::Rng;

    pub fn random_element(sig: &AlgebraSignature, rng: &mut impl Rng) -> AlgebraElement {
        let blocks = sig
            .blocks()
            .iter()
            .map(|&n| {
                DMatrix::from_fn(n, n, |_, _| {
                    C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                })
            })
            .collect();
        AlgebraElement::from_blocks(sig, blocks).unwrap()
    }


    pub fn random_operator(
        sig: &AlgebraSignature,
        domain: usize,
        codomain: usize,
        rng: &mut impl Rng,
    ) -> DenseOperator {
        let entries = (0..codomain)
            .map(|_| (0..domain).map(|_| random_element(sig, rng)).collect())
            .collect();
        DenseOperator::from_entries(sig, domain, codomain, entries).unwrap()
    }
}
pub use dense::DenseOperator;
pub use error::{MphiError, Result};
pub use linalg::Tolerances;
pub use module::{dixmier_angle, span_submodule, ModuleVector, Submodule};
pub use symbolic::{ClassificationReport, SymbolicOperator};
