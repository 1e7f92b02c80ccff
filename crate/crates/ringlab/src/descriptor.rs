//! Ring descriptors: the tree shape of every ring the lab can build.

use crate::error::RingError;
use crate::group::GroupTable;
use std::sync::Arc;

/// How a ring is built from base rings and constructors.
///
/// `Product` is semantically associative; the DSL parses `A x B x C`
/// left-associated, so canonical descriptor trees never carry a product
/// in their right operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingDescriptor {
    /// Integers modulo `n`, `n >= 2`.
    Zn(u64),
    /// The ring of integers (symbolic, infinite).
    Integers,
    /// Direct product with componentwise operations.
    Product(Box<RingDescriptor>, Box<RingDescriptor>),
    /// Full `k x k` matrix ring over the inner ring, `1 <= k <= 4`.
    Matrix(usize, Box<RingDescriptor>),
    /// Upper triangular `k x k` matrix ring, `1 <= k <= 4`.
    Triangular(usize, Box<RingDescriptor>),
    /// Group ring over a finite group given by its Cayley table.
    GroupRing(Box<RingDescriptor>, Arc<GroupTable>),
    /// `Z_n[t]` modulo a monic polynomial, coefficients low-to-high with
    /// leading coefficient 1.
    PolyQuotient(u64, Vec<u64>),
    /// The polynomial ring `Z_n[t]` (symbolic, infinite).
    Poly(u64),
}

impl RingDescriptor {
    /// Checks the structural invariants: modulus bounds, matrix sizes,
    /// monic modulus, and that symbolic rings appear only at top level.
    pub fn validate(&self) -> Result<(), RingError> {
        self.validate_inner(true)
    }

    fn validate_inner(&self, top: bool) -> Result<(), RingError> {
        match self {
            RingDescriptor::Zn(n) => {
                if *n < 2 {
                    return Err(RingError::InvalidDescriptor(format!(
                        "Z{n}: modulus must be at least 2"
                    )));
                }
            }
            RingDescriptor::Integers => {
                if !top {
                    return Err(RingError::InvalidDescriptor(
                        "ZZ cannot be nested inside another constructor".into(),
                    ));
                }
            }
            RingDescriptor::Poly(n) => {
                if *n < 2 {
                    return Err(RingError::InvalidDescriptor(format!(
                        "POLY(Z{n}): modulus must be at least 2"
                    )));
                }
                if !top {
                    return Err(RingError::InvalidDescriptor(
                        "POLY(..) cannot be nested inside another constructor".into(),
                    ));
                }
            }
            RingDescriptor::Product(a, b) => {
                // Symbolic factors would make the product non-enumerable and
                // give elements a mixed coordinate shape; the lab keeps the
                // two symbolic rings at top level only.
                a.validate_inner(false)?;
                b.validate_inner(false)?;
            }
            RingDescriptor::Matrix(k, inner) | RingDescriptor::Triangular(k, inner) => {
                if *k < 1 || *k > 4 {
                    return Err(RingError::InvalidDescriptor(format!(
                        "matrix size {k} out of range 1..=4"
                    )));
                }
                inner.validate_inner(false)?;
            }
            RingDescriptor::GroupRing(inner, group) => {
                group.validate().map_err(RingError::InvalidDescriptor)?;
                inner.validate_inner(false)?;
            }
            RingDescriptor::PolyQuotient(n, modulus) => {
                if *n < 2 {
                    return Err(RingError::InvalidDescriptor(format!(
                        "Q(Z{n},..): modulus must be at least 2"
                    )));
                }
                if modulus.len() < 2 {
                    return Err(RingError::InvalidDescriptor(
                        "polynomial modulus must have degree at least 1".into(),
                    ));
                }
                if modulus.last().copied().map(|c| c % n) != Some(1) {
                    return Err(RingError::InvalidDescriptor(
                        "polynomial modulus must be monic".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// True for the two symbolic (infinite) base rings.
    pub fn is_symbolic(&self) -> bool {
        matches!(self, RingDescriptor::Integers | RingDescriptor::Poly(_))
    }
}
