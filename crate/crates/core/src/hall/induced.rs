use std::sync::Arc;

use num_bigint::BigInt;

use super::basis::{HallBasis, Shape};
use super::collect::NilpotentElement;
use crate::error::{Error, Result};
use crate::freegroup::Endomorphism;
use crate::intlinalg::IntegerMatrix;

/// A homomorphism of free groups pushed down to class-`n` quotients.
#[derive(Debug, Clone)]
pub struct InducedMap {
    domain: Arc<HallBasis>,
    codomain: Arc<HallBasis>,
    /// Image of every domain basis entry, not only the generators.
    entry_images: Vec<NilpotentElement>,
    graded: Vec<IntegerMatrix>,
}

impl InducedMap {
    pub fn new(f: &Endomorphism, domain: &Arc<HallBasis>, codomain: &Arc<HallBasis>) -> Result<Self> {
        if f.domain_rank() != domain.rank() {
            return Err(Error::RankMismatch {
                expected: domain.rank(),
                found: f.domain_rank(),
            });
        }
        if f.codomain_rank() != codomain.rank() {
            return Err(Error::RankMismatch {
                expected: codomain.rank(),
                found: f.codomain_rank(),
            });
        }
        if domain.class() != codomain.class() {
            return Err(Error::BasisMismatch);
        }
        let mut entry_images: Vec<NilpotentElement> = Vec::with_capacity(domain.len());
        for i in 0..domain.len() {
            let img = match domain.commutator(i).shape {
                Shape::Generator(g) => NilpotentElement::collect(f.image(g), codomain)?,
                Shape::Bracket { left, right } => entry_images[left].commutator(&entry_images[right])?,
            };
            entry_images.push(img);
        }
        let graded = (1..=domain.class())
            .map(|w| {
                let rows = codomain.weight_range(w);
                let cols = domain.weight_range(w);
                IntegerMatrix::from_fn(rows.len(), cols.len(), |r, c| {
                    entry_images[cols.start + c].exponents()[rows.start + r].clone()
                })
            })
            .collect();
        Ok(InducedMap {
            domain: domain.clone(),
            codomain: codomain.clone(),
            entry_images,
            graded,
        })
    }

    /// Same-rank convenience: one basis for both sides.
    pub fn endomorphism(f: &Endomorphism, basis: &Arc<HallBasis>) -> Result<Self> {
        Self::new(f, basis, basis)
    }

    pub fn domain(&self) -> &Arc<HallBasis> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<HallBasis> {
        &self.codomain
    }

    /// Images of the domain generators.
    pub fn images(&self) -> &[NilpotentElement] {
        &self.entry_images[..self.domain.rank()]
    }

    pub fn entry_image(&self, i: usize) -> &NilpotentElement {
        &self.entry_images[i]
    }

    /// Weight-`w` exponents of the images of the weight-`w` domain entries, one column each.
    pub fn graded_matrix(&self, w: u32) -> &IntegerMatrix {
        &self.graded[(w - 1) as usize]
    }

    pub fn apply(&self, x: &NilpotentElement) -> Result<NilpotentElement> {
        if **x.basis() != *self.domain {
            return Err(Error::BasisMismatch);
        }
        let mut out = NilpotentElement::identity(&self.codomain);
        for (i, e) in x.exponents().iter().enumerate() {
            if *e != BigInt::from(0) {
                out = out.mul(&self.entry_images[i].pow(e))?;
            }
        }
        Ok(out)
    }
}
