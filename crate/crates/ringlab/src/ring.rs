//! Core ring machinery: exact element arithmetic over every carrier the lab
//! builds, canonical enumeration, unit search, censuses and centers.
//!
//! Finite carriers store elements as mixed-radix coordinate vectors; the
//! coordinate moduli determine the additive group and the canonical
//! lexicographic enumeration order. Multiplication is structural per
//! constructor. The two symbolic carriers (the integers and `Z_n[t]`)
//! carry their own payloads and are never enumerated.

use crate::descriptor::RingDescriptor;
use crate::error::RingError;
use crate::group::GroupTable;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::{Arc, Mutex, OnceLock, Weak};

/// Default bound on exhaustive element enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 20_000;

/// Rings up to this many elements get a memoized multiplication table;
/// larger rings compute products row-on-demand.
pub const MUL_TABLE_CAP: usize = 4096;

pub type RingRef = Arc<Ring>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Finite(u128),
    Infinite,
}

impl Cardinality {
    pub fn as_finite(&self) -> Option<u128> {
        match self {
            Cardinality::Finite(n) => Some(*n),
            Cardinality::Infinite => None,
        }
    }
}

#[derive(Debug)]
pub(crate) enum RingKind {
    Zn(u64),
    Integers,
    Product(RingRef, RingRef),
    Matrix {
        size: usize,
        inner: RingRef,
        triangular: bool,
    },
    GroupRing {
        inner: RingRef,
        group: Arc<GroupTable>,
    },
    PolyQuotient {
        n: u64,
        /// Monic modulus, low-to-high, length degree + 1, reduced mod `n`.
        modulus: Vec<u64>,
    },
    Poly(u64),
    /// Coset ring of a finite base by a verified two-sided ideal. Elements
    /// are coset indices; `reps` maps a coset to its order-minimal base
    /// representative and `coset_of` maps base indices to cosets.
    Quotient {
        base: RingRef,
        reps: Vec<usize>,
        rep_coords: Vec<Vec<u64>>,
        coset_of: Vec<u32>,
    },
}

/// The coordinates of one ring element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    /// Mixed-radix coordinates of a finite-carrier element.
    Finite(Vec<u64>),
    /// An integer of the symbolic ring `ZZ`.
    Int(BigInt),
    /// Coefficients of a `Z_n[t]` element, low-to-high, trailing zeros trimmed.
    Poly(Vec<u64>),
}

/// An element of a specific ring. Elements are immutable and only combine
/// with elements of the same ring.
#[derive(Debug, Clone)]
pub struct Element {
    pub(crate) owner: RingRef,
    pub(crate) payload: Payload,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.owner.same_ring(&other.owner) && self.payload == other.payload
    }
}

impl Eq for Element {}

impl Element {
    pub fn owner(&self) -> &RingRef {
        &self.owner
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    /// Coordinate vector of a finite-carrier element.
    pub fn coords(&self) -> Option<&[u64]> {
        match &self.payload {
            Payload::Finite(c) => Some(c),
            _ => None,
        }
    }
}

struct Caches {
    mul_table: OnceLock<Option<Vec<u16>>>,
    units: OnceLock<UnitsData>,
    walks: OnceLock<Vec<PowerWalk>>,
    center: OnceLock<Vec<bool>>,
    sumsets: Mutex<Vec<(SumsetKey, Arc<Vec<Vec<bool>>>)>>,
}

impl std::fmt::Debug for Caches {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Caches{..}")
    }
}

#[derive(Debug, Clone)]
pub(crate) struct UnitsData {
    pub is_unit: Vec<bool>,
    /// Index of the two-sided inverse for units, `u32::MAX` otherwise.
    pub inverse: Vec<u32>,
    pub count: u64,
}

/// Raw power-walk record for one element of a finite ring: the sequence
/// x, x^2, ... up to its first repeated value.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PowerWalk {
    /// First exponent whose power repeats later (the orbit index).
    pub index: u32,
    /// Distance to the repeat (the orbit period).
    pub period: u32,
    /// Element index of x^index (the cycle entry value).
    pub entry: u32,
    /// Least exponent e with x^e = 1, or 0 when the walk never meets 1.
    pub ord_one: u32,
    /// Least exponent q >= 2 with x^q = x, or 0 when there is none.
    pub potent_q: u32,
}

pub(crate) type SumsetKey = (u8, u64);

/// An exactly represented ring: a finite carrier built from a descriptor,
/// a coset ring of one, or one of the two symbolic carriers.
#[derive(Debug)]
pub struct Ring {
    pub(crate) kind: RingKind,
    descriptor: Option<RingDescriptor>,
    label: String,
    /// Coordinate moduli; the canonical enumeration is lexicographic over
    /// these digits. Empty for symbolic carriers.
    pub(crate) moduli: Vec<u64>,
    cardinality: Cardinality,
    characteristic: u64,
    commutative: bool,
    cap: u64,
    self_ref: Weak<Ring>,
    caches: Caches,
}

fn addmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

impl Ring {
    /// Builds the ring described by `d` with the default enumeration cap.
    pub fn construct(d: &RingDescriptor) -> Result<RingRef, RingError> {
        Self::construct_with_cap(d, DEFAULT_ENUMERATION_CAP)
    }

    /// Builds the ring described by `d` with an explicit enumeration cap.
    pub fn construct_with_cap(d: &RingDescriptor, cap: u64) -> Result<RingRef, RingError> {
        d.validate()?;
        Ok(Self::build(d, cap))
    }

    fn build(d: &RingDescriptor, cap: u64) -> RingRef {
        let kind = match d {
            RingDescriptor::Zn(n) => RingKind::Zn(*n),
            RingDescriptor::Integers => RingKind::Integers,
            RingDescriptor::Product(a, b) => {
                RingKind::Product(Self::build(a, cap), Self::build(b, cap))
            }
            RingDescriptor::Matrix(k, inner) => RingKind::Matrix {
                size: *k,
                inner: Self::build(inner, cap),
                triangular: false,
            },
            RingDescriptor::Triangular(k, inner) => RingKind::Matrix {
                size: *k,
                inner: Self::build(inner, cap),
                triangular: true,
            },
            RingDescriptor::GroupRing(inner, g) => RingKind::GroupRing {
                inner: Self::build(inner, cap),
                group: g.clone(),
            },
            RingDescriptor::PolyQuotient(n, modulus) => {
                let mut m: Vec<u64> = modulus.iter().map(|c| c % n).collect();
                let d = m.len() - 1;
                m[d] = 1;
                RingKind::PolyQuotient { n: *n, modulus: m }
            }
            RingDescriptor::Poly(n) => RingKind::Poly(*n),
        };
        Self::from_kind(kind, Some(d.clone()), canonical_label(d), cap)
    }

    fn from_kind(
        kind: RingKind,
        descriptor: Option<RingDescriptor>,
        label: String,
        cap: u64,
    ) -> RingRef {
        let moduli = kind_moduli(&kind);
        let cardinality = match &kind {
            RingKind::Integers | RingKind::Poly(_) => Cardinality::Infinite,
            _ => Cardinality::Finite(
                moduli
                    .iter()
                    .fold(1u128, |acc, &m| acc.saturating_mul(m as u128)),
            ),
        };
        let characteristic = kind_characteristic(&kind);
        let commutative = kind_commutative(&kind);
        Arc::new_cyclic(|w| Ring {
            kind,
            descriptor,
            label,
            moduli,
            cardinality,
            characteristic,
            commutative,
            cap,
            self_ref: w.clone(),
            caches: Caches {
                mul_table: OnceLock::new(),
                units: OnceLock::new(),
                walks: OnceLock::new(),
                center: OnceLock::new(),
                sumsets: Mutex::new(Vec::new()),
            },
        })
    }

    /// Builds the coset ring of `base` by the additive set `members`
    /// (given as a membership mask over base indices). The caller must
    /// have verified that the set is a two-sided ideal.
    pub(crate) fn quotient_ring(base: &RingRef, members: &[bool]) -> RingRef {
        let n = base.card_usize().expect("quotient base must be enumerable");
        assert_eq!(members.len(), n);
        let member_indices: Vec<usize> =
            (0..n).filter(|&i| members[i]).collect();
        let mut coset_of = vec![u32::MAX; n];
        let mut reps = Vec::new();
        let mut scratch = vec![0u64; base.moduli.len()];
        for i in 0..n {
            if coset_of[i] != u32::MAX {
                continue;
            }
            let c = reps.len() as u32;
            reps.push(i);
            let ic = base.coords_of(i);
            for &m in &member_indices {
                base.add_slice(&ic, &base.coords_of(m), &mut scratch);
                let j = base.index_of_coords(&scratch);
                debug_assert!(coset_of[j] == u32::MAX || coset_of[j] == c);
                coset_of[j] = c;
            }
        }
        let rep_coords: Vec<Vec<u64>> = reps.iter().map(|&i| base.coords_of(i)).collect();
        let label = if member_indices.len() <= 8 {
            format!(
                "{}/I[{}]",
                base.label,
                member_indices
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        } else {
            format!("{}/I[{} elements]", base.label, member_indices.len())
        };
        let cap = base.cap;
        let kind = RingKind::Quotient {
            base: base.clone(),
            reps,
            rep_coords,
            coset_of,
        };
        Self::from_kind(kind, None, label, cap)
    }

    pub fn ring_ref(&self) -> RingRef {
        self.self_ref.upgrade().expect("ring is always held by an Arc")
    }

    pub fn descriptor(&self) -> Option<&RingDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cardinality(&self) -> Cardinality {
        self.cardinality
    }

    /// Additive order of 1, or 0 for the symbolic integers.
    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn is_commutative(&self) -> bool {
        self.commutative
    }

    pub fn enumeration_cap(&self) -> u64 {
        self.cap
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.kind, RingKind::Integers | RingKind::Poly(_))
    }

    /// True when `other` is the same ring: same allocation, or the same
    /// canonical descriptor.
    pub fn same_ring(&self, other: &Ring) -> bool {
        std::ptr::eq(self, other)
            || (self.descriptor.is_some() && self.descriptor == other.descriptor)
    }

    /// Cardinality as usize when finite and within the enumeration cap.
    pub fn card_checked(&self) -> Result<usize, RingError> {
        match self.cardinality {
            Cardinality::Infinite => Err(RingError::InfiniteRing),
            Cardinality::Finite(n) if n > self.cap as u128 => Err(RingError::CapExceeded {
                cardinality: n,
                cap: self.cap,
            }),
            Cardinality::Finite(n) => Ok(n as usize),
        }
    }

    fn card_usize(&self) -> Option<usize> {
        self.cardinality
            .as_finite()
            .filter(|&n| n <= usize::MAX as u128)
            .map(|n| n as usize)
    }

    // ---- coordinate plumbing -------------------------------------------

    pub(crate) fn coords_of(&self, idx: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.moduli.len()];
        let mut rest = idx;
        for (pos, &m) in self.moduli.iter().enumerate().rev() {
            out[pos] = (rest % m as usize) as u64;
            rest /= m as usize;
        }
        out
    }

    pub(crate) fn index_of_coords(&self, coords: &[u64]) -> usize {
        let mut idx = 0usize;
        for (c, &m) in coords.iter().zip(&self.moduli) {
            idx = idx * m as usize + *c as usize;
        }
        idx
    }

    /// Element at position `idx` in the canonical enumeration order.
    pub fn element_at(&self, idx: usize) -> Element {
        Element {
            owner: self.ring_ref(),
            payload: Payload::Finite(self.coords_of(idx)),
        }
    }

    /// Position of a finite-carrier element in the canonical order.
    pub fn index_of(&self, e: &Element) -> usize {
        self.check_owner(e);
        match &e.payload {
            Payload::Finite(c) => self.index_of_coords(c),
            _ => panic!("index_of needs a finite-carrier element"),
        }
    }

    /// All elements in canonical lexicographic coordinate order; the first
    /// element is 0.
    pub fn elements(&self) -> Result<Vec<Element>, RingError> {
        let n = self.card_checked()?;
        Ok((0..n).map(|i| self.element_at(i)).collect())
    }

    fn check_owner(&self, e: &Element) {
        assert!(
            self.same_ring(&e.owner),
            "element of {} used in {}",
            e.owner.label,
            self.label
        );
    }

    // ---- slice arithmetic (finite carriers) ----------------------------

    pub(crate) fn add_slice(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        if let RingKind::Quotient {
            base,
            rep_coords,
            coset_of,
            ..
        } = &self.kind
        {
            let mut tmp = vec![0u64; base.moduli.len()];
            base.add_slice(&rep_coords[a[0] as usize], &rep_coords[b[0] as usize], &mut tmp);
            out[0] = coset_of[base.index_of_coords(&tmp)] as u64;
            return;
        }
        for i in 0..self.moduli.len() {
            out[i] = addmod(a[i], b[i], self.moduli[i]);
        }
    }

    pub(crate) fn neg_slice(&self, a: &[u64], out: &mut [u64]) {
        if let RingKind::Quotient {
            base,
            rep_coords,
            coset_of,
            ..
        } = &self.kind
        {
            let mut tmp = vec![0u64; base.moduli.len()];
            base.neg_slice(&rep_coords[a[0] as usize], &mut tmp);
            out[0] = coset_of[base.index_of_coords(&tmp)] as u64;
            return;
        }
        for i in 0..self.moduli.len() {
            out[i] = (self.moduli[i] - a[i]) % self.moduli[i];
        }
    }

    /// Coordinatewise integer scaling of the additive group.
    pub(crate) fn scale_slice(&self, k: u64, a: &[u64], out: &mut [u64]) {
        if let RingKind::Quotient {
            base,
            rep_coords,
            coset_of,
            ..
        } = &self.kind
        {
            let mut tmp = vec![0u64; base.moduli.len()];
            base.scale_slice(k, &rep_coords[a[0] as usize], &mut tmp);
            out[0] = coset_of[base.index_of_coords(&tmp)] as u64;
            return;
        }
        for i in 0..self.moduli.len() {
            out[i] = mulmod(k % self.moduli[i], a[i], self.moduli[i]);
        }
    }

    pub(crate) fn one_slice(&self, out: &mut [u64]) {
        out.fill(0);
        match &self.kind {
            RingKind::Zn(_) => out[0] = 1,
            RingKind::Product(l, r) => {
                let split = l.moduli.len();
                l.one_slice(&mut out[..split]);
                r.one_slice(&mut out[split..]);
            }
            RingKind::Matrix {
                size,
                inner,
                triangular,
            } => {
                let bl = inner.moduli.len();
                for i in 0..*size {
                    let pos = if *triangular {
                        tri_pos(*size, i, i)
                    } else {
                        i * size + i
                    };
                    inner.one_slice(&mut out[pos * bl..(pos + 1) * bl]);
                }
            }
            RingKind::GroupRing { inner, .. } => {
                let bl = inner.moduli.len();
                inner.one_slice(&mut out[..bl]);
            }
            RingKind::PolyQuotient { .. } => out[0] = 1,
            RingKind::Quotient { base, coset_of, .. } => {
                let mut tmp = vec![0u64; base.moduli.len()];
                base.one_slice(&mut tmp);
                out[0] = coset_of[base.index_of_coords(&tmp)] as u64;
            }
            RingKind::Integers | RingKind::Poly(_) => unreachable!("symbolic carriers have no slices"),
        }
    }

    pub(crate) fn mul_slice(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        match &self.kind {
            RingKind::Zn(n) => out[0] = mulmod(a[0], b[0], *n),
            RingKind::Product(l, r) => {
                let split = l.moduli.len();
                l.mul_slice(&a[..split], &b[..split], &mut out[..split]);
                r.mul_slice(&a[split..], &b[split..], &mut out[split..]);
            }
            RingKind::Matrix {
                size,
                inner,
                triangular,
            } => {
                let k = *size;
                let bl = inner.moduli.len();
                let mut term = vec![0u64; bl];
                let mut acc = vec![0u64; bl];
                let mut sum = vec![0u64; bl];
                out.fill(0);
                let pos = |i: usize, j: usize| {
                    if *triangular {
                        tri_pos(k, i, j)
                    } else {
                        i * k + j
                    }
                };
                for i in 0..k {
                    for j in 0..k {
                        if *triangular && j < i {
                            continue;
                        }
                        acc.fill(0);
                        let (lo, hi) = if *triangular { (i, j) } else { (0, k - 1) };
                        for t in lo..=hi {
                            let ap = pos(i, t) * bl;
                            let bp = pos(t, j) * bl;
                            inner.mul_slice(&a[ap..ap + bl], &b[bp..bp + bl], &mut term);
                            inner.add_slice(&acc, &term, &mut sum);
                            acc.copy_from_slice(&sum);
                        }
                        let op = pos(i, j) * bl;
                        out[op..op + bl].copy_from_slice(&acc);
                    }
                }
            }
            RingKind::GroupRing { inner, group } => {
                let bl = inner.moduli.len();
                let mut term = vec![0u64; bl];
                let mut sum = vec![0u64; bl];
                out.fill(0);
                for i in 0..group.order {
                    let ap = i * bl;
                    if a[ap..ap + bl].iter().all(|&c| c == 0) {
                        continue;
                    }
                    for j in 0..group.order {
                        let bp = j * bl;
                        if b[bp..bp + bl].iter().all(|&c| c == 0) {
                            continue;
                        }
                        inner.mul_slice(&a[ap..ap + bl], &b[bp..bp + bl], &mut term);
                        let op = group.table[i][j] * bl;
                        inner.add_slice(&out[op..op + bl].to_vec(), &term, &mut sum);
                        out[op..op + bl].copy_from_slice(&sum);
                    }
                }
            }
            RingKind::PolyQuotient { n, modulus } => {
                let d = modulus.len() - 1;
                let mut buf = vec![0u64; 2 * d - 1];
                for i in 0..d {
                    if a[i] == 0 {
                        continue;
                    }
                    for j in 0..d {
                        buf[i + j] = addmod(buf[i + j], mulmod(a[i], b[j], *n), *n);
                    }
                }
                // reduce by the monic modulus: t^d = -(m_0 + .. + m_{d-1} t^{d-1})
                for idx in (d..buf.len()).rev() {
                    let c = buf[idx];
                    if c == 0 {
                        continue;
                    }
                    buf[idx] = 0;
                    for j in 0..d {
                        let sub = mulmod(c, modulus[j], *n);
                        buf[idx - d + j] = addmod(buf[idx - d + j], n - sub % n, *n) % *n;
                    }
                }
                out.copy_from_slice(&buf[..d]);
            }
            RingKind::Quotient {
                base,
                rep_coords,
                coset_of,
                ..
            } => {
                let mut tmp = vec![0u64; base.moduli.len()];
                base.mul_slice(&rep_coords[a[0] as usize], &rep_coords[b[0] as usize], &mut tmp);
                out[0] = coset_of[base.index_of_coords(&tmp)] as u64;
            }
            RingKind::Integers | RingKind::Poly(_) => unreachable!("symbolic carriers have no slices"),
        }
    }

    // ---- index arithmetic ----------------------------------------------

    pub(crate) fn add_idx(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.coords_of(i), self.coords_of(j));
        let mut out = vec![0u64; self.moduli.len()];
        self.add_slice(&a, &b, &mut out);
        self.index_of_coords(&out)
    }

    pub(crate) fn neg_idx(&self, i: usize) -> usize {
        let a = self.coords_of(i);
        let mut out = vec![0u64; self.moduli.len()];
        self.neg_slice(&a, &mut out);
        self.index_of_coords(&out)
    }

    pub(crate) fn mul_idx(&self, i: usize, j: usize) -> usize {
        if let Some(Some(table)) = self.caches.mul_table.get() {
            let n = self.card_usize().unwrap();
            return table[i * n + j] as usize;
        }
        let (a, b) = (self.coords_of(i), self.coords_of(j));
        let mut out = vec![0u64; self.moduli.len()];
        self.mul_slice(&a, &b, &mut out);
        self.index_of_coords(&out)
    }

    pub(crate) fn one_idx(&self) -> usize {
        let mut out = vec![0u64; self.moduli.len()];
        self.one_slice(&mut out);
        self.index_of_coords(&out)
    }

    /// Memoized multiplication table for rings within `MUL_TABLE_CAP`,
    /// built once before concurrent use.
    pub(crate) fn mul_table(&self) -> Option<&Vec<u16>> {
        self.caches
            .mul_table
            .get_or_init(|| {
                let n = self.card_usize()?;
                if n > MUL_TABLE_CAP || n as u64 > self.cap {
                    return None;
                }
                let coords: Vec<Vec<u64>> = (0..n).map(|i| self.coords_of(i)).collect();
                let mut table = vec![0u16; n * n];
                let mut out = vec![0u64; self.moduli.len()];
                for i in 0..n {
                    for j in 0..n {
                        self.mul_slice(&coords[i], &coords[j], &mut out);
                        table[i * n + j] = self.index_of_coords(&out) as u16;
                    }
                }
                Some(table)
            })
            .as_ref()
    }

    // ---- element-level arithmetic --------------------------------------

    pub fn zero(&self) -> Element {
        let payload = match &self.kind {
            RingKind::Integers => Payload::Int(BigInt::zero()),
            RingKind::Poly(_) => Payload::Poly(Vec::new()),
            _ => Payload::Finite(vec![0u64; self.moduli.len()]),
        };
        Element {
            owner: self.ring_ref(),
            payload,
        }
    }

    pub fn one(&self) -> Element {
        let payload = match &self.kind {
            RingKind::Integers => Payload::Int(BigInt::one()),
            RingKind::Poly(_) => Payload::Poly(vec![1]),
            _ => {
                let mut out = vec![0u64; self.moduli.len()];
                self.one_slice(&mut out);
                Payload::Finite(out)
            }
        };
        Element {
            owner: self.ring_ref(),
            payload,
        }
    }

    pub fn is_zero(&self, e: &Element) -> bool {
        *e == self.zero()
    }

    pub fn is_one(&self, e: &Element) -> bool {
        *e == self.one()
    }

    pub fn add(&self, a: &Element, b: &Element) -> Element {
        self.check_owner(a);
        self.check_owner(b);
        let payload = match (&a.payload, &b.payload) {
            (Payload::Int(x), Payload::Int(y)) => Payload::Int(x + y),
            (Payload::Poly(x), Payload::Poly(y)) => {
                let n = self.poly_modulus();
                let mut out = vec![0u64; x.len().max(y.len())];
                for (i, slot) in out.iter_mut().enumerate() {
                    let xa = x.get(i).copied().unwrap_or(0);
                    let yb = y.get(i).copied().unwrap_or(0);
                    *slot = addmod(xa, yb, n);
                }
                Payload::Poly(trim(out))
            }
            (Payload::Finite(x), Payload::Finite(y)) => {
                let mut out = vec![0u64; self.moduli.len()];
                self.add_slice(x, y, &mut out);
                Payload::Finite(out)
            }
            _ => panic!("mismatched element payloads"),
        };
        Element {
            owner: self.ring_ref(),
            payload,
        }
    }

    pub fn neg(&self, a: &Element) -> Element {
        self.check_owner(a);
        let payload = match &a.payload {
            Payload::Int(x) => Payload::Int(-x),
            Payload::Poly(x) => {
                let n = self.poly_modulus();
                Payload::Poly(trim(x.iter().map(|&c| (n - c) % n).collect()))
            }
            Payload::Finite(x) => {
                let mut out = vec![0u64; self.moduli.len()];
                self.neg_slice(x, &mut out);
                Payload::Finite(out)
            }
        };
        Element {
            owner: self.ring_ref(),
            payload,
        }
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Element {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        self.check_owner(a);
        self.check_owner(b);
        let payload = match (&a.payload, &b.payload) {
            (Payload::Int(x), Payload::Int(y)) => Payload::Int(x * y),
            (Payload::Poly(x), Payload::Poly(y)) => {
                let n = self.poly_modulus();
                if x.is_empty() || y.is_empty() {
                    Payload::Poly(Vec::new())
                } else {
                    let mut out = vec![0u64; x.len() + y.len() - 1];
                    for i in 0..x.len() {
                        for j in 0..y.len() {
                            out[i + j] = addmod(out[i + j], mulmod(x[i], y[j], n), n);
                        }
                    }
                    Payload::Poly(trim(out))
                }
            }
            (Payload::Finite(x), Payload::Finite(y)) => {
                let mut out = vec![0u64; self.moduli.len()];
                self.mul_slice(x, y, &mut out);
                Payload::Finite(out)
            }
            _ => panic!("mismatched element payloads"),
        };
        Element {
            owner: self.ring_ref(),
            payload,
        }
    }

    /// Binary exponentiation; `pow(x, 0)` is 1.
    pub fn pow(&self, a: &Element, e: u64) -> Element {
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// The integer multiple `k * 1` of the identity.
    pub fn scalar(&self, k: i64) -> Element {
        match &self.kind {
            RingKind::Integers => Element {
                owner: self.ring_ref(),
                payload: Payload::Int(BigInt::from(k)),
            },
            RingKind::Poly(n) => {
                let c = k.rem_euclid(*n as i64) as u64;
                Element {
                    owner: self.ring_ref(),
                    payload: Payload::Poly(trim(vec![c])),
                }
            }
            _ => {
                let one = self.one();
                if k >= 0 {
                    self.scalar_mul(k as u64, &one)
                } else {
                    self.neg(&self.scalar_mul(k.unsigned_abs(), &one))
                }
            }
        }
    }

    /// Additive scaling `k * a`.
    pub fn scalar_mul(&self, k: u64, a: &Element) -> Element {
        self.check_owner(a);
        match &a.payload {
            Payload::Int(x) => Element {
                owner: self.ring_ref(),
                payload: Payload::Int(x * BigInt::from(k)),
            },
            Payload::Poly(x) => {
                let n = self.poly_modulus();
                Element {
                    owner: self.ring_ref(),
                    payload: Payload::Poly(trim(
                        x.iter().map(|&c| mulmod(k % n, c, n)).collect(),
                    )),
                }
            }
            Payload::Finite(x) => {
                let mut out = vec![0u64; self.moduli.len()];
                self.scale_slice(k, x, &mut out);
                Element {
                    owner: self.ring_ref(),
                    payload: Payload::Finite(out),
                }
            }
        }
    }

    pub fn commutes(&self, a: &Element, b: &Element) -> bool {
        self.mul(a, b) == self.mul(b, a)
    }

    fn poly_modulus(&self) -> u64 {
        match &self.kind {
            RingKind::Poly(n) => *n,
            _ => panic!("not a polynomial carrier"),
        }
    }

    /// Base ring, representatives and projection table of a coset ring.
    pub fn quotient_parts(&self) -> Option<(&RingRef, &[usize], &[u32])> {
        match &self.kind {
            RingKind::Quotient {
                base,
                reps,
                coset_of,
                ..
            } => Some((base, reps, coset_of)),
            _ => None,
        }
    }

    // ---- unit search -----------------------------------------------------

    /// Exhaustive two-sided inverse search over the whole carrier, using the
    /// memoized multiplication table when available and row-on-demand
    /// products otherwise.
    pub(crate) fn units(&self) -> Result<&UnitsData, RingError> {
        let n = self.card_checked()?;
        Ok(self.caches.units.get_or_init(|| {
            let one = self.one_idx();
            let mut is_unit = vec![false; n];
            let mut inverse = vec![u32::MAX; n];
            let table = self.mul_table();
            let mut count = 0u64;
            for x in 0..n {
                let found = match table {
                    Some(t) => (0..n)
                        .find(|&y| t[x * n + y] as usize == one && t[y * n + x] as usize == one),
                    None => (0..n)
                        .find(|&y| self.mul_idx(x, y) == one && self.mul_idx(y, x) == one),
                };
                if let Some(y) = found {
                    is_unit[x] = true;
                    inverse[x] = y as u32;
                    count += 1;
                }
            }
            UnitsData {
                is_unit,
                inverse,
                count,
            }
        }))
    }

    pub fn is_unit(&self, e: &Element) -> Result<bool, RingError> {
        let idx = self.index_of(e);
        Ok(self.units()?.is_unit[idx])
    }

    pub fn inverse(&self, e: &Element) -> Result<Option<Element>, RingError> {
        let idx = self.index_of(e);
        let units = self.units()?;
        Ok(if units.is_unit[idx] {
            Some(self.element_at(units.inverse[idx] as usize))
        } else {
            None
        })
    }

    // ---- power walks ----------------------------------------------------

    /// Raw power walks for every element, cached. Each walk records the
    /// first repetition in x, x^2, ... together with the exponents at which
    /// the walk meets 1, 0 and x itself.
    pub(crate) fn walks(&self) -> Result<&Vec<PowerWalk>, RingError> {
        let n = self.card_checked()?;
        Ok(self.caches.walks.get_or_init(|| {
            let zero = 0usize;
            let one = self.one_idx();
            let mut seen_stamp = vec![u32::MAX; n];
            let mut seen_exp = vec![0u32; n];
            let table = self.mul_table();
            (0..n)
                .map(|x| {
                    let stamp = x as u32;
                    let mut cur = x;
                    let mut exp = 1u32;
                    let mut ord_one = 0u32;
                    let mut potent_q = 0u32;
                    loop {
                        if seen_stamp[cur] == stamp {
                            let first = seen_exp[cur];
                            return PowerWalk {
                                index: first,
                                period: exp - first,
                                entry: {
                                    // recompute x^first cheaply: walk again
                                    let mut v = x;
                                    for _ in 1..first {
                                        v = match table {
                                            Some(t) => t[v * n + x] as usize,
                                            None => self.mul_idx(v, x),
                                        };
                                    }
                                    v as u32
                                },
                                ord_one,
                                potent_q,
                            };
                        }
                        seen_stamp[cur] = stamp;
                        seen_exp[cur] = exp;
                        if cur == one && ord_one == 0 {
                            ord_one = exp;
                        }
                        if cur == x && exp >= 2 && potent_q == 0 {
                            potent_q = exp;
                        }
                        let _ = zero;
                        cur = match table {
                            Some(t) => t[cur * n + x] as usize,
                            None => self.mul_idx(cur, x),
                        };
                        exp += 1;
                        if cur == x && exp >= 2 && potent_q == 0 {
                            potent_q = exp;
                        }
                    }
                })
                .collect()
        }))
    }

    pub(crate) fn walk_of(&self, idx: usize) -> Result<PowerWalk, RingError> {
        Ok(self.walks()?[idx])
    }

    // ---- censuses and centers -------------------------------------------

    /// Exhaustive census of the classification sets.
    pub fn census(&self) -> Result<Census, RingError> {
        let n = self.card_checked()?;
        let walks = self.walks()?.clone();
        let units = self.units()?.clone();
        let ring = self.ring_ref();
        let mut census = Census::default();
        for x in 0..n {
            let w = walks[x];
            let e = || ring.element_at(x);
            if units.is_unit[x] {
                census.units.push_idx(x);
                // in a finite carrier every unit has finite order
                debug_assert!(w.ord_one > 0);
                census.torsion_units.push_idx(x);
            }
            if w.entry as usize == 0 {
                census.nilpotents.push_idx(x);
            }
            if w.index == 1 && w.period == 1 {
                census.idempotents.push_idx(x);
            }
            if w.index == 1 {
                census.potents.push_idx(x);
            }
            census.periodic.push_idx(x);
            let _ = e;
        }
        census.attach(&ring);
        Ok(census)
    }

    /// Elements commuting with the whole ring.
    pub fn center(&self) -> Result<Vec<Element>, RingError> {
        let n = self.card_checked()?;
        let mask = self.caches.center.get_or_init(|| {
            let table = self.mul_table();
            (0..n)
                .map(|x| match table {
                    Some(t) => (0..n).all(|y| t[x * n + y] == t[y * n + x]),
                    None => (0..n).all(|y| self.mul_idx(x, y) == self.mul_idx(y, x)),
                })
                .collect()
        });
        Ok((0..n)
            .filter(|&i| mask[i])
            .map(|i| self.element_at(i))
            .collect())
    }

    pub(crate) fn center_mask(&self) -> Result<&Vec<bool>, RingError> {
        self.center()?;
        Ok(self.caches.center.get().unwrap())
    }

    /// True iff the ring is commutative and every nonzero element is a unit.
    pub fn is_field(&self) -> Result<bool, RingError> {
        let n = self.card_checked()?;
        if !self.commutative {
            return Ok(false);
        }
        Ok(self.units()?.count == (n as u64) - 1)
    }

    // ---- sumset memo ------------------------------------------------------

    pub(crate) fn sumset_layers(&self, key: SumsetKey) -> Option<Arc<Vec<Vec<bool>>>> {
        let guard = self.caches.sumsets.lock().unwrap();
        guard.iter().find(|(k, _)| *k == key).map(|(_, v)| v.clone())
    }

    pub(crate) fn store_sumset_layers(&self, key: SumsetKey, layers: Arc<Vec<Vec<bool>>>) {
        let mut guard = self.caches.sumsets.lock().unwrap();
        if !guard.iter().any(|(k, _)| *k == key) {
            guard.push((key, layers));
        }
    }
}

/// Which powers of the upper-triangular packed layout hold entry (i, j).
pub(crate) fn tri_pos(size: usize, i: usize, j: usize) -> usize {
    debug_assert!(j >= i);
    // row i starts after rows 0..i, row r contributing size - r slots
    let row_start = i * size - i * (i.saturating_sub(1)) / 2 - if i > 0 { i } else { 0 };
    // adjusted below: row r has (size - r) entries
    let _ = row_start;
    let mut start = 0;
    for r in 0..i {
        start += size - r;
    }
    start + (j - i)
}

fn kind_moduli(kind: &RingKind) -> Vec<u64> {
    match kind {
        RingKind::Zn(n) => vec![*n],
        RingKind::Integers | RingKind::Poly(_) => Vec::new(),
        RingKind::Product(l, r) => {
            let mut m = l.moduli.clone();
            m.extend_from_slice(&r.moduli);
            m
        }
        RingKind::Matrix {
            size,
            inner,
            triangular,
        } => {
            let blocks = if *triangular {
                size * (size + 1) / 2
            } else {
                size * size
            };
            let mut m = Vec::with_capacity(blocks * inner.moduli.len());
            for _ in 0..blocks {
                m.extend_from_slice(&inner.moduli);
            }
            m
        }
        RingKind::GroupRing { inner, group } => {
            let mut m = Vec::with_capacity(group.order * inner.moduli.len());
            for _ in 0..group.order {
                m.extend_from_slice(&inner.moduli);
            }
            m
        }
        RingKind::PolyQuotient { n, modulus } => vec![*n; modulus.len() - 1],
        RingKind::Quotient { reps, .. } => vec![reps.len() as u64],
    }
}

fn kind_characteristic(kind: &RingKind) -> u64 {
    match kind {
        RingKind::Zn(n) | RingKind::Poly(n) => *n,
        RingKind::Integers => 0,
        RingKind::Product(l, r) => {
            let (a, b) = (l.characteristic, r.characteristic);
            a / gcd(a, b) * b
        }
        RingKind::Matrix { inner, .. } | RingKind::GroupRing { inner, .. } => inner.characteristic,
        RingKind::PolyQuotient { n, .. } => *n,
        RingKind::Quotient { base, coset_of, .. } => {
            // additive order of 1 in the coset ring
            let one = {
                let mut tmp = vec![0u64; base.moduli.len()];
                base.one_slice(&mut tmp);
                base.index_of_coords(&tmp)
            };
            let target = coset_of[0];
            let mut acc = one;
            let mut k = 1u64;
            while coset_of[acc] != target {
                acc = base.add_idx(acc, one);
                k += 1;
            }
            k
        }
    }
}

fn kind_commutative(kind: &RingKind) -> bool {
    match kind {
        RingKind::Zn(_) | RingKind::Integers | RingKind::Poly(_) | RingKind::PolyQuotient { .. } => {
            true
        }
        RingKind::Product(l, r) => l.commutative && r.commutative,
        RingKind::Matrix { size, inner, .. } => *size == 1 && inner.commutative,
        RingKind::GroupRing { inner, group } => inner.commutative && group.is_abelian(),
        RingKind::Quotient {
            base,
            reps,
            rep_coords,
            coset_of,
        } => {
            if base.commutative {
                return true;
            }
            let k = reps.len();
            let mut ab = vec![0u64; base.moduli.len()];
            let mut ba = vec![0u64; base.moduli.len()];
            for i in 0..k {
                for j in i + 1..k {
                    base.mul_slice(&rep_coords[i], &rep_coords[j], &mut ab);
                    base.mul_slice(&rep_coords[j], &rep_coords[i], &mut ba);
                    if coset_of[base.index_of_coords(&ab)] != coset_of[base.index_of_coords(&ba)] {
                        return false;
                    }
                }
            }
            true
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn canonical_label(d: &RingDescriptor) -> String {
    match d {
        RingDescriptor::Zn(n) => format!("Z{n}"),
        RingDescriptor::Integers => "ZZ".to_string(),
        RingDescriptor::Product(a, b) => {
            format!("{} x {}", canonical_label(a), canonical_label(b))
        }
        RingDescriptor::Matrix(k, inner) => format!("M{k}({})", canonical_label(inner)),
        RingDescriptor::Triangular(k, inner) => format!("T{k}({})", canonical_label(inner)),
        RingDescriptor::GroupRing(inner, g) => format!("{}[{}]", canonical_label(inner), g.name),
        RingDescriptor::PolyQuotient(n, m) => {
            let coeffs: Vec<String> = m.iter().map(|c| c.to_string()).collect();
            format!("Q(Z{n},[{}])", coeffs.join(","))
        }
        RingDescriptor::Poly(n) => format!("POLY(Z{n})"),
    }
}

/// Classification counts with their witnessed element sets.
#[derive(Debug, Clone, Default)]
pub struct Census {
    pub units: ClassSet,
    pub torsion_units: ClassSet,
    pub nilpotents: ClassSet,
    pub idempotents: ClassSet,
    pub potents: ClassSet,
    pub periodic: ClassSet,
}

#[derive(Debug, Clone, Default)]
pub struct ClassSet {
    pub count: u64,
    indices: Vec<usize>,
    pub witnesses: Vec<Element>,
}

impl ClassSet {
    fn push_idx(&mut self, idx: usize) {
        self.count += 1;
        self.indices.push(idx);
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

impl Census {
    fn attach(&mut self, ring: &RingRef) {
        for set in [
            &mut self.units,
            &mut self.torsion_units,
            &mut self.nilpotents,
            &mut self.idempotents,
            &mut self.potents,
            &mut self.periodic,
        ] {
            set.witnesses = set.indices.iter().map(|&i| ring.element_at(i)).collect();
        }
    }

    /// Truncates every witness set to at most `cap` elements; the counts
    /// stay exhaustive.
    pub fn truncate(&mut self, cap: usize) {
        for set in [
            &mut self.units,
            &mut self.torsion_units,
            &mut self.nilpotents,
            &mut self.idempotents,
            &mut self.potents,
            &mut self.periodic,
        ] {
            set.witnesses.truncate(cap);
        }
    }
}

/// Spot-checks the ring axioms: exhaustively on all triples when the
/// carrier has at most 64 elements, on `samples` seeded random triples
/// otherwise.
pub fn verify_ring_axioms(ring: &RingRef, samples: usize) -> Result<(), String> {
    let n = ring
        .card_checked()
        .map_err(|e| format!("cannot enumerate: {e}"))?;
    let triples: Vec<(usize, usize, usize)> = if n <= 64 {
        let mut v = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    v.push((a, b, c));
                }
            }
        }
        v
    } else {
        let mut rng = StdRng::seed_from_u64(0x51ab_0001);
        (0..samples)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
            .collect()
    };
    let zero = ring.zero();
    let one = ring.one();
    for (ia, ib, ic) in triples {
        let a = ring.element_at(ia);
        let b = ring.element_at(ib);
        let c = ring.element_at(ic);
        let check = |ok: bool, law: &str| {
            if ok {
                Ok(())
            } else {
                Err(format!("{law} fails at ({ia},{ib},{ic}) in {}", ring.label()))
            }
        };
        check(
            ring.add(&ring.add(&a, &b), &c) == ring.add(&a, &ring.add(&b, &c)),
            "additive associativity",
        )?;
        check(ring.add(&a, &b) == ring.add(&b, &a), "additive commutativity")?;
        check(ring.add(&a, &zero) == a, "additive identity")?;
        check(ring.add(&a, &ring.neg(&a)) == zero, "additive inverse")?;
        check(
            ring.mul(&ring.mul(&a, &b), &c) == ring.mul(&a, &ring.mul(&b, &c)),
            "multiplicative associativity",
        )?;
        check(ring.mul(&a, &one) == a && ring.mul(&one, &a) == a, "unit law")?;
        check(
            ring.mul(&a, &ring.add(&b, &c)) == ring.add(&ring.mul(&a, &b), &ring.mul(&a, &c)),
            "left distributivity",
        )?;
        check(
            ring.mul(&ring.add(&a, &b), &c) == ring.add(&ring.mul(&a, &c), &ring.mul(&b, &c)),
            "right distributivity",
        )?;
    }
    Ok(())
}
