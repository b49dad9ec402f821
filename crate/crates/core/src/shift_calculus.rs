//! Exact operator calculus on finitely supported sequences in `H²(C^m)`.
//!
//! Truncating the unilateral shift to an `N×N` matrix breaks `S*S = I` in the
//! last coordinate, and that artifact propagates into every identity built
//! from it. Here operators are expression trees evaluated lazily on finitely
//! supported vectors, so `S*S = I` and `I - SS* = P₀` hold structurally. The
//! bridge to dense matrices is [`StructuredOperator::compress`], which always
//! compresses the whole expression (never multiplies compressions).
//!
//! Direct sums `H²(C^p) ⊕ H²(C^q)` are identified with `H²(C^{p+q})` by
//! stacking fibers degree by degree; a [`StructuredOperator::Block`] splits the
//! fiber accordingly. Scalars are `f64` complex numbers, so evaluation is exact
//! as long as the constants are short dyadic rationals (`1/4`, `1`, ...).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator_core::{ComplexMatrix, ZERO};

/// Expression tree over the shift, its adjoint, rank-one units and constants.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuredOperator {
    Identity { fiber: usize },
    Zero { out_fiber: usize, in_fiber: usize },
    /// Unilateral shift `S ⊗ I_fiber`.
    Shift { fiber: usize },
    /// Backward shift `S* ⊗ I_fiber`.
    BackwardShift { fiber: usize },
    /// `|e_row⟩⟨e_col| ⊗ I_fiber` acting on the degree index.
    Unit { row: usize, col: usize, fiber: usize },
    /// Constant matrix applied to every coefficient (`I_{H²} ⊗ M`).
    Fiber(ComplexMatrix),
    Scale(Complex64, Box<StructuredOperator>),
    Sum(Box<StructuredOperator>, Box<StructuredOperator>),
    /// `Product(a, b)` is `a ∘ b`: `b` acts first.
    Product(Box<StructuredOperator>, Box<StructuredOperator>),
    /// `[[a, b], [c, d]]` on a split fiber.
    Block(Box<[StructuredOperator; 4]>),
    /// `op ⊗ M` where `M` acts on an extra fiber factor (index `outer * r + inner`).
    Tensor(Box<StructuredOperator>, ComplexMatrix),
}

use StructuredOperator as Op;

impl StructuredOperator {
    pub fn identity(fiber: usize) -> Self {
        Op::Identity { fiber }
    }

    pub fn zero(out_fiber: usize, in_fiber: usize) -> Self {
        Op::Zero {
            out_fiber,
            in_fiber,
        }
    }

    pub fn shift(fiber: usize) -> Self {
        Op::Shift { fiber }
    }

    pub fn backward_shift(fiber: usize) -> Self {
        Op::BackwardShift { fiber }
    }

    pub fn unit(row: usize, col: usize, fiber: usize) -> Self {
        Op::Unit { row, col, fiber }
    }

    /// `I - SS*`, the projection onto constants.
    pub fn constants_projection(fiber: usize) -> Self {
        Op::unit(0, 0, fiber)
    }

    pub fn fiber_matrix(m: ComplexMatrix) -> Self {
        Op::Fiber(m)
    }

    pub fn scaled(self, c: Complex64) -> Self {
        Op::Scale(c, Box::new(self))
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        check(self.in_fiber(), other.in_fiber())?;
        check(self.out_fiber(), other.out_fiber())?;
        Ok(Op::Sum(Box::new(self.clone()), Box::new(other.clone())))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.clone().scaled(Complex64::new(-1.0, 0.0)))
    }

    /// `self ∘ right`.
    pub fn compose(&self, right: &Self) -> Result<Self> {
        check(self.in_fiber(), right.out_fiber())?;
        Ok(Op::Product(Box::new(self.clone()), Box::new(right.clone())))
    }

    pub fn block(a: Self, b: Self, c: Self, d: Self) -> Result<Self> {
        check(a.in_fiber(), c.in_fiber())?;
        check(b.in_fiber(), d.in_fiber())?;
        check(a.out_fiber(), b.out_fiber())?;
        check(c.out_fiber(), d.out_fiber())?;
        Ok(Op::Block(Box::new([a, b, c, d])))
    }

    pub fn tensor(op: Self, m: ComplexMatrix) -> Self {
        Op::Tensor(Box::new(op), m)
    }

    pub fn in_fiber(&self) -> usize {
        match self {
            Op::Identity { fiber } | Op::Shift { fiber } | Op::BackwardShift { fiber } => *fiber,
            Op::Unit { fiber, .. } => *fiber,
            Op::Zero { in_fiber, .. } => *in_fiber,
            Op::Fiber(m) => m.ncols(),
            Op::Scale(_, a) | Op::Sum(a, _) => a.in_fiber(),
            Op::Product(_, b) => b.in_fiber(),
            Op::Block(blocks) => blocks[0].in_fiber() + blocks[1].in_fiber(),
            Op::Tensor(a, m) => a.in_fiber() * m.ncols(),
        }
    }

    pub fn out_fiber(&self) -> usize {
        match self {
            Op::Identity { fiber } | Op::Shift { fiber } | Op::BackwardShift { fiber } => *fiber,
            Op::Unit { fiber, .. } => *fiber,
            Op::Zero { out_fiber, .. } => *out_fiber,
            Op::Fiber(m) => m.nrows(),
            Op::Scale(_, a) | Op::Sum(a, _) | Op::Product(a, _) => a.out_fiber(),
            Op::Block(blocks) => blocks[0].out_fiber() + blocks[2].out_fiber(),
            Op::Tensor(a, m) => a.out_fiber() * m.nrows(),
        }
    }

    /// Upper bound on how many degrees the support can grow under one application.
    pub fn shift_budget(&self) -> usize {
        match self {
            Op::Identity { .. } | Op::Zero { .. } | Op::BackwardShift { .. } | Op::Fiber(_) => 0,
            Op::Shift { .. } => 1,
            Op::Unit { row, .. } => row + 1,
            Op::Scale(_, a) | Op::Tensor(a, _) => a.shift_budget(),
            Op::Sum(a, b) => a.shift_budget().max(b.shift_budget()),
            Op::Product(a, b) => a.shift_budget() + b.shift_budget(),
            Op::Block(blocks) => blocks.iter().map(Op::shift_budget).max().unwrap_or(0),
        }
    }

    /// Adjoint, pushed down to the leaves.
    pub fn adjoint(&self) -> Self {
        match self {
            Op::Identity { .. } => self.clone(),
            Op::Zero {
                out_fiber,
                in_fiber,
            } => Op::zero(*in_fiber, *out_fiber),
            Op::Shift { fiber } => Op::backward_shift(*fiber),
            Op::BackwardShift { fiber } => Op::shift(*fiber),
            Op::Unit { row, col, fiber } => Op::unit(*col, *row, *fiber),
            Op::Fiber(m) => Op::Fiber(m.adjoint()),
            Op::Scale(c, a) => Op::Scale(c.conj(), Box::new(a.adjoint())),
            Op::Sum(a, b) => Op::Sum(Box::new(a.adjoint()), Box::new(b.adjoint())),
            Op::Product(a, b) => Op::Product(Box::new(b.adjoint()), Box::new(a.adjoint())),
            Op::Block(blocks) => {
                let [a, b, c, d] = &**blocks;
                Op::Block(Box::new([a.adjoint(), c.adjoint(), b.adjoint(), d.adjoint()]))
            }
            Op::Tensor(a, m) => Op::Tensor(Box::new(a.adjoint()), m.adjoint()),
        }
    }

    pub fn apply(&self, v: &FinSuppVector) -> Result<FinSuppVector> {
        check(self.in_fiber(), v.fiber)?;
        Ok(self.eval(v))
    }

    fn eval(&self, v: &FinSuppVector) -> FinSuppVector {
        let out = match self {
            Op::Identity { .. } => v.clone(),
            Op::Zero { out_fiber, .. } => FinSuppVector::zero(*out_fiber),
            Op::Shift { fiber } => {
                if v.is_zero() {
                    v.clone()
                } else {
                    let mut coeffs = vec![ZERO; *fiber];
                    coeffs.extend_from_slice(&v.coeffs);
                    FinSuppVector::from_raw(*fiber, coeffs)
                }
            }
            Op::BackwardShift { fiber } => {
                let start = (*fiber).min(v.coeffs.len());
                FinSuppVector::from_raw(*fiber, v.coeffs[start..].to_vec())
            }
            Op::Unit { row, col, fiber } => {
                let mut coeffs = vec![ZERO; (row + 1) * fiber];
                for f in 0..*fiber {
                    coeffs[row * fiber + f] = v.coefficient(*col, f);
                }
                FinSuppVector::from_raw(*fiber, coeffs)
            }
            Op::Fiber(m) => {
                let (rows, cols) = m.shape();
                let mut coeffs = vec![ZERO; v.degrees() * rows];
                for k in 0..v.degrees() {
                    for i in 0..rows {
                        let mut acc = ZERO;
                        for j in 0..cols {
                            acc += m[(i, j)] * v.coeffs[k * cols + j];
                        }
                        coeffs[k * rows + i] = acc;
                    }
                }
                FinSuppVector::from_raw(rows, coeffs)
            }
            Op::Scale(c, a) => {
                let mut w = a.eval(v);
                w.coeffs.iter_mut().for_each(|z| *z *= c);
                w
            }
            Op::Sum(a, b) => a.eval(v).add(&b.eval(v)),
            Op::Product(a, b) => a.eval(&b.eval(v)),
            Op::Block(blocks) => {
                let [a, b, c, d] = &**blocks;
                let (top, bottom) = v.split(a.in_fiber());
                let upper = a.eval(&top).add(&b.eval(&bottom));
                let lower = c.eval(&top).add(&d.eval(&bottom));
                FinSuppVector::stack(&upper, &lower)
            }
            Op::Tensor(a, m) => {
                let (p_in, p_out) = (a.in_fiber(), a.out_fiber());
                let (q, r) = m.shape();
                let degrees = v.degrees();
                // Apply M on the inner factor: fiber (outer, inner) -> (outer, row of M).
                let mut mixed = vec![ZERO; degrees * p_in * q];
                for k in 0..degrees {
                    for o in 0..p_in {
                        for i in 0..q {
                            let mut acc = ZERO;
                            for j in 0..r {
                                acc += m[(i, j)] * v.coeffs[k * p_in * r + o * r + j];
                            }
                            mixed[k * p_in * q + o * q + i] = acc;
                        }
                    }
                }
                // Apply the operator on the outer factor, one inner slot at a time.
                let mut parts = Vec::with_capacity(q);
                for i in 0..q {
                    let slice: Vec<Complex64> = (0..degrees)
                        .flat_map(|k| (0..p_in).map(move |o| (k, o)))
                        .map(|(k, o)| mixed[k * p_in * q + o * q + i])
                        .collect();
                    parts.push(a.eval(&FinSuppVector::from_raw(p_in, slice)));
                }
                let out_degrees = parts.iter().map(FinSuppVector::degrees).max().unwrap_or(0);
                let mut coeffs = vec![ZERO; out_degrees * p_out * q];
                for (i, part) in parts.iter().enumerate() {
                    for k in 0..part.degrees() {
                        for o in 0..p_out {
                            coeffs[k * p_out * q + o * q + i] = part.coefficient(k, o);
                        }
                    }
                }
                FinSuppVector::from_raw(p_out * q, coeffs)
            }
        };
        debug_assert_eq!(out.fiber, self.out_fiber());
        out
    }

    /// Matrix of `P_N · op` on `span{e_0, …, e_{N-1}} ⊗ C^fiber`.
    ///
    /// Coordinates are component-major: index `f * N + k` holds degree `k` of
    /// fiber component `f`, so compressing a [`Block`](Self::Block) yields the
    /// block matrix of the compressed entries.
    pub fn compress(&self, n: usize) -> ComplexMatrix {
        let (fin, fout) = (self.in_fiber(), self.out_fiber());
        let mut m = ComplexMatrix::zeros(fout * n, fin * n);
        for f in 0..fin {
            for k in 0..n {
                let image = self.eval(&FinSuppVector::basis(k, f, fin));
                for g in 0..fout {
                    for d in 0..n.min(image.degrees()) {
                        m[(g * n + d, f * n + k)] = image.coefficient(d, g);
                    }
                }
            }
        }
        m
    }
}

fn check(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::FiberMismatch { expected, found })
    }
}

/// Finitely supported element of `H²(C^fiber)`.
///
/// Coefficients are stored degree-major (`k * fiber + f`) and trimmed so the
/// last stored degree is non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FinSuppVector {
    fiber: usize,
    coeffs: Vec<Complex64>,
}

impl FinSuppVector {
    pub fn zero(fiber: usize) -> Self {
        Self {
            fiber,
            coeffs: Vec::new(),
        }
    }

    /// `e_degree ⊗ e_component`.
    pub fn basis(degree: usize, component: usize, fiber: usize) -> Self {
        let mut coeffs = vec![ZERO; (degree + 1) * fiber];
        coeffs[degree * fiber + component] = Complex64::new(1.0, 0.0);
        Self { fiber, coeffs }
    }

    /// Builds from per-degree coefficient blocks of length `fiber`.
    pub fn from_degrees(fiber: usize, blocks: &[Vec<Complex64>]) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(blocks.len() * fiber);
        for b in blocks {
            check(fiber, b.len())?;
            coeffs.extend_from_slice(b);
        }
        Ok(Self::from_raw(fiber, coeffs))
    }

    fn from_raw(fiber: usize, mut coeffs: Vec<Complex64>) -> Self {
        if fiber == 0 {
            coeffs.clear();
        } else {
            let mut len = coeffs.len() / fiber;
            while len > 0 && coeffs[(len - 1) * fiber..len * fiber].iter().all(|z| *z == ZERO) {
                len -= 1;
            }
            coeffs.truncate(len * fiber);
        }
        Self { fiber, coeffs }
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    /// Number of stored degrees (support length).
    pub fn degrees(&self) -> usize {
        if self.fiber == 0 {
            0
        } else {
            self.coeffs.len() / self.fiber
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, degree: usize, component: usize) -> Complex64 {
        self.coeffs
            .get(degree * self.fiber + component)
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.fiber, other.fiber);
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (z, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *z += s;
        }
        Self::from_raw(self.fiber, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check(self.fiber, other.fiber)?;
        let neg = Self {
            fiber: other.fiber,
            coeffs: other.coeffs.iter().map(|z| -z).collect(),
        };
        Ok(self.add(&neg))
    }

    fn split(&self, first: usize) -> (Self, Self) {
        let second = self.fiber - first;
        let degrees = self.degrees();
        let mut a = Vec::with_capacity(degrees * first);
        let mut b = Vec::with_capacity(degrees * second);
        for k in 0..degrees {
            let block = &self.coeffs[k * self.fiber..(k + 1) * self.fiber];
            a.extend_from_slice(&block[..first]);
            b.extend_from_slice(&block[first..]);
        }
        (Self::from_raw(first, a), Self::from_raw(second, b))
    }

    fn stack(top: &Self, bottom: &Self) -> Self {
        let fiber = top.fiber + bottom.fiber;
        let degrees = top.degrees().max(bottom.degrees());
        let mut coeffs = Vec::with_capacity(degrees * fiber);
        for k in 0..degrees {
            coeffs.extend((0..top.fiber).map(|f| top.coefficient(k, f)));
            coeffs.extend((0..bottom.fiber).map(|f| bottom.coefficient(k, f)));
        }
        Self::from_raw(fiber, coeffs)
    }
}

/// Outcome of [`verify_identity`].
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub holds: bool,
    pub max_residual: f64,
    /// `(degree, component)` of the basis vector with the largest residual.
    pub witness: Option<(usize, usize)>,
}

/// Compares `lhs` and `rhs` on every `e_k ⊗ e_f` with `k ≤ degree_budget`.
///
/// With `tol = 0` the comparison is exact; pass a positive tolerance when the
/// constants are not exactly representable.
pub fn verify_identity(
    lhs: &StructuredOperator,
    rhs: &StructuredOperator,
    degree_budget: usize,
    tol: f64,
) -> Result<IdentityCheck> {
    check(lhs.in_fiber(), rhs.in_fiber())?;
    check(lhs.out_fiber(), rhs.out_fiber())?;
    let fiber = lhs.in_fiber();
    let mut max_residual = 0.0;
    let mut witness = None;
    for k in 0..=degree_budget {
        for f in 0..fiber {
            let e = FinSuppVector::basis(k, f, fiber);
            let diff = lhs.eval(&e).sub(&rhs.eval(&e))?;
            let r = diff.max_abs();
            if r > max_residual {
                max_residual = r;
                witness = Some((k, f));
            }
        }
    }
    Ok(IdentityCheck {
        holds: max_residual <= tol,
        max_residual,
        witness: if max_residual > tol { witness } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_core::{c64, from_real_rows, identity, op_norm};

    fn e(k: usize) -> FinSuppVector {
        FinSuppVector::basis(k, 0, 1)
    }

    #[test]
    fn shift_moves_basis_up() {
        let s = Op::shift(1);
        assert_eq!(s.apply(&e(0)).unwrap(), e(1));
    }

    #[test]
    fn constants_projection() {
        let p = Op::identity(1)
            .minus(&Op::shift(1).compose(&Op::backward_shift(1)).unwrap())
            .unwrap();
        assert_eq!(p.apply(&e(0)).unwrap(), e(0));
        assert!(p.apply(&e(1)).unwrap().is_zero());
    }

    #[test]
    fn backward_shift_undoes_shift() {
        let sts = Op::backward_shift(1).compose(&Op::shift(1)).unwrap();
        for k in 0..10 {
            assert_eq!(sts.apply(&e(k)).unwrap(), e(k));
        }
    }

    #[test]
    fn compress_shift() {
        let m = Op::shift(1).compress(3);
        assert_eq!(m, from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]));
    }

    #[test]
    fn compression_of_products_is_not_product_of_compressions() {
        let n = 5;
        let s = Op::shift(1);
        let sts = s.adjoint().compose(&s).unwrap();
        assert_eq!(sts.compress(n), identity(n));
        let sn = s.compress(n);
        // (S*S)_N is the identity but S_N* S_N misses the last coordinate.
        assert!(op_norm(&(sn.adjoint() * &sn - identity(n))) > 0.5);
        let sss = s.compose(&s.adjoint()).unwrap();
        let p0 = Op::identity(1).minus(&sss).unwrap().compress(n);
        let mut e11 = ComplexMatrix::zeros(n, n);
        e11[(0, 0)] = c64(1.0, 0.0);
        assert_eq!(p0, e11);
    }

    #[test]
    fn verify_identity_reports_witness() {
        let s = Op::shift(1);
        let sts = s.adjoint().compose(&s).unwrap();
        let ok = verify_identity(&sts, &Op::identity(1), 8, 0.0).unwrap();
        assert!(ok.holds && ok.max_residual == 0.0);
        let sss = s.compose(&s.adjoint()).unwrap();
        let bad = verify_identity(&sss, &Op::identity(1), 8, 0.0).unwrap();
        assert!(!bad.holds);
        assert_eq!(bad.witness, Some((0, 0)));
    }

    #[test]
    fn fiber_mismatch_is_reported() {
        let err = Op::shift(1).compose(&Op::shift(2)).unwrap_err();
        assert_eq!(err, Error::FiberMismatch { expected: 1, found: 2 });
        assert!(Op::shift(2).apply(&e(0)).is_err());
    }

    #[test]
    fn block_adjoint_transposes() {
        let b = Op::block(Op::zero(1, 1), Op::shift(1), Op::identity(1), Op::zero(1, 1)).unwrap();
        let n = 4;
        assert_eq!(b.adjoint().compress(n), b.compress(n).adjoint());
    }

    #[test]
    fn tensor_acts_on_both_factors() {
        let h1 = from_real_rows(&[&[0.0, 0.25], &[0.0, 0.0]]);
        let t = Op::tensor(Op::constants_projection(1), h1.clone());
        let n = 3;
        let m = t.compress(n);
        // Component-major over the C² fiber: the only entry is degree 0, (0,1) of H1.
        assert_eq!(m[(0, n)], c64(0.25, 0.0));
        assert_eq!(m.iter().filter(|z| **z != ZERO).count(), 1);
    }
}
