//! Ladder operators and the generator sets of U(3), SU(3) and its SU(2)
//! subalgebras.
//!
//! Operators are written as polynomials in ladder operators ([`OpExpr`]) over
//! abstract modes. When a polynomial is built on a basis, modes foreign to the
//! basis convention are rewritten through
//! `tau_x = -(tau_+ - tau_-)/sqrt2`, `tau_y = -i(tau_+ + tau_-)/sqrt2`
//! (or the inverse), and the result is tabulated state by state.
//! Composite Casimirs (`W^2`, `J^2`) are products of generator *matrices*,
//! so the algebraic identities between them are real cross-checks.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::basis::{BlockFilter, Convention, FockBasis, Occupation};
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, SparseOperator, C64};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Single-particle modes. `Zero` is the scalar boson `sigma` (spinor `a_0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Plus,
    Zero,
    Minus,
    X,
    Y,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Plus => "plus",
            Mode::Zero => "zero",
            Mode::Minus => "minus",
            Mode::X => "x",
            Mode::Y => "y",
        }
    }

    /// Slot of this mode in an occupation triple, if native to `conv`.
    pub fn slot(self, conv: Convention) -> Option<usize> {
        match (self, conv) {
            (Mode::Zero, _) => Some(1),
            (Mode::Plus, Convention::Circular) | (Mode::X, Convention::Cartesian) => Some(0),
            (Mode::Minus, Convention::Circular) | (Mode::Y, Convention::Cartesian) => Some(2),
            _ => None,
        }
    }

    /// Annihilator of `self` as a combination of native annihilators.
    fn native_annihilator(self, conv: Convention) -> Vec<(usize, C64)> {
        if let Some(s) = self.slot(conv) {
            return vec![(s, ONE)];
        }
        let h = FRAC_1_SQRT_2;
        match self {
            // circular basis: tau_x = (-tau_+ + tau_-)/sqrt2, tau_y = -i(tau_+ + tau_-)/sqrt2
            Mode::X => vec![(0, C64::new(-h, 0.0)), (2, C64::new(h, 0.0))],
            Mode::Y => vec![(0, C64::new(0.0, -h)), (2, C64::new(0.0, -h))],
            // cartesian basis: tau_+ = -(tau_x - i tau_y)/sqrt2, tau_- = (tau_x + i tau_y)/sqrt2
            Mode::Plus => vec![(0, C64::new(-h, 0.0)), (2, C64::new(0.0, h))],
            Mode::Minus => vec![(0, C64::new(h, 0.0)), (2, C64::new(0.0, h))],
            Mode::Zero => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Ladder {
    mode: Mode,
    create: bool,
}

/// Native ladder action: (slot, create).
type NativeMonomial = Vec<(usize, bool)>;

/// Polynomial in ladder operators. Each monomial is written left to right
/// and acts right to left.
#[derive(Debug, Clone, Default)]
pub struct OpExpr {
    terms: Vec<(C64, Vec<Ladder>)>,
}

impl OpExpr {
    pub fn zero() -> Self {
        OpExpr::default()
    }

    pub fn identity() -> Self {
        OpExpr {
            terms: vec![(ONE, Vec::new())],
        }
    }

    pub fn ladder(mode: Mode, kind: LadderKind) -> Self {
        OpExpr {
            terms: vec![(
                ONE,
                vec![Ladder {
                    mode,
                    create: kind == LadderKind::Create,
                }],
            )],
        }
    }

    pub fn create(mode: Mode) -> Self {
        Self::ladder(mode, LadderKind::Create)
    }

    pub fn annihilate(mode: Mode) -> Self {
        Self::ladder(mode, LadderKind::Annihilate)
    }

    /// `a_to^dagger a_from`.
    pub fn hop(to: Mode, from: Mode) -> Self {
        Self::create(to) * Self::annihilate(from)
    }

    pub fn number(mode: Mode) -> Self {
        Self::hop(mode, mode)
    }

    pub fn scaled(self, c: C64) -> Self {
        OpExpr {
            terms: self.terms.into_iter().map(|(k, m)| (k * c, m)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        OpExpr {
            terms: self
                .terms
                .iter()
                .map(|(k, m)| {
                    let rev = m
                        .iter()
                        .rev()
                        .map(|l| Ladder {
                            mode: l.mode,
                            create: !l.create,
                        })
                        .collect();
                    (k.conj(), rev)
                })
                .collect(),
        }
    }

    /// Rewrite in native modes of `conv`, merging equal monomials.
    fn expand(&self, conv: Convention) -> Vec<(C64, NativeMonomial)> {
        let mut acc: HashMap<NativeMonomial, C64> = HashMap::new();
        let mut order: Vec<NativeMonomial> = Vec::new();
        for (coef, mono) in &self.terms {
            let mut partial: Vec<(C64, NativeMonomial)> = vec![(*coef, Vec::new())];
            for l in mono {
                let parts = l.mode.native_annihilator(conv);
                let mut next = Vec::with_capacity(partial.len() * parts.len());
                for (c, m) in &partial {
                    for &(slot, w) in &parts {
                        let w = if l.create { w.conj() } else { w };
                        let mut m2 = m.clone();
                        m2.push((slot, l.create));
                        next.push((c * w, m2));
                    }
                }
                partial = next;
            }
            for (c, m) in partial {
                match acc.get_mut(&m) {
                    Some(v) => *v += c,
                    None => {
                        order.push(m.clone());
                        acc.insert(m, c);
                    }
                }
            }
        }
        order
            .into_iter()
            .filter_map(|m| {
                let c = acc[&m];
                (c.norm() > 1e-15).then_some((c, m))
            })
            .collect()
    }

    /// Range of magnetization changes `(min, max)` produced in the circular
    /// convention, and the particle-number change.
    fn shifts(&self) -> (i64, i64, i64) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        let mut dn = 0;
        for (_, m) in self.expand(Convention::Circular) {
            let mut dl = 0i64;
            let mut dnum = 0i64;
            for (slot, create) in m {
                let s = if create { 1 } else { -1 };
                dnum += s;
                match slot {
                    0 => dl += s,
                    2 => dl -= s,
                    _ => {}
                }
            }
            lo = lo.min(dl);
            hi = hi.max(dl);
            dn = dnum;
        }
        if lo > hi {
            (0, 0, 0)
        } else {
            (lo, hi, dn)
        }
    }

    /// Tabulate on explicit bases. Images outside `codomain` are an error.
    pub fn build(&self, domain: &Arc<FockBasis>, codomain: &Arc<FockBasis>) -> Result<SparseOperator> {
        self.build_with(domain, codomain, false)
    }

    /// Tabulate, silently dropping images outside `codomain`.
    pub fn build_truncated(&self, domain: &Arc<FockBasis>, codomain: &Arc<FockBasis>) -> Result<SparseOperator> {
        self.build_with(domain, codomain, true)
    }

    fn build_with(&self, domain: &Arc<FockBasis>, codomain: &Arc<FockBasis>, truncate: bool) -> Result<SparseOperator> {
        if domain.convention() != codomain.convention() {
            return Err(Error::BasisMismatch("domain and codomain conventions differ".into()));
        }
        let monos = self.expand(domain.convention());
        let mut trips = Vec::new();
        for (j, occ) in domain.states().iter().enumerate() {
            for (coef, mono) in &monos {
                let Some((img, amp)) = apply_monomial(occ.0, mono) else {
                    continue;
                };
                let img = Occupation(img);
                match codomain.index_of(&img) {
                    Some(i) => trips.push((i, j, coef * amp)),
                    None if truncate => {}
                    None => return Err(Error::ImageOutsideBasis { state: img.0 }),
                }
            }
        }
        Ok(SparseOperator::new(
            domain.clone(),
            codomain.clone(),
            CsrMatrix::from_triplets(codomain.dim(), domain.dim(), trips),
        ))
    }

    /// Tabulate with the smallest codomain that holds every image: the
    /// magnetization band shifted by what the polynomial can change, and the
    /// particle number shifted by its net creation count.
    pub fn build_auto(&self, domain: &Arc<FockBasis>) -> Result<SparseOperator> {
        let codomain = self.auto_codomain(domain)?;
        self.build(domain, &codomain)
    }

    fn auto_codomain(&self, domain: &Arc<FockBasis>) -> Result<Arc<FockBasis>> {
        let (lo, hi, dn) = self.shifts();
        let n = domain.total_n() as i64 + dn;
        if n < 0 {
            return Err(Error::InvalidParameter {
                name: "particle number",
                reason: "operator annihilates more particles than present".into(),
            });
        }
        let filter = match domain.filter() {
            BlockFilter::Full => BlockFilter::Full,
            f @ (BlockFilter::FixedL(_) | BlockFilter::LBand(..)) => {
                if lo == 0 && hi == 0 && dn == 0 {
                    f
                } else {
                    f.widened(lo, hi)
                }
            }
            BlockFilter::Excitations(_) => {
                return Err(Error::BasisMismatch("excitation-filtered bases need an explicit codomain".into()))
            }
        };
        if dn == 0 && filter == domain.filter() {
            return Ok(domain.clone());
        }
        Ok(Arc::new(FockBasis::enumerate(n as u32, domain.convention(), filter)?))
    }

    /// Tabulate a hermitian, number- and magnetization-preserving polynomial
    /// on a single basis and flag it hermitian.
    pub fn build_hermitian(&self, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
        self.build(basis, basis)?.into_hermitian()
    }
}

fn apply_monomial(mut occ: [u32; 3], ops: &[(usize, bool)]) -> Option<([u32; 3], f64)> {
    // product of integers first, one square root at the end
    let mut prod = 1.0;
    for &(slot, create) in ops.iter().rev() {
        if create {
            occ[slot] += 1;
            prod *= occ[slot] as f64;
        } else {
            if occ[slot] == 0 {
                return None;
            }
            prod *= occ[slot] as f64;
            occ[slot] -= 1;
        }
    }
    Some((occ, prod.sqrt()))
}

impl Add for OpExpr {
    type Output = OpExpr;
    fn add(mut self, rhs: OpExpr) -> OpExpr {
        self.terms.extend(rhs.terms);
        self
    }
}

impl Sub for OpExpr {
    type Output = OpExpr;
    fn sub(self, rhs: OpExpr) -> OpExpr {
        self + (-rhs)
    }
}

impl Neg for OpExpr {
    type Output = OpExpr;
    fn neg(self) -> OpExpr {
        self.scaled(C64::new(-1.0, 0.0))
    }
}

impl Mul for OpExpr {
    type Output = OpExpr;
    fn mul(self, rhs: OpExpr) -> OpExpr {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (a, ma) in &self.terms {
            for (b, mb) in &rhs.terms {
                let mut m = ma.clone();
                m.extend_from_slice(mb);
                terms.push((a * b, m));
            }
        }
        OpExpr { terms }
    }
}

impl Mul<OpExpr> for f64 {
    type Output = OpExpr;
    fn mul(self, rhs: OpExpr) -> OpExpr {
        rhs.scaled(C64::new(self, 0.0))
    }
}

impl Mul<OpExpr> for C64 {
    type Output = OpExpr;
    fn mul(self, rhs: OpExpr) -> OpExpr {
        rhs.scaled(self)
    }
}

/// Generator polynomials. Circular modes stand for `tau_+`, `sigma`, `tau_-`.
pub mod expr {
    use super::*;
    use Mode::{Minus, Plus, Zero, X, Y};

    fn h(m: Mode, n: Mode) -> OpExpr {
        OpExpr::hop(m, n)
    }

    const S2: f64 = std::f64::consts::SQRT_2;

    pub fn n_vib() -> OpExpr {
        OpExpr::number(Plus) + OpExpr::number(Minus)
    }
    pub fn l() -> OpExpr {
        OpExpr::number(Plus) - OpExpr::number(Minus)
    }
    pub fn q_plus() -> OpExpr {
        S2 * h(Plus, Minus)
    }
    pub fn q_minus() -> OpExpr {
        S2 * h(Minus, Plus)
    }
    pub fn n_s() -> OpExpr {
        OpExpr::number(Zero)
    }
    pub fn d_plus() -> OpExpr {
        S2 * (h(Plus, Zero) - h(Zero, Minus))
    }
    pub fn d_minus() -> OpExpr {
        S2 * (-h(Minus, Zero) + h(Zero, Plus))
    }
    pub fn r_plus() -> OpExpr {
        S2 * (h(Plus, Zero) + h(Zero, Minus))
    }
    pub fn r_minus() -> OpExpr {
        S2 * (h(Minus, Zero) + h(Zero, Plus))
    }
    pub fn n_total() -> OpExpr {
        n_vib() + n_s()
    }

    pub fn jx() -> OpExpr {
        FRAC_1_SQRT_2 * (h(Zero, Plus) + h(Zero, Minus) + h(Plus, Zero) + h(Minus, Zero))
    }
    pub fn jy() -> OpExpr {
        C64::new(0.0, FRAC_1_SQRT_2) * (-h(Zero, Plus) + h(Zero, Minus) + h(Plus, Zero) - h(Minus, Zero))
    }
    pub fn jz() -> OpExpr {
        l()
    }
    pub fn q_xy() -> OpExpr {
        I * (h(Plus, Minus) - h(Minus, Plus))
    }
    pub fn q_yz() -> OpExpr {
        C64::new(0.0, FRAC_1_SQRT_2) * (-h(Zero, Minus) + h(Minus, Zero) + h(Plus, Zero) - h(Zero, Plus))
    }
    pub fn q_zx() -> OpExpr {
        FRAC_1_SQRT_2 * (-h(Zero, Minus) - h(Minus, Zero) + h(Plus, Zero) + h(Zero, Plus))
    }
    pub fn y() -> OpExpr {
        (1.0 / 3f64.sqrt()) * (OpExpr::number(Plus) + OpExpr::number(Minus) - 2.0 * OpExpr::number(Zero))
    }
    pub fn d_xy() -> OpExpr {
        h(Plus, Minus) + h(Minus, Plus)
    }

    /// Schwinger triple built from modes `a` (pole) and `b`:
    /// `((a^dag b + b^dag a)/2, (a^dag b - b^dag a)/2i, (n_a - n_b)/2)`.
    pub fn schwinger(a: Mode, b: Mode) -> [OpExpr; 3] {
        [
            0.5 * (h(a, b) + h(b, a)),
            C64::new(0.0, -0.5) * (h(a, b) - h(b, a)),
            0.5 * (OpExpr::number(a) - OpExpr::number(b)),
        ]
    }

    pub fn mode_x() -> [OpExpr; 3] {
        schwinger(Zero, X)
    }
    pub fn mode_y() -> [OpExpr; 3] {
        schwinger(Zero, Y)
    }
    pub fn mode_l() -> [OpExpr; 3] {
        schwinger(Plus, Minus)
    }
}

/// Which SU(2) subalgebra to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subalgebra {
    ModeX,
    ModeY,
    L,
}

/// Ladder operator on `basis` (N particles) into the N -/+ 1 space of the
/// same convention.
pub fn ladder(mode: Mode, kind: LadderKind, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    if mode.slot(basis.convention()).is_none() {
        return Err(Error::ModeAbsent {
            mode: mode.name(),
            convention: basis.convention().name(),
        });
    }
    OpExpr::ladder(mode, kind).build_auto(basis)
}

/// The U(3) generators in circular form plus the O(3) Casimir `W^2`.
#[derive(Debug, Clone)]
pub struct U3Generators {
    pub n: SparseOperator,
    pub l: SparseOperator,
    pub q_plus: SparseOperator,
    pub q_minus: SparseOperator,
    pub n_s: SparseOperator,
    pub d_plus: SparseOperator,
    pub d_minus: SparseOperator,
    pub r_plus: SparseOperator,
    pub r_minus: SparseOperator,
    pub w2: SparseOperator,
}

fn require_circular(basis: &FockBasis, what: &'static str) -> Result<()> {
    if basis.convention() != Convention::Circular {
        return Err(Error::WrongConvention {
            what,
            expected: "circular",
        });
    }
    Ok(())
}

fn shifted_basis(basis: &Arc<FockBasis>, lo: i64, hi: i64) -> Result<Arc<FockBasis>> {
    match basis.filter() {
        BlockFilter::Full | BlockFilter::Excitations(_) => Ok(basis.clone()),
        f => Ok(Arc::new(basis.with_filter(f.widened(lo, hi))?)),
    }
}

pub fn u3_generators(basis: &Arc<FockBasis>) -> Result<U3Generators> {
    require_circular(basis, "U(3) generators")?;
    Ok(U3Generators {
        n: expr::n_vib().build_hermitian(basis)?,
        l: expr::l().build_hermitian(basis)?,
        q_plus: expr::q_plus().build_auto(basis)?,
        q_minus: expr::q_minus().build_auto(basis)?,
        n_s: expr::n_s().build_hermitian(basis)?,
        d_plus: expr::d_plus().build_auto(basis)?,
        d_minus: expr::d_minus().build_auto(basis)?,
        r_plus: expr::r_plus().build_auto(basis)?,
        r_minus: expr::r_minus().build_auto(basis)?,
        w2: casimir_w2(basis)?,
    })
}

/// `W^2 = (D+ D- + D- D+)/2 + l^2`, assembled from generator matrices
/// through the neighbouring magnetization blocks.
pub fn casimir_w2(basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    if let BlockFilter::Excitations(_) = basis.filter() {
        return Err(Error::BasisMismatch("W^2 is not closed on an excitation-filtered basis".into()));
    }
    let down = shifted_basis(basis, -1, -1)?;
    let up = shifted_basis(basis, 1, 1)?;
    let dm = expr::d_minus().build(basis, &down)?;
    let dp_back = expr::d_plus().build(&down, basis)?;
    let dp = expr::d_plus().build(basis, &up)?;
    let dm_back = expr::d_minus().build(&up, basis)?;
    let l = expr::l().build(basis, basis)?;
    let pair = dp_back.compose(&dm)?.add(&dm_back.compose(&dp)?)?;
    pair.scale_real(0.5).add(&l.compose(&l)?)?.into_hermitian()
}

/// `J^2 = Jx Jx + Jy Jy + Jz Jz`, assembled from generator matrices.
pub fn casimir_j2(basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    if let BlockFilter::Excitations(_) = basis.filter() {
        return Err(Error::BasisMismatch("J^2 is not closed on an excitation-filtered basis".into()));
    }
    let band1 = shifted_basis(basis, -1, 1)?;
    let band2 = shifted_basis(basis, -2, 2)?;
    let mut total: Option<SparseOperator> = None;
    for e in [expr::jx(), expr::jy(), expr::jz()] {
        let first = e.build(basis, &band1)?;
        let second = e.build_truncated(&band1, &band2)?;
        let sq = second.compose(&first)?;
        total = Some(match total {
            None => sq,
            Some(t) => t.add(&sq)?,
        });
    }
    total
        .expect("three terms")
        .restrict_codomain(basis, 1e-12)?
        .into_hermitian()
}

/// SU(3) generators, the spin Casimir and the Zeeman populations.
#[derive(Debug, Clone)]
pub struct Su3Generators {
    pub jx: SparseOperator,
    pub jy: SparseOperator,
    pub jz: SparseOperator,
    pub q_xy: SparseOperator,
    pub q_yz: SparseOperator,
    pub q_zx: SparseOperator,
    pub y: SparseOperator,
    pub d_xy: SparseOperator,
    pub j2: SparseOperator,
    pub n0: SparseOperator,
    pub n_plus1: SparseOperator,
    pub n_minus1: SparseOperator,
}

pub fn su3_generators(basis: &Arc<FockBasis>) -> Result<Su3Generators> {
    require_circular(basis, "SU(3) generators")?;
    Ok(Su3Generators {
        jx: expr::jx().build_auto(basis)?,
        jy: expr::jy().build_auto(basis)?,
        jz: expr::jz().build_hermitian(basis)?,
        q_xy: expr::q_xy().build_auto(basis)?,
        q_yz: expr::q_yz().build_auto(basis)?,
        q_zx: expr::q_zx().build_auto(basis)?,
        y: expr::y().build_hermitian(basis)?,
        d_xy: expr::d_xy().build_auto(basis)?,
        j2: casimir_j2(basis)?,
        n0: OpExpr::number(Mode::Zero).build_hermitian(basis)?,
        n_plus1: OpExpr::number(Mode::Plus).build_hermitian(basis)?,
        n_minus1: OpExpr::number(Mode::Minus).build_hermitian(basis)?,
    })
}

/// One SU(2) triple on `basis`; operators that change magnetization get the
/// widened band as codomain.
pub fn su2_subalgebra(which: Subalgebra, basis: &Arc<FockBasis>) -> Result<[SparseOperator; 3]> {
    let exprs = match which {
        Subalgebra::ModeX => expr::mode_x(),
        Subalgebra::ModeY => expr::mode_y(),
        Subalgebra::L => expr::mode_l(),
    };
    let [a, b, c] = exprs;
    Ok([a.build_auto(basis)?, b.build_auto(basis)?, c.build_auto(basis)?])
}

/// `U = exp(i pi N_0 / 2)`, diagonal with entries `i^{n_0}`.
pub fn rotation_pi_half_mode0(basis: &Arc<FockBasis>) -> SparseOperator {
    let diag: Vec<C64> = basis.states().iter().map(|s| i_pow(s.zero())).collect();
    SparseOperator::new(basis.clone(), basis.clone(), CsrMatrix::from_diagonal(&diag))
}

/// `U J^2 U^dagger` for `U = exp(i pi N_0/2)`.
pub fn j2_rotated(basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    let u = rotation_pi_half_mode0(basis);
    let j2 = casimir_j2(basis)?;
    u.compose(&j2)?.compose(&u.adjoint())?.into_hermitian()
}

pub(crate) fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}
