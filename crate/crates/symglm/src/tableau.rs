//! General linear and Runge-Kutta tableau types, and the registry of every
//! built-in method with its starting triple, finishing rule and invariant
//! structure data.
//!
//! All built-in GLM tableaux have exact rational entries and are validated
//! at registration: involutions, preconsistency, the symmetry blocks, and
//! the starting-condition functionals are checked in rational arithmetic.
//! The one irrational tableau (the Suzuki composition DIRK) and the square
//! roots in two starting triples are carried as tagged floats and checked
//! at 1e-13.

use crate::bseries::{self, StartSeries};
use crate::rational::{rat, rint, Coeff, CoeffMat, Rat, RatMat};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableauError {
    #[error("matrix {0} has wrong shape")]
    Shape(&'static str),
    #[error("{0} is not an involution")]
    NotInvolution(&'static str),
    #[error("P is not a permutation matrix")]
    NotPermutation,
    #[error("V must be diagonal with unimodular entries and V11 = 1")]
    NotZeroStable,
    #[error("first column of U must be the all-ones vector")]
    NotPreconsistent,
    #[error("method is not (L,P)-symmetric for any involutive stage permutation")]
    NotSymmetric,
    #[error("transform matrix is singular or has condition number above 1e12")]
    SingularTransform,
    #[error("operation requires an exact rational tableau")]
    NotExact,
    #[error("abscissae do not match row sums: stage {0}")]
    RowSumMismatch(usize),
}

/// Exact rational view of a GLM tableau (available when every entry is
/// rational). The B-series and exact identity checks run on this.
#[derive(Debug, Clone)]
pub struct RatView {
    pub s: usize,
    pub r: usize,
    pub a: RatMat,
    pub u: RatMat,
    pub b: RatMat,
    pub v: RatMat,
    pub l: RatMat,
    pub p: RatMat,
}

/// Binary64 mirror of a GLM tableau, used by the integrator and the
/// spectral checks.
#[derive(Debug, Clone)]
pub struct GlmFloats {
    pub a: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

/// A general linear method `(A, U, B, V)` with its symmetry pair `(L, P)`.
#[derive(Debug, Clone)]
pub struct GlmTableau {
    pub name: String,
    /// Stage count.
    pub s: usize,
    /// Value count.
    pub r: usize,
    pub a: CoeffMat,
    pub u: CoeffMat,
    pub b: CoeffMat,
    pub v: CoeffMat,
    pub l: CoeffMat,
    pub p: CoeffMat,
    pub declared_order: usize,
    pub declared_stage_order: usize,
    floats: GlmFloats,
}

impl GlmTableau {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        a: CoeffMat,
        u: CoeffMat,
        b: CoeffMat,
        v: CoeffMat,
        l: CoeffMat,
        p: CoeffMat,
        declared_order: usize,
        declared_stage_order: usize,
    ) -> Result<Self, TableauError> {
        let s = a.rows;
        let r = v.rows;
        if a.cols != s {
            return Err(TableauError::Shape("A"));
        }
        if u.rows != s || u.cols != r {
            return Err(TableauError::Shape("U"));
        }
        if b.rows != r || b.cols != s {
            return Err(TableauError::Shape("B"));
        }
        if v.cols != r {
            return Err(TableauError::Shape("V"));
        }
        if l.rows != r || l.cols != r {
            return Err(TableauError::Shape("L"));
        }
        if p.rows != s || p.cols != s {
            return Err(TableauError::Shape("P"));
        }
        let floats = GlmFloats {
            a: a.to_f64(),
            u: u.to_f64(),
            b: b.to_f64(),
            v: v.to_f64(),
            l: l.to_f64(),
            p: p.to_f64(),
        };
        Ok(GlmTableau {
            name: name.to_string(),
            s,
            r,
            a,
            u,
            b,
            v,
            l,
            p,
            declared_order,
            declared_stage_order,
            floats,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.a.is_exact()
            && self.u.is_exact()
            && self.b.is_exact()
            && self.v.is_exact()
            && self.l.is_exact()
            && self.p.is_exact()
    }

    pub fn exact_view(&self) -> Option<RatView> {
        Some(RatView {
            s: self.s,
            r: self.r,
            a: self.a.to_rat()?,
            u: self.u.to_rat()?,
            b: self.b.to_rat()?,
            v: self.v.to_rat()?,
            l: self.l.to_rat()?,
            p: self.p.to_rat()?,
        })
    }

    pub fn floats(&self) -> &GlmFloats {
        &self.floats
    }

    /// True when A is lower triangular, the shape the stepping engine
    /// supports (stages solvable one at a time).
    pub fn is_lower_triangular(&self) -> bool {
        let a = &self.floats.a;
        (0..self.s).all(|i| (i + 1..self.s).all(|j| a[i][j] == 0.0))
    }

    /// Number of implicit stages (nonzero diagonal entries of A).
    pub fn implicit_stages(&self) -> usize {
        (0..self.s).filter(|&i| self.floats.a[i][i] != 0.0).count()
    }

    /// Validate the structural invariants of the canonical form used by
    /// every registered method: L and P involutions, P a permutation, V
    /// diagonal with entries of modulus one and principal entry 1, and the
    /// first column of U all ones.
    pub fn validate_canonical(&self) -> Result<(), TableauError> {
        match self.exact_view() {
            Some(v) => {
                if v.l.mul(&v.l) != RatMat::identity(self.r) {
                    return Err(TableauError::NotInvolution("L"));
                }
                if v.p.mul(&v.p) != RatMat::identity(self.s) {
                    return Err(TableauError::NotInvolution("P"));
                }
                if !v.p.is_permutation() {
                    return Err(TableauError::NotPermutation);
                }
                if !v.v.is_diagonal() {
                    return Err(TableauError::NotZeroStable);
                }
                for i in 0..self.r {
                    if v.v[(i, i)].abs() != Rat::one() {
                        return Err(TableauError::NotZeroStable);
                    }
                }
                if v.v[(0, 0)] != Rat::one() {
                    return Err(TableauError::NotZeroStable);
                }
                for i in 0..self.s {
                    if v.u[(i, 0)] != Rat::one() {
                        return Err(TableauError::NotPreconsistent);
                    }
                }
            }
            None => {
                let f = self.floats();
                let tol = 1e-13;
                for i in 0..self.r {
                    for j in 0..self.r {
                        let ll: f64 = (0..self.r).map(|k| f.l[i][k] * f.l[k][j]).sum();
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (ll - target).abs() > tol {
                            return Err(TableauError::NotInvolution("L"));
                        }
                        if i != j && f.v[i][j].abs() > tol {
                            return Err(TableauError::NotZeroStable);
                        }
                    }
                    if (f.v[i][i].abs() - 1.0).abs() > tol {
                        return Err(TableauError::NotZeroStable);
                    }
                }
                if (f.v[0][0] - 1.0).abs() > tol {
                    return Err(TableauError::NotZeroStable);
                }
                for i in 0..self.s {
                    if (f.u[i][0] - 1.0).abs() > tol {
                        return Err(TableauError::NotPreconsistent);
                    }
                }
            }
        }
        Ok(())
    }
}

/// The four blocks of the symmetry condition, exact form:
/// `[A + PAP - U V^-1 B,  PU - ULV;  BP - VLB,  L - VLV]`.
pub fn symmetry_blocks_exact(m: &RatView) -> Option<[RatMat; 4]> {
    let vinv = m.v.inverse()?;
    let b1 = m.a.add(&m.p.mul(&m.a).mul(&m.p)).sub(&m.u.mul(&vinv).mul(&m.b));
    let b2 = m.p.mul(&m.u).sub(&m.u.mul(&m.l).mul(&m.v));
    let b3 = m.b.mul(&m.p).sub(&m.v.mul(&m.l).mul(&m.b));
    let b4 = m.l.sub(&m.v.mul(&m.l).mul(&m.v));
    Some([b1, b2, b3, b4])
}

/// Max-norm of the symmetry blocks in binary64 (used for tableaux with
/// irrational entries).
pub fn symmetry_residual_f64(m: &GlmTableau) -> Option<f64> {
    use crate::linalg::CMat;
    let f = m.floats();
    let a = CMat::from_real(&f.a);
    let u = CMat::from_real(&f.u);
    let b = CMat::from_real(&f.b);
    let v = CMat::from_real(&f.v);
    let l = CMat::from_real(&f.l);
    let p = CMat::from_real(&f.p);
    let vinv = v.solve_mat(&CMat::identity(m.r))?;
    let b1 = a.add(&p.mul(&a).mul(&p)).sub(&u.mul(&vinv).mul(&b));
    let b2 = p.mul(&u).sub(&u.mul(&l).mul(&v));
    let b3 = b.mul(&p).sub(&v.mul(&l).mul(&b));
    let b4 = l.sub(&v.mul(&l).mul(&v));
    Some(
        b1.max_abs()
            .max(b2.max_abs())
            .max(b3.max_abs())
            .max(b4.max_abs()),
    )
}

/// A Runge-Kutta tableau. Abscissae follow the row-sum convention,
/// `c = A 1`, enforced by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    pub a: Vec<Vec<Coeff>>,
    pub b: Vec<Coeff>,
    pub c: Vec<Coeff>,
}

impl RkTableau {
    pub fn new(a: Vec<Vec<Coeff>>, b: Vec<Coeff>) -> Self {
        let c = a
            .iter()
            .map(|row| row.iter().fold(Coeff::zero(), |acc, &x| acc + x))
            .collect();
        RkTableau { a, b, c }
    }

    pub fn from_i128(a: &[&[(i128, i128)]], b: &[(i128, i128)]) -> Self {
        let am = a
            .iter()
            .map(|row| row.iter().map(|&(n, d)| Coeff::Exact(rat(n, d))).collect())
            .collect();
        let bv = b.iter().map(|&(n, d)| Coeff::Exact(rat(n, d))).collect();
        RkTableau::new(am, bv)
    }

    pub fn s(&self) -> usize {
        self.b.len()
    }

    pub fn is_exact(&self) -> bool {
        self.a.iter().flatten().all(Coeff::is_exact) && self.b.iter().all(Coeff::is_exact)
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.s()).all(|i| (i + 1..self.s()).all(|j| self.a[i][j].to_f64() == 0.0))
    }

    pub fn a_f64(&self) -> Vec<Vec<f64>> {
        self.a
            .iter()
            .map(|r| r.iter().map(Coeff::to_f64).collect())
            .collect()
    }

    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(Coeff::to_f64).collect()
    }

    /// The adjoint (exact inverse) tableau:
    /// `Ahat = PAP - 1 b'P`, `bhat = -b'P`, with P the stage reversal.
    pub fn adjoint(&self) -> RkTableau {
        let s = self.s();
        let bp: Vec<Coeff> = (0..s).map(|j| self.b[s - 1 - j]).collect();
        let mut a = vec![vec![Coeff::zero(); s]; s];
        for i in 0..s {
            for j in 0..s {
                a[i][j] = self.a[s - 1 - i][s - 1 - j] - bp[j];
            }
        }
        let b = bp.iter().map(|&x| -x).collect();
        RkTableau::new(a, b)
    }

    /// Check whether `other` generates the same map as `self.adjoint()`,
    /// allowing an arbitrary reordering of stages. Exact where entries are
    /// exact, 1e-13 otherwise.
    pub fn is_inverse_pair(&self, other: &RkTableau) -> bool {
        let adj = self.adjoint();
        if adj.s() != other.s() {
            return false;
        }
        let s = adj.s();
        let mut perm: Vec<usize> = (0..s).collect();
        let eq = |x: Coeff, y: Coeff| match (x, y) {
            (Coeff::Exact(a), Coeff::Exact(b)) => a == b,
            (a, b) => (a.to_f64() - b.to_f64()).abs() <= 1e-13,
        };
        loop {
            let matches = (0..s).all(|i| {
                eq(adj.b[i], other.b[perm[i]])
                    && (0..s).all(|j| eq(adj.a[i][j], other.a[perm[i]][perm[j]]))
            });
            if matches {
                return true;
            }
            if !next_permutation(&mut perm) {
                return false;
            }
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// How a starting triple turns its forward map `R_h` into the r=2 input
/// vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartVariant {
    /// `y1 = (R_h + R_-h) y0 / 2`, `y2 = C (R_h - R_-h) y0 / 2`.
    Pair,
    /// `y1 = y0`, `y2 = (R_h - R_-h) y0 / 2`.
    HalfDifference,
    /// `y1 = y0`, `y2 = R_h y0 - y0`.
    Shift,
}

/// A `[C, forward, inverse]` starting/finishing construction.
#[derive(Debug, Clone)]
pub struct StartingTriple {
    pub label: String,
    pub c_scale: Coeff,
    pub forward: RkTableau,
    /// Tableau used by the finishing map; absent when the finishing rule
    /// reads off the first component.
    pub inverse: Option<RkTableau>,
    pub variant: StartVariant,
    /// Set at registration: the triple reproduces the method's starting
    /// conditions (and, when an inverse is present, is an exact inverse
    /// pair). Triples that fail are kept but flagged.
    pub verified: bool,
}

/// Finishing rule of a method entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinishRule {
    /// `y = (Rhat_h(y1 + y2/C) + Rhat_-h(y1 - y2/C)) / 2` using the
    /// triple's inverse tableau.
    TripleInverse,
    /// `y = y1`.
    FirstComponent,
}

/// How the method is started.
#[derive(Debug, Clone)]
pub enum StartScheme {
    /// Single-value methods start from `y^[0] = (y0)`.
    Identity,
    Triple(StartingTriple),
}

/// G-symplecticity structure data `(G, D)`.
#[derive(Debug, Clone)]
pub struct GsymData {
    pub g: CoeffMat,
    pub d: CoeffMat,
}

/// A registered method: tableau, starting and finishing data, structure
/// matrices, and the starting B-series the order checks verify against.
#[derive(Debug, Clone)]
pub struct MethodEntry {
    pub name: String,
    pub tableau: GlmTableau,
    pub start: StartScheme,
    /// Alternative starting triples (kept for reference; some printed
    /// alternates fail their own order conditions and carry
    /// `verified: false`).
    pub alternates: Vec<StartingTriple>,
    pub finishing: FinishRule,
    pub gsym: Option<GsymData>,
    /// Starting series through order 4 (order-5 part is derived on demand).
    pub start_series: StartSeries,
    /// Equivalent Runge-Kutta form for single-value comparator methods.
    pub rk_form: Option<RkTableau>,
}

impl MethodEntry {
    pub fn is_symmetric_glm(&self) -> bool {
        true // every registered method is symmetric; kept for clarity at call sites
    }
}

/// Immutable method registry; safe to share across threads.
pub struct Registry {
    entries: Vec<MethodEntry>,
}

impl Registry {
    pub fn entries(&self) -> &[MethodEntry] {
        &self.entries
    }

    pub fn lookup(&self, name: &str) -> Option<&MethodEntry> {
        self.entries
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }
}

/// The global registry of every built-in method.
pub fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(build_registry)
}

/// Apply the coordinate change `T`: `(A, UT, T^-1 B, T^-1 V T)`, with `L`
/// mapped to `T^-1 L T`. Requires an exact tableau and a well-conditioned
/// `T`.
pub fn equivalence_transform(m: &GlmTableau, t: &RatMat) -> Result<GlmTableau, TableauError> {
    let view = m.exact_view().ok_or(TableauError::NotExact)?;
    if t.rows != m.r || t.cols != m.r {
        return Err(TableauError::Shape("T"));
    }
    let tinv = t.inverse().ok_or(TableauError::SingularTransform)?;
    // 1-norm condition estimate in floats.
    let norm1 = |x: &RatMat| -> f64 {
        (0..x.cols)
            .map(|j| {
                (0..x.rows)
                    .map(|i| x[(i, j)].abs().to_f64().unwrap())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    if norm1(t) * norm1(&tinv) > 1e12 {
        return Err(TableauError::SingularTransform);
    }
    GlmTableau::new(
        &format!("{}~T", m.name),
        CoeffMat::exact(&view.a),
        CoeffMat::exact(&view.u.mul(t)),
        CoeffMat::exact(&tinv.mul(&view.b)),
        CoeffMat::exact(&tinv.mul(&view.v).mul(t)),
        CoeffMat::exact(&tinv.mul(&view.l).mul(t)),
        CoeffMat::exact(&view.p),
        m.declared_order,
        m.declared_stage_order,
    )
}

// ---------------------------------------------------------------------------
// Registry construction
// ---------------------------------------------------------------------------

fn diag2(a: Rat, b: Rat) -> CoeffMat {
    CoeffMat::exact(&RatMat::diag(&[a, b]))
}

fn reversal(n: usize) -> CoeffMat {
    CoeffMat::exact(&RatMat::reversal(n))
}

/// Verify eq-13 symmetry with the stage-reversing permutation; on failure
/// search all involutive stage permutations before giving up.
fn resolve_symmetry_permutation(m: &mut GlmTableau) -> Result<(), TableauError> {
    let residual_zero = |m: &GlmTableau| -> bool {
        match m.exact_view() {
            Some(v) => symmetry_blocks_exact(&v)
                .map(|b| b.iter().all(RatMat::is_zero))
                .unwrap_or(false),
            None => symmetry_residual_f64(m).map(|r| r <= 1e-13).unwrap_or(false),
        }
    };
    if residual_zero(m) {
        return Ok(());
    }
    let s = m.s;
    let mut stage_perm: Vec<usize> = (0..s).collect();
    loop {
        // Involutive permutations only.
        if (0..s).all(|i| stage_perm[stage_perm[i]] == i) {
            let mut pm = RatMat::zeros(s, s);
            for (i, &j) in stage_perm.iter().enumerate() {
                pm[(i, j)] = rint(1);
            }
            let candidate = CoeffMat::exact(&pm);
            let old = std::mem::replace(&mut m.p, candidate);
            m.floats.p = m.p.to_f64();
            if residual_zero(m) {
                return Ok(());
            }
            m.p = old;
            m.floats.p = m.p.to_f64();
        }
        if !next_permutation(&mut stage_perm) {
            return Err(TableauError::NotSymmetric);
        }
    }
}

/// Check a triple against the method's registered starting series:
/// the four x functionals must match, and for the shift and
/// half-difference variants the full series through order 4 must match.
/// Pair variants additionally need the inverse tableau to be the exact
/// inverse of the forward one.
fn triple_is_verified(triple: &StartingTriple, series: &StartSeries) -> bool {
    use crate::trees::tree_table;
    let table = tree_table();
    let tol = 1e-13;
    let matches = |got: Coeff, want: Rat| match got {
        Coeff::Exact(g) => g == want,
        Coeff::Surd(v) => (v - want.to_f64().unwrap()).abs() <= tol,
    };
    for id in table.up_to_order(4) {
        let order = table.trees[id].order;
        for comp in 0..2 {
            // Order-4 principal coefficients do not influence the start
            // (the method is order 4); skip them like the x conditions do.
            if comp == 0 && order == 4 {
                continue;
            }
            let got = bseries::triple_series_coeff(triple, comp, id);
            let want = series.components[comp].get(id);
            if !matches(got, want) {
                return false;
            }
        }
    }
    if let Some(inv) = &triple.inverse {
        if !triple.forward.is_inverse_pair(inv) {
            return false;
        }
    }
    true
}

struct GlmSpecParts {
    name: &'static str,
    a: CoeffMat,
    u: CoeffMat,
    b: CoeffMat,
    order: usize,
    stage_order: usize,
    l_second: i128,
}

/// Assemble and validate an r=2 method with V = diag(1, -1) and
/// L = diag(1, l_second).
fn glm2(parts: GlmSpecParts) -> GlmTableau {
    let s = parts.a.rows;
    let mut m = GlmTableau::new(
        parts.name,
        parts.a,
        parts.u,
        parts.b,
        diag2(rint(1), rint(-1)),
        diag2(rint(1), rint(parts.l_second)),
        reversal(s),
        parts.order,
        parts.stage_order,
    )
    .expect("registry tableau shape");
    m.validate_canonical().expect("registry tableau canonical form");
    resolve_symmetry_permutation(&mut m).expect("registry tableau symmetry");
    m
}

fn entry(
    tableau: GlmTableau,
    start: StartScheme,
    alternates: Vec<StartingTriple>,
    finishing: FinishRule,
    gsym: Option<GsymData>,
    start_series: StartSeries,
    rk_form: Option<RkTableau>,
) -> MethodEntry {
    let name = tableau.name.clone();
    let start = match start {
        StartScheme::Triple(mut t) => {
            t.verified = triple_is_verified(&t, &start_series);
            assert!(
                t.verified,
                "primary starting triple of {name} fails its order conditions"
            );
            StartScheme::Triple(t)
        }
        s => s,
    };
    let alternates = alternates
        .into_iter()
        .map(|mut t| {
            t.verified = triple_is_verified(&t, &start_series);
            t
        })
        .collect();
    MethodEntry {
        name,
        tableau,
        start,
        alternates,
        finishing,
        gsym,
        start_series,
        rk_form,
    }
}

fn surd(mult: Rat, root: f64) -> Coeff {
    Coeff::Surd(mult.to_f64().unwrap() * root.sqrt())
}

fn method_4123a() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4123A",
        a: CoeffMat::from_i128(&[
            &[(1, 6), (0, 1), (0, 1)],
            &[(1, 6), (1, 6), (0, 1)],
            &[(1, 3), (2, 3), (1, 6)],
        ]),
        u: CoeffMat::from_i128(&[&[(1, 1), (-1, 3)], &[(1, 1), (1, 3)], &[(1, 1), (-1, 3)]]),
        b: CoeffMat::from_i128(&[
            &[(1, 4), (1, 2), (1, 4)],
            &[(1, 4), (1, 2), (1, 4)],
        ]),
        order: 4,
        stage_order: 1,
        l_second: -1,
    });
    let series = StartSeries::from_x_vector(
        [rat(1, 2), rat(1, 48), rat(-1, 16), rat(-1, 32)],
        Rat::zero(),
        [Rat::zero(); 4],
    );
    let primary = StartingTriple {
        label: "primary".into(),
        c_scale: Coeff::Exact(rint(-12)),
        forward: RkTableau::from_i128(
            &[&[(1, 4), (0, 1)], &[(1, 12), (-1, 12)]],
            &[(1, 12), (-1, 8)],
        ),
        inverse: Some(RkTableau::from_i128(
            &[&[(1, 24), (0, 1)], &[(1, 8), (1, 6)]],
            &[(1, 8), (-1, 12)],
        )),
        variant: StartVariant::Pair,
        verified: false,
    };
    // Printed explicit alternate; its weights do not satisfy the starting
    // order conditions as printed, so it stays flagged unverified.
    let alt_explicit = StartingTriple {
        label: "explicit-3stage".into(),
        c_scale: Coeff::Exact(rat(4, 7)),
        forward: RkTableau::from_i128(
            &[
                &[(0, 1), (0, 1), (0, 1)],
                &[(3, 4), (0, 1), (0, 1)],
                &[(1, 4), (25, 28), (0, 1)],
            ],
            &[(3, 4), (65, 324), (-49, 648)],
        ),
        inverse: Some(RkTableau::from_i128(
            &[
                &[(49, 648), (433, 567), (0, 1)],
                &[(49, 648), (-65, 324), (0, 1)],
                &[(49, 648), (-65, 324), (-3, 4)],
            ],
            &[(49, 648), (-65, 324), (-3, 4)],
        )),
        variant: StartVariant::Pair,
        verified: false,
    };
    let s15 = 15.0_f64;
    let alt_surd = StartingTriple {
        label: "sqrt15-2stage".into(),
        c_scale: surd(rat(2, 5), s15),
        forward: RkTableau::new(
            vec![
                vec![surd(rat(31, 180), s15), surd(rat(-4, 45), s15)],
                vec![surd(rat(169, 720), s15), surd(rat(-4, 45), s15)],
            ],
            vec![surd(rat(31, 180), s15), surd(rat(-4, 45), s15)],
        ),
        inverse: Some(RkTableau::new(
            vec![
                vec![Coeff::zero(), Coeff::zero()],
                vec![surd(rat(1, 16), s15), Coeff::zero()],
            ],
            vec![surd(rat(-31, 180), s15), surd(rat(4, 45), s15)],
        )),
        variant: StartVariant::Pair,
        verified: false,
    };
    entry(
        tableau,
        StartScheme::Triple(primary),
        vec![alt_explicit, alt_surd],
        FinishRule::TripleInverse,
        None,
        series,
        None,
    )
}

fn method_4123b() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4123B",
        a: CoeffMat::from_i128(&[
            &[(1, 4), (0, 1), (0, 1)],
            &[(1, 2), (0, 1), (0, 1)],
            &[(1, 2), (0, 1), (1, 4)],
        ]),
        u: CoeffMat::from_i128(&[&[(1, 1), (-1, 6)], &[(1, 1), (-1, 6)], &[(1, 1), (-1, 6)]]),
        b: CoeffMat::from_i128(&[
            &[(1, 3), (1, 3), (1, 3)],
            &[(1, 1), (-2, 1), (1, 1)],
        ]),
        order: 4,
        stage_order: 1,
        l_second: -1,
    });
    let series = StartSeries::from_x_vector(
        [Rat::zero(), rat(-1, 48), rat(1, 16), rat(1, 16)],
        Rat::zero(),
        [Rat::zero(); 4],
    );
    let primary = StartingTriple {
        label: "primary".into(),
        c_scale: Coeff::Exact(rint(-12)),
        forward: RkTableau::from_i128(
            &[
                &[(0, 1), (0, 1), (0, 1)],
                &[(1, 24), (23, 24), (0, 1)],
                &[(1, 24), (1, 24), (2, 3)],
            ],
            &[(1, 24), (1, 24), (-1, 12)],
        ),
        inverse: Some(RkTableau::from_i128(
            &[
                &[(3, 4), (0, 1), (0, 1)],
                &[(1, 12), (11, 12), (0, 1)],
                &[(1, 12), (-1, 24), (-1, 24)],
            ],
            &[(1, 12), (-1, 24), (-1, 24)],
        )),
        variant: StartVariant::Pair,
        verified: false,
    };
    entry(
        tableau,
        StartScheme::Triple(primary),
        vec![],
        FinishRule::TripleInverse,
        None,
        series,
        None,
    )
}

fn method_4123c() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4123C",
        a: CoeffMat::from_i128(&[
            &[(0, 1), (0, 1), (0, 1)],
            &[(7, 12), (5, 12), (0, 1)],
            &[(1, 12), (-1, 6), (1, 12)],
        ]),
        u: CoeffMat::from_i128(&[&[(1, 1), (1, 1)], &[(1, 1), (-1, 1)], &[(1, 1), (1, 1)]]),
        b: CoeffMat::from_i128(&[
            &[(1, 3), (1, 3), (1, 3)],
            &[(1, 4), (1, 2), (1, 4)],
        ]),
        order: 4,
        stage_order: 1,
        l_second: -1,
    });
    let series = StartSeries::from_x_vector(
        [rat(1, 2), rat(-1, 24), rat(-1, 8), rat(-1, 48)],
        Rat::zero(),
        [Rat::zero(); 4],
    );
    let primary = StartingTriple {
        label: "primary".into(),
        c_scale: Coeff::Exact(rint(12)),
        forward: RkTableau::from_i128(
            &[&[(0, 1), (0, 1)], &[(5, 24), (1, 24)]],
            &[(5, 24), (-1, 6)],
        ),
        inverse: Some(RkTableau::from_i128(
            &[&[(5, 24), (0, 1)], &[(1, 6), (-5, 24)]],
            &[(1, 6), (-5, 24)],
        )),
        variant: StartVariant::Pair,
        verified: false,
    };
    entry(
        tableau,
        StartScheme::Triple(primary),
        vec![],
        FinishRule::TripleInverse,
        None,
        series,
        None,
    )
}

fn method_4223a() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4223A",
        a: CoeffMat::from_i128(&[
            &[(1, 8), (0, 1), (0, 1)],
            &[(0, 1), (1, 4), (0, 1)],
            &[(1, 4), (3, 4), (1, 8)],
        ]),
        u: CoeffMat::from_i128(&[&[(1, 1), (-1, 2)], &[(1, 1), (1, 1)], &[(1, 1), (-1, 2)]]),
        b: CoeffMat::from_i128(&[
            &[(1, 6), (2, 3), (1, 6)],
            &[(1, 6), (1, 6), (1, 6)],
        ]),
        order: 4,
        stage_order: 2,
        l_second: -1,
    });
    let series = StartSeries::from_x_vector(
        [rat(1, 4), Rat::zero(), rat(-1, 48), rat(-1, 96)],
        Rat::zero(),
        [Rat::zero(); 4],
    );
    let primary = StartingTriple {
        label: "primary".into(),
        c_scale: Coeff::Exact(rint(1)),
        forward: RkTableau::from_i128(
            &[
                &[(0, 1), (0, 1), (0, 1)],
                &[(1, 4), (0, 1), (0, 1)],
                &[(0, 1), (1, 4), (0, 1)],
            ],
            &[(7, 12), (-1, 6), (-1, 6)],
        ),
        inverse: None,
        variant: StartVariant::HalfDifference,
        verified: false,
    };
    entry(
        tableau,
        StartScheme::Triple(primary),
        vec![],
        FinishRule::FirstComponent,
        None,
        series,
        None,
    )
}

fn method_4124a() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4124A",
        a: CoeffMat::from_i128(&[
            &[(0, 1), (0, 1), (0, 1), (0, 1)],
            &[(0, 1), (1, 4), (0, 1), (0, 1)],
            &[(0, 1), (1, 2), (1, 4), (0, 1)],
            &[(0, 1), (1, 2), (1, 2), (0, 1)],
        ]),
        u: CoeffMat::from_i128(&[
            &[(1, 1), (1, 6)],
            &[(1, 1), (1, 6)],
            &[(1, 1), (1, 6)],
            &[(1, 1), (1, 6)],
        ]),
        b: CoeffMat::from_i128(&[
            &[(-1, 6), (2, 3), (2, 3), (-1, 6)],
            &[(-1, 1), (1, 1), (1, 1), (-1, 1)],
        ]),
        order: 4,
        stage_order: 1,
        l_second: -1,
    });
    let series = StartSeries::from_x_vector(
        [Rat::zero(), rat(-1, 24), rat(-3, 16), rat(-1, 16)],
        Rat::zero(),
        [Rat::zero(); 4],
    );
    let primary = StartingTriple {
        label: "primary".into(),
        c_scale: Coeff::Exact(rint(18)),
        forward: RkTableau::from_i128(
            &[&[(0, 1), (0, 1)], &[(1, 6), (1, 12)]],
            &[(1, 6), (-1, 6)],
        ),
        inverse: Some(RkTableau::from_i128(
            &[&[(1, 4), (0, 1)], &[(1, 6), (-1, 6)]],
            &[(1, 6), (-1, 6)],
        )),
        variant: StartVariant::Pair,
        verified: false,
    };
    entry(
        tableau,
        StartScheme::Triple(primary),
        vec![],
        FinishRule::TripleInverse,
        None,
        series,
        None,
    )
}

fn method_4124b() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4124B",
        a: CoeffMat::from_i128(&[
            &[(1, 6), (0, 1), (0, 1), (0, 1)],
            &[(1, 12), (1, 12), (0, 1), (0, 1)],
            &[(1, 12), (1, 6), (1, 12), (0, 1)],
            &[(1, 3), (-1, 3), (-1, 3), (1, 6)],
        ]),
        u: CoeffMat::from_i128(&[
            &[(1, 1), (1, 1)],
            &[(1, 1), (1, 2)],
            &[(1, 1), (1, 2)],
            &[(1, 1), (1, 1)],
        ]),
        b: CoeffMat::from_i128(&[
            &[(-1, 6), (2, 3), (2, 3), (-1, 6)],
            &[(-1, 2), (1, 1), (1, 1), (-1, 2)],
        ]),
        order: 4,
        stage_order: 1,
        l_second: -1,
    });
    let series = StartSeries::from_x_vector(
        [rat(1, 2), rat(-1, 24), rat(-19, 144), rat(-1, 36)],
        Rat::zero(),
        [Rat::zero(); 4],
    );
    let s38 = 38.0_f64;
    let primary = StartingTriple {
        label: "primary".into(),
        c_scale: surd(rint(2), s38),
        forward: RkTableau::new(
            vec![
                vec![Coeff::zero(), Coeff::zero()],
                vec![surd(rat(5, 152), s38), surd(rat(1, 114), s38)],
            ],
            vec![surd(rat(5, 152), s38), surd(rat(-1, 38), s38)],
        ),
        inverse: Some(RkTableau::new(
            vec![
                vec![surd(rat(2, 57), s38), Coeff::zero()],
                vec![surd(rat(1, 38), s38), surd(rat(-5, 152), s38)],
            ],
            vec![surd(rat(1, 38), s38), surd(rat(-5, 152), s38)],
        )),
        variant: StartVariant::Pair,
        verified: false,
    };
    let gsym = GsymData {
        g: CoeffMat::from_i128(&[&[(1, 1), (0, 1)], &[(0, 1), (-1, 3)]]),
        d: CoeffMat::exact(&RatMat::diag(&[rat(-1, 6), rat(2, 3), rat(2, 3), rat(-1, 6)])),
    };
    entry(
        tableau,
        StartScheme::Triple(primary),
        vec![],
        FinishRule::TripleInverse,
        Some(gsym),
        series,
        None,
    )
}

/// Shared explicit starting map of the three L = I methods:
/// `y2 = R_h y0 - y0`.
fn shift_start_4124() -> StartingTriple {
    StartingTriple {
        label: "primary".into(),
        c_scale: Coeff::Exact(rint(1)),
        forward: RkTableau::from_i128(
            &[
                &[(0, 1), (0, 1), (0, 1), (0, 1)],
                &[(-1, 2), (0, 1), (0, 1), (0, 1)],
                &[(5, 6), (-1, 3), (0, 1), (0, 1)],
                &[(4, 3), (-5, 6), (1, 2), (0, 1)],
            ],
            &[(1, 4), (0, 1), (-1, 3), (1, 12)],
        ),
        inverse: None,
        variant: StartVariant::Shift,
        verified: false,
    }
}

fn series_4124_shift() -> StartSeries {
    StartSeries::from_x_vector(
        [Rat::zero(); 4],
        rat(-1, 12),
        [rat(1, 24), rat(1, 36), rat(1, 48), rat(1, 144)],
    )
}

fn method_4124c() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4124C",
        a: CoeffMat::from_i128(&[
            &[(0, 1), (0, 1), (0, 1), (0, 1)],
            &[(1, 2), (0, 1), (0, 1), (0, 1)],
            &[(-1, 6), (1, 6), (1, 2), (0, 1)],
            &[(1, 3), (5, 12), (1, 4), (0, 1)],
        ]),
        u: CoeffMat::from_i128(&[
            &[(1, 1), (1, 1)],
            &[(1, 1), (-2, 1)],
            &[(1, 1), (2, 1)],
            &[(1, 1), (-1, 1)],
        ]),
        b: CoeffMat::from_i128(&[
            &[(1, 6), (1, 3), (1, 3), (1, 6)],
            &[(1, 6), (1, 12), (-1, 12), (-1, 6)],
        ]),
        order: 4,
        stage_order: 1,
        l_second: 1,
    });
    entry(
        tableau,
        StartScheme::Triple(shift_start_4124()),
        vec![],
        FinishRule::FirstComponent,
        None,
        series_4124_shift(),
        None,
    )
}

fn method_4124d() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4124D",
        a: CoeffMat::from_i128(&[
            &[(0, 1), (0, 1), (0, 1), (0, 1)],
            &[(1, 4), (1, 4), (0, 1), (0, 1)],
            &[(1, 12), (1, 6), (1, 4), (0, 1)],
            &[(1, 3), (2, 3), (0, 1), (0, 1)],
        ]),
        u: CoeffMat::from_i128(&[
            &[(1, 1), (1, 1)],
            &[(1, 1), (-1, 2)],
            &[(1, 1), (1, 2)],
            &[(1, 1), (-1, 1)],
        ]),
        b: CoeffMat::from_i128(&[
            &[(1, 6), (1, 3), (1, 3), (1, 6)],
            &[(1, 6), (1, 3), (-1, 3), (-1, 6)],
        ]),
        order: 4,
        stage_order: 1,
        l_second: 1,
    });
    entry(
        tableau,
        StartScheme::Triple(shift_start_4124()),
        vec![],
        FinishRule::FirstComponent,
        None,
        series_4124_shift(),
        None,
    )
}

fn method_4124e() -> MethodEntry {
    let tableau = glm2(GlmSpecParts {
        name: "4124E",
        a: CoeffMat::from_i128(&[
            &[(0, 1), (0, 1), (0, 1), (0, 1)],
            &[(0, 1), (1, 2), (0, 1), (0, 1)],
            &[(1, 3), (1, 6), (0, 1), (0, 1)],
            &[(1, 3), (1, 6), (1, 2), (0, 1)],
        ]),
        u: CoeffMat::from_i128(&[
            &[(1, 1), (1, 1)],
            &[(1, 1), (1, 1)],
            &[(1, 1), (-1, 1)],
            &[(1, 1), (-1, 1)],
        ]),
        b: CoeffMat::from_i128(&[
            &[(1, 6), (1, 3), (1, 3), (1, 6)],
            &[(1, 6), (-1, 6), (1, 6), (-1, 6)],
        ]),
        order: 4,
        stage_order: 1,
        l_second: 1,
    });
    entry(
        tableau,
        StartScheme::Triple(shift_start_4124()),
        vec![],
        FinishRule::FirstComponent,
        None,
        series_4124_shift(),
        None,
    )
}

/// An RK method as a single-value GLM: `U = 1`, `B = b'`, `V = (1)`.
fn rk_as_glm(
    name: &str,
    rk: &RkTableau,
    order: usize,
    stage_order: usize,
) -> GlmTableau {
    let s = rk.s();
    let a = CoeffMat::from_rows(rk.a.clone());
    let u = CoeffMat::from_rows(vec![vec![Coeff::Exact(Rat::one())]; s]);
    let b = CoeffMat::from_rows(vec![rk.b.clone()]);
    let v = CoeffMat::from_i128(&[&[(1, 1)]]);
    let l = CoeffMat::from_i128(&[&[(1, 1)]]);
    let p = reversal(s);
    let mut m = GlmTableau::new(name, a, u, b, v, l, p, order, stage_order)
        .expect("registry tableau shape");
    m.validate_canonical().expect("registry tableau canonical form");
    resolve_symmetry_permutation(&mut m).expect("registry tableau symmetry");
    m
}

fn method_midpoint() -> MethodEntry {
    let rk = RkTableau::from_i128(&[&[(1, 2)]], &[(1, 1)]);
    let tableau = rk_as_glm("midpoint", &rk, 2, 1);
    let gsym = GsymData {
        g: CoeffMat::from_i128(&[&[(1, 1)]]),
        d: CoeffMat::from_i128(&[&[(1, 1)]]),
    };
    entry(
        tableau,
        StartScheme::Identity,
        vec![],
        FinishRule::FirstComponent,
        Some(gsym),
        StartSeries::identity(1),
        Some(rk),
    )
}

/// The 5-stage Suzuki fractal composition of the implicit midpoint rule,
/// written as a DIRK: weights g1 = g2 = g4 = g5 = 1/(4 - 4^(1/3)),
/// g3 = 1 - 4 g1; stage i has a_ij = g_j below the diagonal and
/// a_ii = g_i / 2.
fn method_suzuki4115() -> MethodEntry {
    let g1 = 1.0 / (4.0 - 4.0_f64.powf(1.0 / 3.0));
    let g = [g1, g1, 1.0 - 4.0 * g1, g1, g1];
    let s = 5;
    let mut a = vec![vec![Coeff::zero(); s]; s];
    for i in 0..s {
        for (j, gj) in g.iter().enumerate().take(i) {
            a[i][j] = Coeff::Surd(*gj);
        }
        a[i][i] = Coeff::Surd(g[i] / 2.0);
    }
    let b: Vec<Coeff> = g.iter().map(|&x| Coeff::Surd(x)).collect();
    let rk = RkTableau::new(a, b);
    let tableau = rk_as_glm("suzuki4115", &rk, 4, 1);
    let mut d = vec![vec![Coeff::zero(); s]; s];
    for (i, &gi) in g.iter().enumerate() {
        d[i][i] = Coeff::Surd(gi);
    }
    let gsym = GsymData {
        g: CoeffMat::from_i128(&[&[(1, 1)]]),
        d: CoeffMat::from_rows(d),
    };
    entry(
        tableau,
        StartScheme::Identity,
        vec![],
        FinishRule::FirstComponent,
        Some(gsym),
        StartSeries::identity(1),
        Some(rk),
    )
}

/// 3-stage Lobatto IIIB, order 4. Standard coefficients; comparator only.
/// Its A matrix is not lower triangular, so the stepping engine rejects
/// it; it participates in the algebraic checks and the catalogue.
fn method_lobatto3b() -> MethodEntry {
    let rk = RkTableau::from_i128(
        &[
            &[(1, 6), (-1, 6), (0, 1)],
            &[(1, 6), (1, 3), (0, 1)],
            &[(1, 6), (5, 6), (0, 1)],
        ],
        &[(1, 6), (2, 3), (1, 6)],
    );
    let tableau = rk_as_glm("lobatto3b", &rk, 4, 1);
    entry(
        tableau,
        StartScheme::Identity,
        vec![],
        FinishRule::FirstComponent,
        None,
        StartSeries::identity(1),
        Some(rk),
    )
}

fn build_registry() -> Registry {
    Registry {
        entries: vec![
            method_4123a(),
            method_4123b(),
            method_4123c(),
            method_4223a(),
            method_4124a(),
            method_4124b(),
            method_4124c(),
            method_4124d(),
            method_4124e(),
            method_midpoint(),
            method_suzuki4115(),
            method_lobatto3b(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_str;

    #[test]
    fn registry_has_all_methods() {
        let names = registry().names();
        for n in [
            "4123A", "4123B", "4123C", "4223A", "4124A", "4124B", "4124C", "4124D", "4124E",
            "midpoint", "suzuki4115", "lobatto3b",
        ] {
            assert!(names.contains(&n), "missing {n}");
        }
        assert!(registry().lookup("4123a").is_some(), "lookup is case-insensitive");
        assert!(registry().lookup("nosuch").is_none());
    }

    #[test]
    fn lookup_4123a_matches_printed_coefficients() {
        let m = &registry().lookup("4123A").unwrap().tableau;
        assert_eq!(m.a[(1, 1)].as_exact().unwrap(), rat(1, 6));
        let v = m.v.to_rat().unwrap();
        assert_eq!(v, RatMat::diag(&[rint(1), rint(-1)]));
        let l = m.l.to_rat().unwrap();
        assert_eq!(l, RatMat::diag(&[rint(1), rint(-1)]));
    }

    #[test]
    fn lookup_4124b_gsymplectic_data() {
        let e = registry().lookup("4124B").unwrap();
        let g = e.gsym.as_ref().unwrap().g.to_rat().unwrap();
        assert_eq!(g, RatMat::diag(&[rint(1), rat(-1, 3)]));
        let d = e.gsym.as_ref().unwrap().d.to_rat().unwrap();
        assert_eq!(
            d,
            RatMat::diag(&[rat(-1, 6), rat(2, 3), rat(2, 3), rat(-1, 6)])
        );
    }

    #[test]
    fn lookup_4124d_has_identity_l() {
        let m = &registry().lookup("4124D").unwrap().tableau;
        assert_eq!(m.l.to_rat().unwrap(), RatMat::identity(2));
    }

    #[test]
    fn equivalence_transform_identity_is_noop() {
        let m = &registry().lookup("4123A").unwrap().tableau;
        let t = RatMat::identity(2);
        let out = equivalence_transform(m, &t).unwrap();
        assert_eq!(out.a.to_rat().unwrap(), m.a.to_rat().unwrap());
        assert_eq!(out.u.to_rat().unwrap(), m.u.to_rat().unwrap());
        assert_eq!(out.b.to_rat().unwrap(), m.b.to_rat().unwrap());
        assert_eq!(out.v.to_rat().unwrap(), m.v.to_rat().unwrap());
    }

    #[test]
    fn equivalence_transform_diagonal_scaling() {
        let m = &registry().lookup("4123A").unwrap().tableau;
        let t = RatMat::diag(&[rint(1), rint(2)]);
        let out = equivalence_transform(m, &t).unwrap();
        let u = out.u.to_rat().unwrap();
        let b = out.b.to_rat().unwrap();
        let mu = m.u.to_rat().unwrap();
        let mb = m.b.to_rat().unwrap();
        for i in 0..3 {
            assert_eq!(u[(i, 1)], mu[(i, 1)] * rat(2, 1), "U column 2 doubled");
            assert_eq!(b[(1, i)], mb[(1, i)] / rat(2, 1), "B row 2 halved");
        }
        assert_eq!(out.v.to_rat().unwrap(), m.v.to_rat().unwrap());
    }

    #[test]
    fn equivalence_transform_rejects_singular() {
        let m = &registry().lookup("4123A").unwrap().tableau;
        let t = RatMat::from_i128(&[&[(1, 1), (2, 1)], &[(2, 1), (4, 1)]]);
        assert!(matches!(
            equivalence_transform(m, &t),
            Err(TableauError::SingularTransform)
        ));
    }

    #[test]
    fn adjoint_reproduces_printed_inverse_tableaux() {
        // The primary triples print forward and inverse tableaux that are
        // exact inverse pairs.
        for name in ["4123A", "4123B", "4123C", "4124A", "4124B"] {
            let e = registry().lookup(name).unwrap();
            let StartScheme::Triple(t) = &e.start else {
                panic!()
            };
            assert!(
                t.forward.is_inverse_pair(t.inverse.as_ref().unwrap()),
                "inverse pair mismatch for {name}"
            );
        }
    }

    #[test]
    fn alternate_triples_flagging() {
        let e = registry().lookup("4123A").unwrap();
        assert_eq!(e.alternates.len(), 2);
        let explicit = &e.alternates[0];
        let surd15 = &e.alternates[1];
        assert!(
            !explicit.verified,
            "printed explicit alternate fails its order conditions and must stay flagged"
        );
        assert!(surd15.verified, "sqrt(15) alternate verifies (row-sum abscissae)");
    }

    #[test]
    fn suzuki_weights_sum_to_one() {
        let e = registry().lookup("suzuki4115").unwrap();
        let b = e.rk_form.as_ref().unwrap().b_f64();
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(b.len(), 5);
        assert!(b[2] < 0.0, "middle Suzuki weight is negative");
    }

    #[test]
    fn lobatto3b_not_steppable_shape() {
        let e = registry().lookup("lobatto3b").unwrap();
        assert!(!e.tableau.is_lower_triangular());
        assert_eq!(e.tableau.r, 1);
    }

    #[test]
    fn consistency_vector_display() {
        // Nothing deep: formatting helper keeps fractions readable.
        assert_eq!(rat_str(&rat(25, 48)), "25/48");
        assert_eq!(rat_str(&rint(-3)), "-3");
    }
}
