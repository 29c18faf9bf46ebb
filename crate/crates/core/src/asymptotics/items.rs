use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::classify::{classify, ClassificationReport};
use super::{dense_of, kernel_of_limit, AsymptoticReport, AsymptoticsError, Doubling};
use crate::linalg::{hermitian_eig, operator_norm, psd_sqrt, vec_norm, ComplexMatrix, HermitianMatrix};
use crate::models::OperatorModel;

/// Relative tolerance for every item.
pub const ITEM_TOL: f64 = 1e-6;
/// Relative eigenvalue floor separating "positive" from singular.
const STRICT_TOL: f64 = 1e-8;
/// Power index used for "eventually" statements.
const LATE_N: u64 = 4096;
/// Consecutive powers averaged after `LATE_N`.
const LATE_WINDOW: usize = 256;
const CLASSIFY_HORIZON: usize = 4096;

/// Which family of statements to check against a computed limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemSet {
    /// Statements about the strong limit `A` of `T*ⁿTⁿ` for a contraction.
    Contraction,
    /// Statements about `A_φ` for a Banach limit φ. On finite-dimensional
    /// power bounded operators every Banach limit gives the Cesàro limit, so
    /// the computed `Q` stands in for `A_φ`.
    BanachLimit,
    /// Statements about the Cesàro limit `Q`.
    Cesaro,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ItemCheck {
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub note: String,
}

impl ItemCheck {
    fn bound(residual: f64, tolerance: f64, note: impl Into<String>) -> Self {
        ItemCheck { passed: residual <= tolerance, residual, tolerance, note: note.into() }
    }

    fn vacuous(note: impl Into<String>) -> Self {
        ItemCheck { passed: true, residual: 0.0, tolerance: ITEM_TOL, note: format!("vacuous: {}", note.into()) }
    }
}

/// A named condition `measure ≤ threshold`.
struct Cond {
    name: &'static str,
    measure: f64,
    threshold: f64,
}

impl Cond {
    fn holds(&self) -> bool {
        self.measure <= self.threshold
    }
}

/// All conditions hold or all fail. The residual is the largest measure
/// among the conditions judged to hold.
fn equivalent(conds: &[Cond], extra: &str) -> ItemCheck {
    let first = conds[0].holds();
    let passed = conds.iter().all(|c| c.holds() == first);
    let residual = conds.iter().filter(|c| c.holds()).map(|c| c.measure / c.threshold * ITEM_TOL).fold(0.0, f64::max);
    let mut note: Vec<String> = conds.iter().map(|c| format!("{}={}", c.name, c.holds())).collect();
    if !extra.is_empty() {
        note.push(extra.to_string());
    }
    ItemCheck { passed, residual, tolerance: ITEM_TOL, note: note.join(", ") }
}

fn norm(m: &ComplexMatrix) -> Result<f64, AsymptoticsError> {
    if m.max_abs() == 0.0 {
        Ok(0.0)
    } else {
        Ok(operator_norm(m)?)
    }
}

fn eig_range(m: &ComplexMatrix) -> Result<(f64, f64), AsymptoticsError> {
    let e = hermitian_eig(&HermitianMatrix::new(m.clone())?)?;
    Ok((e.min_eigenvalue(), e.max_eigenvalue()))
}

struct Context {
    t: ComplexMatrix,
    l: ComplexMatrix,
    dim: usize,
    t_norm: f64,
    l_norm: f64,
    scale: f64,
    late: ComplexMatrix,
    class: ClassificationReport,
}

impl Context {
    fn new(model: &OperatorModel, report: &AsymptoticReport) -> Result<Self, AsymptoticsError> {
        let t = dense_of(model)?;
        let l = report.limit.matrix().clone();
        if t.rows() != l.rows() {
            return Err(AsymptoticsError::DimensionMismatch { expected: t.rows(), found: l.rows() });
        }
        let t_norm = norm(&t)?;
        let l_norm = norm(&l)?;
        Ok(Context {
            dim: t.rows(),
            late: t.pow(LATE_N),
            class: classify(model, CLASSIFY_HORIZON, STRICT_TOL)?,
            t_norm,
            l_norm,
            scale: l_norm.max(1.0),
            t,
            l,
        })
    }

    fn id(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dim)
    }

    fn is_zero(&self, name: &'static str, m: &ComplexMatrix, scale: f64) -> Result<Cond, AsymptoticsError> {
        Ok(Cond { name, measure: norm(m)?, threshold: ITEM_TOL * scale })
    }

    fn limit_zero(&self) -> Cond {
        Cond { name: "L=O", measure: self.l_norm, threshold: ITEM_TOL }
    }

    fn positive(&self) -> Result<Cond, AsymptoticsError> {
        let (lo, _) = eig_range(&self.l)?;
        // measure ≤ threshold ⟺ λ_min > STRICT_TOL·‖L‖
        let floor = STRICT_TOL * self.l_norm;
        Ok(Cond { name: "L>O", measure: if lo > floor && self.l_norm > 0.0 { 0.0 } else { 1.0 }, threshold: 0.5 })
    }

    fn flag(name: &'static str, holds: bool) -> Cond {
        Cond { name, measure: if holds { 0.0 } else { 1.0 }, threshold: 0.5 }
    }

    fn fixed_point(&self) -> Result<ItemCheck, AsymptoticsError> {
        let r = norm(&self.t.congruence(&self.l).sub(&self.l))?;
        Ok(ItemCheck::bound(r, ITEM_TOL * self.scale, "||T*LT - L||"))
    }

    fn annihilation(&self) -> Result<ItemCheck, AsymptoticsError> {
        let s = self.scale * self.t_norm.max(1.0);
        Ok(equivalent(
            &[
                self.is_zero("LT=O", &self.l.matmul(&self.t), s)?,
                self.is_zero("TL=O", &self.t.matmul(&self.l), s)?,
                self.limit_zero(),
            ],
            "",
        ))
    }

    fn commutator(&self) -> Result<Cond, AsymptoticsError> {
        let c = self.l.matmul(&self.t).sub(&self.t.matmul(&self.l));
        self.is_zero("LT=TL", &c, self.scale * self.t_norm.max(1.0))
    }

    fn idempotent(&self) -> Result<Cond, AsymptoticsError> {
        self.is_zero("L=L^2", &self.l.sub(&self.l.matmul(&self.l)), self.scale * self.scale)
    }

    fn kernel(&self, model: &OperatorModel, report: &AsymptoticReport) -> Result<ItemCheck, AsymptoticsError> {
        let k = kernel_of_limit(&report.limit, model, ITEM_TOL)?;
        let late_zero = self.is_zero("T^n->0", &self.late, 1.0)?;
        let mut check = equivalent(&[late_zero, self.limit_zero()], &format!("orbit cross-check={}", k.cross_check));
        check.passed &= k.cross_check;
        Ok(check)
    }
}

/// Checks each statement about the limit in `report` with a concrete
/// residual at relative tolerance `ITEM_TOL`. Implications are checked in
/// the stated direction only.
pub fn verify_theorem_items(
    t: &OperatorModel,
    report: &AsymptoticReport,
    which: ItemSet,
) -> Result<BTreeMap<String, ItemCheck>, AsymptoticsError> {
    let ctx = Context::new(t, report)?;
    match which {
        ItemSet::Contraction => contraction_items(t, report, &ctx),
        ItemSet::BanachLimit | ItemSet::Cesaro => cesaro_items(t, report, &ctx),
    }
}

fn contraction_items(
    model: &OperatorModel,
    report: &AsymptoticReport,
    ctx: &Context,
) -> Result<BTreeMap<String, ItemCheck>, AsymptoticsError> {
    let mut out = BTreeMap::new();
    let id = ctx.id();
    let (lo, hi) = eig_range(&ctx.l)?;
    out.insert("bounds".into(), ItemCheck::bound((-lo).max(hi - 1.0).max(0.0), ITEM_TOL, "O <= A <= I"));
    out.insert("fixed_point".into(), ctx.fixed_point()?);
    out.insert(
        "norm_one".into(),
        if ctx.limit_zero().holds() {
            ItemCheck::vacuous("A = O")
        } else {
            let r = (ctx.l_norm - 1.0).abs().max((ctx.t_norm - 1.0).abs());
            ItemCheck::bound(r, ITEM_TOL, "A != O implies ||A|| = ||T|| = 1")
        },
    );
    out.insert("annihilation".into(), ctx.annihilation()?);
    out.insert("commutation".into(), equivalent(&[ctx.commutator()?, ctx.idempotent()?], ""));

    let root = psd_sqrt(&report.limit)?;
    let d1 = norm(&id.sub(&ctx.l).matmul(&ctx.late))?;
    let d2 = norm(&id.sub(root.matrix()).matmul(&ctx.late))?;
    out.insert(
        "defect_decay".into(),
        ItemCheck::bound(d1.max(d2), ITEM_TOL, format!("||(I-A)T^n||, ||(I-A^1/2)T^n|| at n = {LATE_N}")),
    );
    let orbit = ctx.late.congruence(&ctx.l.matmul(&ctx.l)).sub(&ctx.l);
    out.insert(
        "orbit_limit".into(),
        ItemCheck::bound(norm(&orbit)?, ITEM_TOL, format!("||T*^n A^2 T^n - A|| at n = {LATE_N}")),
    );
    out.insert("kernel".into(), ctx.kernel(model, report)?);

    // N(I − A) consists of vectors with isometric orbits
    let eig = hermitian_eig(&HermitianMatrix::new(ctx.l.clone())?)?;
    let mut fixed_dev = 0.0f64;
    let mut moving_ok = true;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let mut v = eig.eigenvectors.column(k);
        if lam >= 1.0 - ITEM_TOL {
            for _ in 0..64 {
                v = ctx.t.mul_vec(&v);
                fixed_dev = fixed_dev.max((vec_norm(&v) - 1.0).abs());
            }
        } else {
            let r = vec_norm(&ctx.late.mul_vec(&v));
            moving_ok &= r * r <= 1.0 - 0.5 * ITEM_TOL;
        }
    }
    let iso = ctx.is_zero("T isometry", &ctx.t.congruence(&id).sub(&id), 1.0)?;
    let a_id = ctx.is_zero("A=I", &ctx.l.sub(&id), 1.0)?;
    let mut check = equivalent(&[iso, a_id], &format!("eigenspace orbit deviation {fixed_dev:e}"));
    check.passed &= fixed_dev <= ITEM_TOL && moving_ok;
    check.residual = check.residual.max(fixed_dev);
    out.insert("isometric_part".into(), check);

    out.insert(
        "invertibility".into(),
        equivalent(&[ctx.positive()?, Context::flag("similar to isometry", ctx.class.similar_to_isometry)], ""),
    );
    Ok(out)
}

fn cesaro_items(
    model: &OperatorModel,
    report: &AsymptoticReport,
    ctx: &Context,
) -> Result<BTreeMap<String, ItemCheck>, AsymptoticsError> {
    let mut out = BTreeMap::new();
    let id = ctx.id();
    let class = &ctx.class;
    let bounded = class.power_bounded.holds;
    let beta2 = class.beta_hat * class.beta_hat;
    let (lo, hi) = eig_range(&ctx.l)?;
    let upper = if bounded { (hi - beta2).max(0.0) / beta2 } else { 0.0 };
    out.insert(
        "bounds".into(),
        ItemCheck::bound(
            (-lo / ctx.scale).max(upper),
            ITEM_TOL,
            if bounded { "O <= L <= beta^2 I" } else { "O <= L; upper bound skipped, not power bounded" },
        ),
    );
    out.insert("fixed_point".into(), ctx.fixed_point()?);
    out.insert(
        "norm_one".into(),
        if ctx.limit_zero().holds() {
            ItemCheck::vacuous("L = O")
        } else {
            let r = (1.0 - ctx.l_norm).max(1.0 - ctx.t_norm).max(0.0);
            ItemCheck::bound(r, ITEM_TOL, "L != O implies 1 <= ||L|| and 1 <= ||T||")
        },
    );
    out.insert("annihilation".into(), ctx.annihilation()?);

    let commutes = ctx.commutator()?;
    let idem = ctx.idempotent()?;
    out.insert(
        "commutation".into(),
        if commutes.holds() {
            ItemCheck::bound(idem.measure, idem.threshold, "LT = TL implies L = L^2")
        } else {
            ItemCheck::vacuous("LT != TL")
        },
    );

    if idem.holds() {
        let mut worst = f64::NEG_INFINITY;
        let mut p = id.clone();
        let l2 = ctx.l.matmul(&ctx.l);
        for _ in 1..=8 {
            p = p.matmul(&ctx.t);
            let c = ctx.l.matmul(&p).sub(&p.matmul(&ctx.l));
            let gap = c.congruence(&id).sub(&l2.scale(beta2 - 1.0));
            worst = worst.max(eig_range(&gap)?.1);
        }
        out.insert(
            "commutator_bound".into(),
            ItemCheck::bound(worst.max(0.0) / beta2, ITEM_TOL, "||(LT^n - T^nL)x||^2 <= (beta^2 - 1)||Lx||^2, n <= 8"),
        );
        let mut p = ctx.late.clone();
        let mut acc = 0.0;
        for _ in 0..LATE_WINDOW {
            let c = ctx.l.matmul(&p).sub(&p.matmul(&ctx.l));
            acc += norm(&c)?.powi(2);
            p = p.matmul(&ctx.t);
        }
        out.insert(
            "commutator_mean".into(),
            ItemCheck::bound(
                acc / LATE_WINDOW as f64 / ctx.scale.powi(2),
                ITEM_TOL,
                format!("mean of ||LT^n - T^nL||^2 over n in [{LATE_N}, {})", LATE_N as usize + LATE_WINDOW),
            ),
        );
        out.insert(
            "projection_norm".into(),
            if ctx.limit_zero().holds() {
                ItemCheck::vacuous("L = O")
            } else {
                ItemCheck::bound((ctx.l_norm - 1.0).abs(), ITEM_TOL, "L = L^2 != O implies ||L|| = 1")
            },
        );
    } else {
        for key in ["commutator_bound", "commutator_mean", "projection_norm"] {
            out.insert(key.into(), ItemCheck::vacuous("L != L^2"));
        }
    }

    // invariant parts of (I − L)², (I − L^½)² and L² under Y ↦ T*YT
    let levels = report.levels().max(1);
    let mut doubling = Doubling::new(&ctx.t);
    let root = psd_sqrt(&report.limit)?;
    let i_l = id.sub(&ctx.l);
    let i_r = id.sub(root.matrix());
    let d1 = doubling.smoothed(&i_l.matmul(&i_l), levels);
    let d2 = doubling.smoothed(&i_r.matmul(&i_r), levels);
    let l2 = doubling.smoothed(&ctx.l.matmul(&ctx.l), levels);
    let c = (ctx.l_norm * ctx.l_norm - 1.0).max(0.0);
    let inv_norm = 1.0 / (1.0 + lo.max(0.0).sqrt());
    let s2 = ctx.scale * ctx.scale;
    let g1 = eig_range(&d1.sub(&ctx.l.scale(c)))?.1.max(0.0);
    let g2 = eig_range(&d2.sub(&ctx.l.scale(inv_norm * inv_norm * c)))?.1.max(0.0);
    let neg = (-eig_range(&d1)?.0).max(-eig_range(&d2)?.0).max(0.0);
    out.insert(
        "defect_mean".into(),
        ItemCheck::bound(
            g1.max(g2).max(neg) / s2,
            ITEM_TOL,
            "0 <= lim mean ||(I-L)T^n x||^2 <= (||L||^2 - 1)||L^1/2 x||^2, same for I - L^1/2",
        ),
    );
    out.insert(
        "orbit_identity".into(),
        ItemCheck::bound(
            norm(&l2.sub(&ctx.l).sub(&d1))? / s2,
            ITEM_TOL,
            "lim mean ||LT^n x||^2 = ||L^1/2 x||^2 + lim mean ||(I-L)T^n x||^2",
        ),
    );

    if bounded {
        let mut k = ctx.kernel(model, report)?;
        let c0 = equivalent(&[Context::flag("C0", class.class_c0.holds), ctx.limit_zero()], "");
        k.passed &= c0.passed;
        k.note = format!("{}; {}", k.note, c0.note);
        out.insert("kernel".into(), k);
    } else {
        out.insert("kernel".into(), ItemCheck::vacuous("not power bounded"));
    }

    // vectors in N(β²I − L) satisfy ‖x‖ ≤ liminf ‖Tⁿx‖ ≤ limsup ‖Tⁿx‖ ≤ β‖x‖
    let eig = hermitian_eig(&HermitianMatrix::new(ctx.l.clone())?)?;
    let mut dev = 0.0f64;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if (lam - beta2).abs() > ITEM_TOL * beta2 {
            continue;
        }
        let mut v = ctx.late.mul_vec(&eig.eigenvectors.column(k));
        for _ in 0..LATE_WINDOW {
            let r = vec_norm(&v);
            dev = dev.max(1.0 - r).max(r - class.beta_hat);
            v = ctx.t.mul_vec(&v);
        }
    }
    let iso = Context::flag("T isometry", class.isometry.holds);
    let mut chain = equivalent(
        &[
            ctx.is_zero("L=beta^2 I", &ctx.l.sub(&id.scale(beta2)), beta2)?,
            ctx.is_zero("L=I", &ctx.l.sub(&id), 1.0)?,
            iso,
        ],
        &format!("extremal eigenspace deviation {dev:e}"),
    );
    chain.passed &= dev <= ITEM_TOL * class.beta_hat;
    chain.residual = chain.residual.max(dev);
    out.insert("extremal".into(), chain);

    let positive = ctx.positive()?;
    out.insert(
        "inner_product".into(),
        if bounded {
            equivalent(&[Context::flag("C1", class.class_c1.holds), ctx.positive()?], "")
        } else {
            ItemCheck::vacuous("not power bounded")
        },
    );
    out.insert(
        "positive_equivalences".into(),
        if positive.holds() {
            equivalent(
                &[
                    commutes,
                    idem,
                    ctx.is_zero("L=I", &ctx.l.sub(&id), 1.0)?,
                    Context::flag("T isometry", class.isometry.holds),
                ],
                "",
            )
        } else {
            ItemCheck::vacuous("L not positive")
        },
    );
    out.insert(
        "similarity_equivalences".into(),
        if bounded {
            let lower = lo.max(0.0);
            let equiv = Cond {
                name: "norms equivalent",
                measure: if lower > STRICT_TOL * ctx.l_norm && ctx.l_norm > 0.0 { 0.0 } else { 1.0 },
                threshold: 0.5,
            };
            equivalent(
                &[
                    positive,
                    equiv,
                    Context::flag("similar to isometry", class.similar_to_isometry),
                    Context::flag("power bounded below", class.power_bounded_below.holds),
                ],
                "",
            )
        } else {
            ItemCheck::vacuous("not power bounded")
        },
    );
    Ok(out)
}
